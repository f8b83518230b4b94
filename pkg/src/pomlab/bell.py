"""The 2^(n-1) x n Bell operator tied to the POM success probability."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import numerics as nm
from .construct import MeasurementSetup
from .task import _check_n, sign_matrix, tsirelson_value

IMAG_TOL = 1e-10
LHV_MAX_N = 5


@dataclass(frozen=True)
class BellOperator:
    n: int
    matrix: np.ndarray
    setup: MeasurementSetup


def _alice_combination(setup: MeasurementSetup, y: int) -> np.ndarray:
    s = sign_matrix(setup.n).s
    return sum(float(s[i, y]) * a for i, a in enumerate(setup.alice))


def bell_operator(setup: MeasurementSetup) -> BellOperator:
    """sum_y sum_i s[i][y] A_i (x) B_y."""
    dim = setup.d_a * setup.d_b
    op = np.zeros((dim, dim), dtype=complex)
    for y, b in enumerate(setup.bob):
        op += nm.kron(_alice_combination(setup, y), b)
    return BellOperator(setup.n, op, setup)


def bell_value(setup: MeasurementSetup) -> float:
    val = setup.state.expectation(bell_operator(setup).matrix)
    if abs(val.imag) > IMAG_TOL:
        raise ArithmeticError(f"Bell expectation has imaginary part {val.imag:.3e}")
    return val.real


def spectral_max(op: BellOperator) -> float:
    return float(nm.eigvalsh(op.matrix)[-1])


@dataclass(frozen=True)
class SOSCertificate:
    residual: float
    gamma_min_eig: float

    @property
    def valid(self) -> bool:
        return self.residual <= 1e-10 and self.gamma_min_eig >= -1e-9


def sos_terms(setup: MeasurementSetup) -> list[np.ndarray]:
    """M_i = sum_y s[i][y] (I (x) B_y)/sqrt(n) - A_i (x) I."""
    n = setup.n
    s = sign_matrix(n).s
    eye_a = np.eye(setup.d_a, dtype=complex)
    eye_b = np.eye(setup.d_b, dtype=complex)
    bobs = [nm.kron(eye_a, b) for b in setup.bob]
    terms = []
    for i, a in enumerate(setup.alice):
        comb = sum(float(s[i, y]) * bobs[y] for y in range(n)) / math.sqrt(n)
        terms.append(comb - nm.kron(a, eye_b))
    return terms


def sos_certificate(setup: MeasurementSetup) -> SOSCertificate:
    """Check gamma_n = 2^(n-1) sqrt(n) I - B_n against (sqrt(n)/2) sum M_i^dag M_i.

    The decomposition is an operator identity for any dichotomic observables,
    so a nonzero residual flags inputs that are not involutions.
    """
    n = setup.n
    op = bell_operator(setup).matrix
    gamma = tsirelson_value(n) * np.eye(op.shape[0]) - op
    sos = sum(m.conj().T @ m for m in sos_terms(setup)) * (math.sqrt(n) / 2.0)
    residual = float(np.linalg.norm(gamma - sos))
    gamma = 0.5 * (gamma + gamma.conj().T)
    return SOSCertificate(residual, float(nm.eigvalsh(gamma)[0]))


def _lhv_chunk(s: np.ndarray, lo: int, hi: int) -> int:
    k = s.shape[0]
    idx = np.arange(lo, hi, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    a = 1 - 2 * ((idx[:, None] >> shifts) & 1)  # (chunk, k) of +/-1
    return int(np.abs(a @ s).sum(axis=1).max())


def lhv_max(n: int, workers: int = 1, chunk: int = 1 << 14) -> int:
    """Largest value of the Bell expression over deterministic +/-1 assignments.

    Alice's 2^(2^(n-1)) assignments are enumerated; each Bob setting then
    contributes |sum_i s[i][y] a_i|.
    """
    _check_n(n, lo=2, hi=LHV_MAX_N)
    s = sign_matrix(n).s
    total = 1 << s.shape[0]
    bounds = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return max(ex.map(lambda b: _lhv_chunk(s, *b), bounds))
    return max(_lhv_chunk(s, lo, hi) for lo, hi in bounds)
