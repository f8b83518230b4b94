"""Quantum strategies for the POM game.

Bob's observables come from a recursive family of pairwise anti-commuting
Pauli strings; Alice's are signed combinations of them, and Alice steers
Bob's half of a maximally entangled state to prepare the encodings.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nm
from .task import BitString, _check_n, dot, input_ordering, parity_set, sign_matrix, to_str

log = logging.getLogger(__name__)

MAX_QUANTUM_N = 12
INVOLUTION_TOL = 1e-12
STEERING_TOL = 1e-9


def check_observable(m, atol: float = INVOLUTION_TOL) -> np.ndarray:
    """Return ``m`` as a complex array after checking it is a Hermitian involution."""
    m = nm.as_matrix(m)
    if not nm.is_hermitian(m, atol):
        raise ValueError("observable is not Hermitian")
    if not nm.allclose(m @ m, np.eye(m.shape[0]), atol):
        raise ValueError("observable is not an involution (M^2 != I)")
    return m


def local_dim(n: int) -> int:
    return 2 ** (n // 2)


@dataclass(frozen=True)
class PureState:
    vector: np.ndarray
    d_a: int
    d_b: int

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).ravel()
        if v.size != self.d_a * self.d_b:
            raise ValueError(f"state has {v.size} amplitudes, expected {self.d_a * self.d_b}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (norm {np.linalg.norm(v)!r})")
        object.__setattr__(self, "vector", v)

    def density(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def expectation(self, op: np.ndarray) -> complex:
        return complex(self.vector.conj() @ (op @ self.vector))


@dataclass(frozen=True)
class MeasurementSetup:
    n: int
    state: PureState
    alice: tuple[np.ndarray, ...]
    bob: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "alice", tuple(nm.as_matrix(a) for a in self.alice))
        object.__setattr__(self, "bob", tuple(nm.as_matrix(b) for b in self.bob))
        if len(self.alice) != 2 ** (self.n - 1):
            raise ValueError(f"need {2 ** (self.n - 1)} Alice observables, got {len(self.alice)}")
        if len(self.bob) != self.n:
            raise ValueError(f"need {self.n} Bob observables, got {len(self.bob)}")
        if any(a.shape != (self.state.d_a,) * 2 for a in self.alice):
            raise ValueError("Alice observable dimension does not match the state")
        if any(b.shape != (self.state.d_b,) * 2 for b in self.bob):
            raise ValueError("Bob observable dimension does not match the state")

    @property
    def d_a(self) -> int:
        return self.state.d_a

    @property
    def d_b(self) -> int:
        return self.state.d_b

    def validate(self, atol: float = INVOLUTION_TOL) -> None:
        for m in self.alice + self.bob:
            check_observable(m, atol)


def bob_basis(n: int) -> list[np.ndarray]:
    """Pairwise anti-commuting Pauli strings B_{n,1..n} of dimension 2^(n//2)."""
    _check_n(n, lo=2, hi=MAX_QUANTUM_N)
    if n == 2:
        return [nm.SIGMA_X.copy(), nm.SIGMA_Y.copy()]
    if n == 3:
        return [nm.SIGMA_X.copy(), nm.SIGMA_Y.copy(), nm.SIGMA_Z.copy()]
    if n % 2 == 0:
        prev = bob_basis(n - 1)
        eye = np.eye(prev[0].shape[0], dtype=complex)
        return [nm.kron(nm.SIGMA_X, b) for b in prev] + [nm.kron(nm.SIGMA_Y, eye)]
    prev = bob_basis(n - 2)
    eye = np.eye(prev[0].shape[0], dtype=complex)
    return [nm.kron(nm.SIGMA_X, b) for b in prev] + [nm.kron(nm.SIGMA_Y, eye), nm.kron(nm.SIGMA_Z, eye)]


def alice_observables(n: int, basis: list[np.ndarray] | None = None) -> list[np.ndarray]:
    """A_i = (1/sqrt n) sum_y s[i][y] B_y over the rows of the sign matrix."""
    if basis is None:
        basis = bob_basis(n)
    s = sign_matrix(n).s
    stacked = np.stack(basis)
    return [np.tensordot(row, stacked, axes=1) / math.sqrt(n) for row in s.astype(float)]


def bob_measurements(n: int) -> list[np.ndarray]:
    # (M (x) I)|phi> = (I (x) M^T)|phi>, so Bob measures the transposed basis.
    return [b.T.copy() for b in bob_basis(n)]


def maximally_entangled(d: int) -> PureState:
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = 1.0 / math.sqrt(d)
    return PureState(v, d, d)


def canonical_state(n: int) -> PureState:
    _check_n(n, lo=2, hi=MAX_QUANTUM_N)
    return maximally_entangled(local_dim(n))


def canonical_setup(n: int) -> MeasurementSetup:
    return MeasurementSetup(n, canonical_state(n), tuple(alice_observables(n)), tuple(bob_measurements(n)))


# --------------------------------------------------------------------------
# Steering


@dataclass(frozen=True)
class EncodingEnsemble:
    n: int
    states: dict[BitString, np.ndarray]
    marginal: np.ndarray  # Bob's reduced state Tr_A[rho_AB]
    steering_deviation: float = 0.0  # max |p(+) - 1/2| over Alice's measurements
    weight: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "weight", 1.0 / 2**self.n)


def steer(state: PureState, alice_op: np.ndarray) -> np.ndarray:
    """Tr_A[(X (x) I) |psi><psi|] for an operator X on Alice's side."""
    lhs = nm.kron(alice_op, np.eye(state.d_b))
    return nm.partial_trace(lhs @ state.density(), state.d_a, state.d_b, "A")


def encode_ensemble(setup: MeasurementSetup) -> EncodingEnsemble:
    """Bob's states rho_x obtained when Alice measures A_i and sees +1 / -1.

    For entry i and its complement partner j the encodings are
    ``2 Tr_A[((I +/- A_i)/2 (x) I) rho_AB]``. The factor 2 is the inverse of
    the outcome probability on a maximally entangled state.
    """
    order = input_ordering(setup.n)
    eye = np.eye(setup.d_a, dtype=complex)
    marginal = nm.partial_trace(setup.state.density(), setup.d_a, setup.d_b, "A")
    states: dict[BitString, np.ndarray] = {}
    worst = 0.0
    for i, a in enumerate(setup.alice):
        plus = steer(setup.state, 0.5 * (eye + a))
        minus = marginal - plus
        worst = max(worst, abs(np.trace(plus).real - 0.5))
        states[order.entries[i]] = 2.0 * plus
        states[order.entries[order.partner(i)]] = 2.0 * minus
    if worst > STEERING_TOL:
        log.warning("steering probability deviates from 1/2 by %.3e; state is not maximally entangled", worst)
    return EncodingEnsemble(setup.n, states, marginal, worst)


@dataclass(frozen=True)
class ParityReport:
    max_deviation: float
    deviations: dict[str, float]

    @property
    def ok(self) -> bool:
        return self.max_deviation <= 1e-12


def verify_parity_obliviousness(e: EncodingEnsemble) -> ParityReport:
    """Frobenius distance between the s-parity-0 and s-parity-1 mixtures, per s."""
    table = {}
    for s in parity_set(e.n):
        diff = sum((1 - 2 * dot(s, x)) * rho for x, rho in e.states.items())
        table[to_str(s)] = float(np.linalg.norm(diff))
    return ParityReport(max(table.values()), table)


# --------------------------------------------------------------------------
# Random setups (used by property tests and the acceptance suite)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_involution(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-rotated diag(+1..., -1...) with both eigenvalues present when d > 1."""
    u = haar_unitary(d, rng)
    plus = int(rng.integers(1, d)) if d > 1 else 1
    signs = np.where(np.arange(d) < plus, 1.0, -1.0)
    m = (u * signs) @ u.conj().T
    return 0.5 * (m + m.conj().T)


def haar_state(d_a: int, d_b: int, rng: np.random.Generator) -> PureState:
    v = rng.standard_normal(d_a * d_b) + 1j * rng.standard_normal(d_a * d_b)
    return PureState(v / np.linalg.norm(v), d_a, d_b)


def random_setup(n: int, rng: np.random.Generator, d: int | None = None, haar: bool = False) -> MeasurementSetup:
    """Random dichotomic observables on a canonical (or Haar-random) state."""
    d = local_dim(n) if d is None else d
    state = haar_state(d, d, rng) if haar else maximally_entangled(d)
    alice = tuple(random_involution(d, rng) for _ in range(2 ** (n - 1)))
    bob = tuple(random_involution(d, rng) for _ in range(n))
    return MeasurementSetup(n, state, alice, bob)


# --------------------------------------------------------------------------
# JSON


def _encode_matrix(m: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m).ravel()]


def _decode_matrix(pairs, d: int) -> np.ndarray:
    a = np.array(pairs, dtype=float)
    if a.shape != (d * d, 2):
        raise ValueError(f"matrix has {a.shape[0]} entries, expected {d * d}")
    return (a[:, 0] + 1j * a[:, 1]).reshape(d, d)


def setup_to_dict(setup: MeasurementSetup) -> dict:
    if setup.d_a != setup.d_b:
        raise ValueError("serialization requires equal local dimensions")
    return {
        "n": setup.n,
        "dim": setup.d_a,
        "state": _encode_matrix(setup.state.vector),
        "alice": [_encode_matrix(a) for a in setup.alice],
        "bob": [_encode_matrix(b) for b in setup.bob],
    }


def setup_from_dict(doc: dict) -> MeasurementSetup:
    n, d = int(doc["n"]), int(doc["dim"])
    st = np.array(doc["state"], dtype=float)
    if st.shape != (d * d, 2):
        raise ValueError(f"state has {st.shape[0]} amplitudes, expected {d * d}")
    vec = st[:, 0] + 1j * st[:, 1]
    return MeasurementSetup(
        n,
        PureState(vec, d, d),
        tuple(_decode_matrix(a, d) for a in doc["alice"]),
        tuple(_decode_matrix(b, d) for b in doc["bob"]),
    )


def dump_setup(setup: MeasurementSetup, path) -> None:
    with open(path, "w") as fh:
        json.dump(setup_to_dict(setup), fh)


def load_setup(path) -> MeasurementSetup:
    with open(path) as fh:
        return setup_from_dict(json.load(fh))
