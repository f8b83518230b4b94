"""Dense complex linear algebra and a small simplex LP solver.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The eigensolver
is a row-cyclic complex Jacobi method compiled with numba.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 60
PIVOT_TOL = 1e-11

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


class NotHermitianError(ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def allclose(a, b, atol: float) -> bool:
    """Elementwise equality with an explicit absolute tolerance."""
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= atol))


def is_hermitian(m, atol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= atol)


def _check_hermitian(m: np.ndarray, atol: float = HERMITIAN_TOL) -> None:
    if m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"matrix is not square: {m.shape}")
    dev = np.max(np.abs(m - m.conj().T), initial=0.0)
    if dev > atol * max(1.0, np.max(np.abs(m), initial=0.0)):
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {dev:.3e})")


def kron(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def kron_all(*ms) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in ms:
        out = kron(out, m)
    return out


def partial_trace(m, dim_a: int, dim_b: int, side: str) -> np.ndarray:
    """Trace out factor ``side`` ("A" or "B") of an operator on A (x) B."""
    m = as_matrix(m)
    n = dim_a * dim_b
    if m.shape != (n, n):
        raise ValueError(f"matrix shape {m.shape} does not match {dim_a}x{dim_b} factors")
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if side == "A":
        return np.einsum("ibic->bc", t)
    if side == "B":
        return np.einsum("aibi->ab", t)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


@njit(cache=True)
def _jacobi_sweeps(a, v, target, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += a[p, q].real ** 2 + a[p, q].imag ** 2
        if np.sqrt(off) < target:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                ph = apq / r
                zeta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if zeta >= 0:
                    t = 1.0 / (zeta + np.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # unitary block on (p, q): [[c, s], [-s conj(ph), c conj(ph)]]
                uqp = -s * ph.conjugate()
                uqq = c * ph.conjugate()
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * c + akq * uqp
                    a[k, q] = akp * s + akq * uqq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk + uqp.conjugate() * aqk
                    a[q, k] = s * apk + uqq.conjugate() * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * c + vkq * uqp
                    v[k, q] = vkp * s + vkq * uqq
    return max_sweeps


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with ``w`` ascending and the columns of ``v``
    orthonormal, so that ``m @ v == v @ diag(w)``.
    """
    a = as_matrix(m).copy()
    _check_hermitian(a)
    n = a.shape[0]
    a = np.ascontiguousarray(0.5 * (a + a.conj().T))
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n > 1 and scale > 0:
        _jacobi_sweeps(a, v, JACOBI_TOL * scale, JACOBI_MAX_SWEEPS)
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigvalsh(m) -> np.ndarray:
    return eig_hermitian(m)[0]


def max_eigenpair(m) -> tuple[float, np.ndarray]:
    w, v = eig_hermitian(m)
    return float(w[-1]), v[:, -1]


def matrix_sign(m) -> np.ndarray:
    """Map every eigenvalue to its sign, with sign(0) = +1."""
    w, v = eig_hermitian(m)
    sgn = np.where(w >= 0, 1.0, -1.0)
    out = (v * sgn) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def trace_norm(m) -> float:
    return float(np.sum(np.abs(eigvalsh(m))))


# --------------------------------------------------------------------------
# Linear programming


@dataclass(frozen=True)
class LPProblem:
    """maximize c.x subject to A x = b, x >= 0."""

    objective: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        a = np.asarray(self.a_eq, dtype=float)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        b = np.asarray(self.b_eq, dtype=float).ravel()
        if a.shape[1] != c.size:
            raise ValueError(f"constraint matrix has {a.shape[1]} columns, objective has {c.size}")
        if a.shape[0] != b.size:
            raise ValueError(f"constraint matrix has {a.shape[0]} rows, rhs has {b.size}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("LP coefficients must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "a_eq", a)
        object.__setattr__(self, "b_eq", b)


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    f = T[:, col].copy()
    f[row] = 0.0
    T -= np.outer(f, T[row])
    basis[row] = col


def _run_bland(T: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> tuple[str, int]:
    """Maximize with the objective stored as the last row (reduced costs, negated)."""
    it = 0
    while it < max_iter:
        obj = T[-1, :ncols]
        candidates = np.flatnonzero(obj < -PIVOT_TOL)
        if candidates.size == 0:
            return "optimal", it
        col = int(candidates[0])
        column = T[:-1, col]
        pos = np.flatnonzero(column > PIVOT_TOL)
        if pos.size == 0:
            return "unbounded", it
        ratios = T[pos, -1] / column[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
        it += 1
    raise RuntimeError("simplex iteration limit reached")


def simplex_maximize(p: LPProblem, max_iter: int = 100_000) -> LPSolution:
    """Two-phase dense-tableau simplex with Bland's anti-cycling rule."""
    a = p.a_eq.copy()
    b = p.b_eq.copy()
    m, n = a.shape
    neg = b < 0
    a[neg] *= -1
    b[neg] *= -1

    # phase 1: artificial variables n..n+m-1
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = a
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -a.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    _, it1 = _run_bland(T, basis, n + m, max_iter)
    infeas = -T[-1, -1]
    if infeas > 1e-9 * max(1.0, float(np.abs(b).max(initial=0.0))):
        return LPSolution("infeasible", iterations=it1)

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n:
            row = T[r, :n]
            nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
            if nz.size == 0:
                continue
            _pivot(T, basis, r, int(nz[0]))
        keep.append(r)
    T = np.vstack([T[keep][:, list(range(n)) + [n + m]], np.zeros((1, n + 1))])
    basis = [basis[r] for r in keep]

    # phase 2
    c = p.objective
    T[-1, :n] = -c
    T[-1, -1] = 0.0
    for r, j in enumerate(basis):
        T[-1] -= T[-1, j] * T[r]
    status, it2 = _run_bland(T, basis, n, max_iter)
    if status != "optimal":
        return LPSolution(status, iterations=it1 + it2)
    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    x[np.abs(x) < 1e-15] = 0.0
    return LPSolution("optimal", float(c @ x), x, it1 + it2)
