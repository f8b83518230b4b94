"""Classical POM strategies and the LP over mixtures of deterministic ones."""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numerics import LPProblem, simplex_maximize
from .task import _check_n, bits, dot, parity_set, to_str

VERTEX_CAP = 1_100_000
SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class ClassicalStrategy:
    """Deterministic strategy: ``encoder[v]`` is the message for the input of value v,
    ``decoder[mu][y]`` is Bob's guess for bit y (0-based) on message mu."""

    n: int
    alphabet: int
    encoder: tuple[int, ...]
    decoder: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.encoder) != 2**self.n:
            raise ValueError(f"encoder needs {2 ** self.n} entries")
        if len(self.decoder) != self.alphabet or any(len(r) != self.n for r in self.decoder):
            raise ValueError(f"decoder must be {self.alphabet} x {self.n}")
        if any(not 0 <= mu < self.alphabet for mu in self.encoder):
            raise ValueError("encoder message out of range")


def first_bit_strategy(n: int) -> ClassicalStrategy:
    _check_n(n, lo=2)
    encoder = tuple(bits(v, n)[0] for v in range(2**n))
    decoder = tuple((mu,) + (0,) * (n - 1) for mu in range(2))
    return ClassicalStrategy(n, 2, encoder, decoder)


def strategy_success_exact(st: ClassicalStrategy) -> Fraction:
    n = st.n
    wins = sum(
        st.decoder[st.encoder[v]][y] == x[y]
        for v in range(2**n)
        for x in [bits(v, n)]
        for y in range(n)
    )
    return Fraction(wins, 2**n * n)


def strategy_success(st: ClassicalStrategy) -> float:
    return float(strategy_success_exact(st))


def strategy_parity_profile(st: ClassicalStrategy) -> dict[tuple[str, int], int]:
    """#{x -> mu, s.x = 0} - #{x -> mu, s.x = 1} for every s in the parity set."""
    n = st.n
    out = {}
    for s in parity_set(n):
        for mu in range(st.alphabet):
            out[(to_str(s), mu)] = sum(
                1 - 2 * dot(s, bits(v, n)) for v in range(2**n) if st.encoder[v] == mu
            )
    return out


@dataclass
class ClassicalLPReport:
    n: int
    alphabet: int
    value: float
    support_size: int
    max_parity_deviation: float
    support: list[tuple[ClassicalStrategy, float]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alphabet": self.alphabet,
            "value": self.value,
            "support_size": self.support_size,
            "max_parity_deviation": self.max_parity_deviation,
        }

    def write_support_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["weight", "encoder", "decoder", "success"])
            for st, q in self.support:
                w.writerow([
                    repr(q),
                    "".join(map(str, st.encoder)),
                    "|".join("".join(map(str, r)) for r in st.decoder),
                    repr(strategy_success(st)),
                ])


def vertex_count(n: int, alphabet: int) -> int:
    return alphabet ** (2**n) * 2 ** (alphabet * n)


def _encoder_tables(n: int, m: int) -> np.ndarray:
    # row e: message for each input value, base-m digits of e, most significant first
    return np.array(list(itertools.product(range(m), repeat=2**n)), dtype=np.int64)


def _decoder_tables(n: int, m: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=m * n)), dtype=np.int64)


def lp_columns(n: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Success and parity-profile data for every deterministic strategy.

    Returns ``(success, profile, encoders, decoders)``: ``success[e, d]`` for
    encoder table e and decoder table d (both in lexicographic order) and
    ``profile[e]``, the flattened (s, mu) parity profile of encoder e.
    """
    xs = np.array([bits(v, n) for v in range(2**n)], dtype=np.int64)  # (2^n, n)
    enc = _encoder_tables(n, m)
    dec = _decoder_tables(n, m)
    onehot = (enc[:, :, None] == np.arange(m)[None, None, :]).astype(np.int64)  # (E, 2^n, m)
    ones = np.einsum("exm,xy->emy", onehot, xs)  # inputs with x_y = 1 per message
    zeros = onehot.sum(axis=1)[:, :, None] - ones
    base = zeros.sum(axis=(1, 2))  # wins of the all-zero decoder
    delta = (ones - zeros).reshape(len(enc), m * n)
    success = (base[:, None] + delta @ dec.T) / (2**n * n)

    pset = parity_set(n)
    signs = np.array([[1 - 2 * dot(s, x) for x in map(tuple, xs)] for s in pset], dtype=np.int64)
    profile = np.einsum("sx,exm->esm", signs, onehot).reshape(len(enc), len(pset) * m)
    return success, profile, enc, dec


def lp_optimal_classical(n: int, alphabet: int = 2) -> ClassicalLPReport:
    """Best parity-oblivious classical strategy, by linear programming.

    For each deterministic decoder, Alice's (privately randomized) encoder is
    a mixture of deterministic encoders; parity-obliviousness is imposed on
    that mixture. Randomness shared with Bob cannot help: conditioned on it
    each branch must be oblivious on its own, so the optimum is the best
    single-decoder LP.
    """
    if n not in (2, 3):
        raise ValueError(f"n must be 2 or 3, got {n}")
    if alphabet not in (2, 3, 4):
        raise ValueError(f"alphabet must be 2, 3 or 4, got {alphabet}")
    if vertex_count(n, alphabet) > VERTEX_CAP:
        raise ValueError(f"{vertex_count(n, alphabet)} deterministic strategies exceed the cap {VERTEX_CAP}")

    success, profile, enc, dec = lp_columns(n, alphabet)
    a_eq = np.vstack([profile.T.astype(float), np.ones((1, len(enc)))])
    b_eq = np.zeros(a_eq.shape[0])
    b_eq[-1] = 1.0

    best, best_d, best_q = -np.inf, -1, None
    for d in range(len(dec)):
        # an LP optimum never beats the best column; skip hopeless decoders
        if success[:, d].max() <= best + SUPPORT_TOL:
            continue
        sol = simplex_maximize(LPProblem(success[:, d], a_eq, b_eq))
        if sol.status != "optimal":
            raise RuntimeError(f"classical LP returned status {sol.status}")
        if sol.value > best + SUPPORT_TOL:
            best, best_d, best_q = sol.value, d, sol.x

    dev = float(np.max(np.abs(profile.T @ best_q)))
    table = tuple(tuple(int(v) for v in r) for r in dec[best_d].reshape(alphabet, n))
    support = [
        (ClassicalStrategy(n, alphabet, tuple(int(v) for v in enc[e]), table), float(best_q[e]))
        for e in np.flatnonzero(best_q > SUPPORT_TOL)
    ]
    return ClassicalLPReport(n, alphabet, float(best), len(support), dev, support)


def lp_unconditioned_mixture(n: int, alphabet: int = 2) -> float:
    """LP where only the overall mixture of (encoder, decoder) pairs is oblivious.

    This ignores that Bob knows which pair was drawn, so a shared random
    relabeling of messages acts as a one-time pad and the value can exceed
    the classical bound (it reaches 1 at n=2 with four messages). Kept as a
    negative control for :func:`lp_optimal_classical`.
    """
    if vertex_count(n, alphabet) > VERTEX_CAP:
        raise ValueError(f"{vertex_count(n, alphabet)} deterministic strategies exceed the cap {VERTEX_CAP}")
    success, profile, enc, dec = lp_columns(n, alphabet)
    ndec = len(dec)
    cols = np.repeat(profile.T.astype(float), ndec, axis=1)
    a_eq = np.vstack([cols, np.ones((1, cols.shape[1]))])
    b_eq = np.zeros(a_eq.shape[0])
    b_eq[-1] = 1.0
    sol = simplex_maximize(LPProblem(success.ravel(), a_eq, b_eq))
    if sol.status != "optimal":
        raise RuntimeError(f"LP returned status {sol.status}")
    return sol.value
