"""Combinatorics of the n-bit parity-oblivious multiplexing game.

Bit strings are tuples of 0/1 with bit 1 leftmost, so ``(1, 1, 0)`` is the
string ``110`` and its integer value is 6.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_N = 16

BitString = tuple[int, ...]


def _check_n(n: int, lo: int = 1, hi: int = MAX_N) -> None:
    if not isinstance(n, (int, np.integer)) or not lo <= n <= hi:
        raise ValueError(f"n must be an integer in [{lo}, {hi}], got {n!r}")


def bits(value: int, n: int) -> BitString:
    return tuple((value >> (n - 1 - k)) & 1 for k in range(n))


def to_str(x: BitString) -> str:
    return "".join(map(str, x))


def from_str(s: str) -> BitString:
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"not a bit string: {s!r}")
    return tuple(int(c) for c in s)


def value(x: BitString) -> int:
    out = 0
    for b in x:
        out = (out << 1) | b
    return out


def dot(s: BitString, x: BitString) -> int:
    """s-parity of x, i.e. the XOR of x_r over r with s_r = 1."""
    return sum(a & b for a, b in zip(s, x)) & 1


@dataclass(frozen=True)
class InputOrdering:
    n: int
    entries: tuple[BitString, ...]

    def partner(self, i: int) -> int:
        """0-based index of the complement of entry ``i``."""
        return len(self.entries) - 1 - i

    def index(self, x: BitString) -> int:
        return self._index[x]

    @property
    def _index(self) -> dict:
        return _index_map(self.n)


@lru_cache(maxsize=None)
def _ordering_entries(n: int) -> tuple[BitString, ...]:
    return tuple(bits(v, n) for v in sorted(range(2**n), key=lambda v: (v.bit_count(), v)))


@lru_cache(maxsize=None)
def _index_map(n: int) -> dict:
    return {x: i for i, x in enumerate(_ordering_entries(n))}


def input_ordering(n: int) -> InputOrdering:
    """All n-bit strings by Hamming weight, then by value.

    Complementation maps weight w to n - w and reverses value order within a
    weight class, so entry i and entry 2^n - 1 - i (0-based) are complements.
    """
    _check_n(n)
    return InputOrdering(n, _ordering_entries(n))


def parity_set(n: int) -> list[BitString]:
    _check_n(n, lo=2)
    return [x for x in _ordering_entries(n) if sum(x) >= 2]


@dataclass(frozen=True)
class SignMatrix:
    n: int
    s: np.ndarray  # shape (2**(n-1), n), entries +/-1

    def __post_init__(self):
        self.s.setflags(write=False)


@lru_cache(maxsize=None)
def sign_matrix(n: int) -> SignMatrix:
    _check_n(n, lo=2)
    half = _ordering_entries(n)[: 2 ** (n - 1)]
    s = np.array([[1 - 2 * b for b in x] for x in half], dtype=np.int64)
    return SignMatrix(n, s)


@dataclass(frozen=True)
class BoundsRecord:
    n: int
    classical: float
    pnc: float
    quantum_opt: float
    algebraic_success: float


def pnc_bound(n: int) -> float:
    return (n + 1) / (2 * n)


def quantum_optimum(n: int) -> float:
    return 0.5 * (1.0 + 1.0 / math.sqrt(n))


def bounds(n: int) -> BoundsRecord:
    _check_n(n, lo=2)
    return BoundsRecord(n, pnc_bound(n), pnc_bound(n), quantum_optimum(n), 1.0)


def algebraic_max(n: int) -> float:
    _check_n(n, lo=2)
    return float(n * 2 ** (n - 1))


def tsirelson_value(n: int) -> float:
    """Quantum maximum of the n-bit Bell expression, 2^(n-1) sqrt(n)."""
    _check_n(n, lo=2)
    return 2 ** (n - 1) * math.sqrt(n)
