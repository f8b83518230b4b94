"""Success probability of the POM game: exact (two routes) and sampled."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bell import bell_value
from .construct import EncodingEnsemble, MeasurementSetup, encode_ensemble
from .task import input_ordering, pnc_bound, quantum_optimum

PRNG_NAME = "PCG64"
NEGATIVE_PROB_TOL = 1e-9


@dataclass(frozen=True)
class GameReport:
    n: int
    p_direct: float
    p_via_bell: float
    bell_value: float
    pnc_bound: float
    quantum_opt: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SimulationResult:
    rounds: int
    successes: int
    estimate: float
    seed: int
    standard_error: float
    shards: int = 1
    prng: str = PRNG_NAME

    def to_dict(self) -> dict:
        return asdict(self)


def _decode_projector(b: np.ndarray, bit: int) -> np.ndarray:
    # outcome +1 decodes to bit 0
    eye = np.eye(b.shape[0])
    return 0.5 * (eye + b) if bit == 0 else 0.5 * (eye - b)


def exact_success_direct(e: EncodingEnsemble, bob) -> float:
    """(1/(2^n n)) sum_{x,y} tr[rho_x Pi_y(x_y)] by the Born rule."""
    n = e.n
    if len(bob) != n:
        raise ValueError(f"need {n} Bob observables, got {len(bob)}")
    total = 0.0
    for x, rho in e.states.items():
        for y, b in enumerate(bob):
            if b.shape != rho.shape:
                raise ValueError("Bob observable dimension does not match the encoded states")
            total += np.trace(rho @ _decode_projector(b, x[y])).real
    return total / (2**n * n)


def exact_success_via_bell(setup: MeasurementSetup) -> float:
    n = setup.n
    return 0.5 + bell_value(setup) / (2**n * n)


def two_route_gap(setup: MeasurementSetup) -> float:
    """Gap between the Born-rule sum and 1/2 + <B_n>/(2^n n); zero for any setup."""
    return abs(exact_success_direct(encode_ensemble(setup), setup.bob) - exact_success_via_bell(setup))


def game_report(setup: MeasurementSetup) -> GameReport:
    n = setup.n
    bv = bell_value(setup)
    return GameReport(
        n,
        exact_success_direct(encode_ensemble(setup), setup.bob),
        0.5 + bv / (2**n * n),
        bv,
        pnc_bound(n),
        quantum_optimum(n),
    )


def outcome_table(setup: MeasurementSetup) -> np.ndarray:
    """p(+1 | x, y) indexed by (value of x, y); rows use the integer value of x."""
    e = encode_ensemble(setup)
    n = setup.n
    table = np.empty((2**n, n))
    order = input_ordering(n)
    for x in order.entries:
        rho = e.states[x]
        norm = np.trace(rho).real
        for y, b in enumerate(setup.bob):
            p = np.trace(rho @ _decode_projector(b, 0)).real / norm
            if p < -NEGATIVE_PROB_TOL or p > 1 + NEGATIVE_PROB_TOL:
                raise ValueError(f"invalid outcome probability {p!r}; encoded state is not a density matrix")
            table[int("".join(map(str, x)), 2), y] = min(max(p, 0.0), 1.0)
    return table


def _shard_sizes(rounds: int, shards: int) -> list[int]:
    q, r = divmod(rounds, shards)
    return [q + (k < r) for k in range(shards)]


def simulate(setup: MeasurementSetup, rounds: int, seed: int = 0, shards: int = 1, transcript: bool = False):
    """Play ``rounds`` independent rounds of the game.

    Each shard draws from its own PCG64 stream spawned from ``seed``; the
    result is a deterministic function of ``(setup, rounds, seed, shards)``.
    With ``transcript=True`` also returns arrays ``(x, y, b)`` of inputs,
    requested bit index (0-based) and Bob's output bit.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if shards < 1:
        raise ValueError("shards must be at least 1")
    n = setup.n
    table = outcome_table(setup)
    children = np.random.SeedSequence(seed).spawn(shards)
    successes = 0
    xs, ys, bs = [], [], []
    for size, ss in zip(_shard_sizes(rounds, shards), children):
        if size == 0:
            continue
        rng = np.random.Generator(np.random.PCG64(ss))
        x = rng.integers(0, 2**n, size=size)
        y = rng.integers(0, n, size=size)
        u = rng.random(size)
        b = np.where(u < table[x, y], 0, 1)
        xbit = (x >> (n - 1 - y)) & 1
        successes += int(np.count_nonzero(b == xbit))
        if transcript:
            xs.append(x)
            ys.append(y)
            bs.append(b)
    est = successes / rounds
    res = SimulationResult(rounds, successes, est, seed, math.sqrt(est * (1 - est) / rounds), shards)
    if transcript:
        return res, (np.concatenate(xs), np.concatenate(ys), np.concatenate(bs))
    return res
