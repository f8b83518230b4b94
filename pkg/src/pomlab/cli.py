"""``pom`` command-line driver.

Every verb produces a report ``{"tool", "version", "command", "timestamp",
"results", "checks", "ok"}``. ``results`` holds one row per value of ``--n``
and is a deterministic function of the flags; ``timestamp`` is the only
field that changes between identical runs.

Exit status: 0 when every check passes, 1 when a check fails or a module
raises, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

from . import __version__
from .bell import bell_operator, bell_value, lhv_max, sos_certificate, spectral_max
from .classical import lp_optimal_classical
from .construct import (
    MAX_QUANTUM_N,
    canonical_setup,
    encode_ensemble,
    load_setup,
    setup_to_dict,
    verify_parity_obliviousness,
)
from .game import PRNG_NAME, game_report, simulate
from .seesaw import SeesawConfig, seesaw_run
from .task import algebraic_max, bounds, tsirelson_value

VERBS = ("bounds", "construct", "verify", "exact", "simulate", "classical-lp", "lhv-max", "seesaw")

PARITY_TOL = 1e-12
SOS_TOL = 1e-10
GAMMA_TOL = 1e-9
IDENTITY_TOL = 1e-12


class UsageError(Exception):
    pass


def parse_n(text: str) -> list[int]:
    """``"3"`` -> [3]; ``"2..5"`` -> [2, 3, 4, 5]."""
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or a range a..b, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=parse_n, help="number of bits, or a range a..b")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--tol", type=float, default=1e-9, help="relative tolerance for value checks")

    p = argparse.ArgumentParser(prog="pom", description="Parity-oblivious multiplexing laboratory.")
    p.add_argument("--version", action="version", version=f"pom {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, metavar="VERB")

    sub.add_parser("bounds", parents=[common], help="closed-form bounds")
    c = sub.add_parser("construct", parents=[common], help="canonical quantum strategy")
    c.add_argument("--setup", help="serialized setup to load instead of the canonical one")
    v = sub.add_parser("verify", parents=[common], help="parity, SOS and spectral checks")
    v.add_argument("--setup")
    e = sub.add_parser("exact", parents=[common], help="exact success probability by two routes")
    e.add_argument("--setup")
    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo play of the game")
    s.add_argument("--setup")
    s.add_argument("--rounds", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--shards", type=int, default=1)
    lp = sub.add_parser("classical-lp", parents=[common], help="optimal classical strategy by LP")
    lp.add_argument("--alphabet", type=int, default=2)
    sub.add_parser("lhv-max", parents=[common], help="deterministic maximum of the Bell expression")
    ss = sub.add_parser("seesaw", parents=[common], help="see-saw search for the quantum maximum")
    ss.add_argument("--dim", type=int)
    ss.add_argument("--restarts", type=int, default=10)
    ss.add_argument("--seed", type=int, default=0)
    ss.add_argument("--max-iter", type=int, default=2000)
    ss.add_argument("--plain-sign", action="store_true", help="allow observables of any trace")
    return p


def _close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(1.0, abs(b))


def _setups(args):
    if getattr(args, "setup", None):
        setup = load_setup(args.setup)
        if args.n and args.n != [setup.n]:
            raise UsageError(f"--n {args.n} conflicts with the loaded setup (n={setup.n})")
        return [(setup, True)]
    for n in args.n:
        if not 2 <= n <= MAX_QUANTUM_N:
            raise UsageError(f"n must be in 2..{MAX_QUANTUM_N} for quantum strategies, got {n}")
    return [(canonical_setup(n), False) for n in args.n]


def _run_bounds(args, checks):
    rows = []
    for n in args.n:
        if n < 2:
            raise UsageError("n must be at least 2")
        b = bounds(n)
        rows.append({
            "n": n,
            "classical": b.classical,
            "pnc": b.pnc,
            "quantum_opt": b.quantum_opt,
            "algebraic_success": b.algebraic_success,
            "tsirelson_value": tsirelson_value(n),
            "algebraic_max": algebraic_max(n),
        })
    return rows


def _run_construct(args, checks):
    rows = []
    for setup, _ in _setups(args):
        ok = True
        try:
            setup.validate()
        except ValueError:
            ok = False
        checks.append({"n": setup.n, "check": "observables_are_involutions", "pass": ok})
        rows.append({"n": setup.n, "dim": setup.d_a, "setup": setup_to_dict(setup)})
    return rows


def _run_verify(args, checks):
    rows = []
    for setup, custom in _setups(args):
        n = setup.n
        parity = verify_parity_obliviousness(encode_ensemble(setup))
        cert = sos_certificate(setup)
        smax = spectral_max(bell_operator(setup))
        bv = bell_value(setup)
        rows.append({
            "n": n,
            "dim": setup.d_a,
            "parity_max_deviation": parity.max_deviation,
            "sos_residual": cert.residual,
            "gamma_min_eig": cert.gamma_min_eig,
            "spectral_max": smax,
            "bell_value": bv,
            "tsirelson_value": tsirelson_value(n),
            "parity_deviations": parity.deviations,
        })
        checks.append({"n": n, "check": "parity_oblivious", "pass": parity.max_deviation <= PARITY_TOL})
        checks.append({"n": n, "check": "sos_residual", "pass": cert.residual <= SOS_TOL})
        checks.append({"n": n, "check": "gamma_psd", "pass": cert.gamma_min_eig >= -GAMMA_TOL})
        if not custom:
            checks.append({"n": n, "check": "spectral_max", "pass": _close(smax, tsirelson_value(n), args.tol)})
            checks.append({"n": n, "check": "bell_value", "pass": _close(bv, smax, args.tol)})
    return rows


def _run_exact(args, checks):
    rows = []
    for setup, custom in _setups(args):
        rep = game_report(setup)
        rows.append(rep.to_dict())
        checks.append({
            "n": rep.n,
            "check": "two_route_identity",
            "pass": abs(rep.p_direct - rep.p_via_bell) <= IDENTITY_TOL,
        })
        if not custom:
            checks.append({"n": rep.n, "check": "quantum_opt", "pass": _close(rep.p_direct, rep.quantum_opt, args.tol)})
    return rows


def _run_simulate(args, checks):
    if args.rounds < 1:
        raise UsageError(f"--rounds must be at least 1, got {args.rounds}")
    if args.shards < 1:
        raise UsageError(f"--shards must be at least 1, got {args.shards}")
    rows = []
    for setup, _ in _setups(args):
        res = simulate(setup, args.rounds, args.seed, args.shards)
        rows.append({"n": setup.n, **res.to_dict()})
    return rows


def _run_classical(args, checks):
    rows = []
    for n in args.n:
        if n not in (2, 3) or args.alphabet not in (2, 3, 4):
            raise UsageError("classical-lp supports n in {2, 3} and alphabet in {2, 3, 4}")
        rep = lp_optimal_classical(n, args.alphabet)
        rows.append(rep.to_dict())
        checks.append({"n": n, "check": "classical_bound", "pass": _close(rep.value, (n + 1) / (2 * n), args.tol)})
        checks.append({"n": n, "check": "mixture_parity", "pass": rep.max_parity_deviation <= 1e-9})
    return rows


def _run_lhv(args, checks):
    rows = []
    for n in args.n:
        if not 2 <= n <= 5:
            raise UsageError(f"lhv-max enumerates 2^(2^(n-1)) assignments; n must be in 2..5, got {n}")
        val = lhv_max(n)
        rows.append({
            "n": n,
            "lhv_max": val,
            "lhv_success": 0.5 + val / (2**n * n),
            "pnc": bounds(n).pnc,
            "tsirelson_value": tsirelson_value(n),
        })
    return rows


def _run_seesaw(args, checks):
    rows = []
    for n in args.n:
        if not 2 <= n <= 6:
            raise UsageError(f"seesaw supports n in 2..6, got {n}")
        try:
            cfg = SeesawConfig(n, args.dim, args.restarts, args.max_iter, args.tol, args.seed, not args.plain_sign)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        trace = seesaw_run(cfg)
        bound = tsirelson_value(n)
        rows.append({
            "n": n,
            "dim": cfg.d,
            "best": trace.best,
            "tsirelson_value": bound,
            "gap": bound - trace.best,
            "iterations": len(trace.objectives) - 1,
            "converged": trace.converged,
            "restart_values": trace.all_best,
            "trace": trace.to_dict(),
        })
        checks.append({"n": n, "check": "monotone", "pass": trace.is_monotone()})
        checks.append({"n": n, "check": "below_quantum_bound", "pass": trace.best <= bound + 1e-8})
    return rows


RUNNERS = {
    "bounds": _run_bounds,
    "construct": _run_construct,
    "verify": _run_verify,
    "exact": _run_exact,
    "simulate": _run_simulate,
    "classical-lp": _run_classical,
    "lhv-max": _run_lhv,
    "seesaw": _run_seesaw,
}


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out",)}


def dispatch(args) -> dict:
    if args.verb not in RUNNERS:
        raise UsageError(f"unknown verb {args.verb!r}")
    if args.n is None and not getattr(args, "setup", None):
        raise UsageError(f"{args.verb} requires --n")
    checks: list[dict] = []
    rows = RUNNERS[args.verb](args, checks)
    for c in checks:
        c["pass"] = bool(c["pass"])  # numpy comparisons yield np.bool_
    report = {
        "tool": "pom",
        "version": __version__,
        "command": _echo(args),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "results": rows,
        "checks": checks,
        "ok": all(c["pass"] for c in checks),
    }
    if args.verb == "simulate":
        report["prng"] = PRNG_NAME
    _assert_finite(rows)
    return report


def _assert_finite(obj) -> None:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ArithmeticError("non-finite value in report")
    if isinstance(obj, dict):
        for v in obj.values():
            _assert_finite(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _assert_finite(v)


def to_csv(report: dict) -> str:
    """One row per result; nested fields (tables, setups, traces) are omitted."""
    rows = report["results"]
    cols: list[str] = []
    for r in rows:
        for k, v in r.items():
            if k not in cols and not isinstance(v, (dict, list)):
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([repr(r[k]) if isinstance(r.get(k), float) else r.get(k, "") for k in cols])
    return buf.getvalue()


def emit(report: dict, fmt: str = "json", destination: str | None = None) -> None:
    text = json.dumps(report, indent=2) + "\n" if fmt == "json" else to_csv(report)
    if destination is None or destination == "-":
        sys.stdout.write(text)
        return
    try:
        with open(destination, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {destination}: {exc}") from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = dispatch(args)
        emit(report, args.format, args.out)
    except UsageError as exc:
        print(f"pom: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # module failures surface as check failures
        print(f"pom: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0 if report["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
