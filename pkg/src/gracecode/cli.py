"""Command-line experiment harness: seeded sweeps with CSV + manifest output.

Sub-commands: simulate, devo, converse, efun, optimize, histogram.  Every
output CSV is deterministic given the command line (12 significant digits,
'.' decimal separator) and is accompanied by ``<out>.manifest.json``
recording the argv, seed, version and wall time.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .bp import measure, run_bp
from .channels import ChannelParam, transmit
from .converse import (
    area_two_point,
    general_two_point,
    linear_single_point,
    linear_two_point,
    shannon_single_point,
)
from .devo import iterate
from .efun import ClosedFormFamily, build_family, error_poly, f_alphabet
from .ensemble import (
    CheckKind,
    DegreeProfile,
    EnsembleSpec,
    InfeasibleSpecError,
    SamplingFailureError,
    encode,
    parse_profile,
    sample_graph,
    serialize_profile,
)
from .optimize import OptProblem, optimize_profile

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


def thread_cap() -> int:
    """Worker cap from GRACECODE_THREADS (default 1: fully serial runs)."""
    try:
        return max(1, int(os.environ.get("GRACECODE_THREADS", "1")))
    except ValueError:
        return 1


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _parse_grid(text: str) -> np.ndarray:
    """Parse 'a:b:step' (inclusive of b up to rounding) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"grid must be 'a:b:step' or a single value, got {text!r}")
    a, b, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("grid step must be > 0")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(count)


_BUILTIN_PROFILES = {
    "rep": DegreeProfile(((CheckKind.maj(1), 1.0),)),
    "ldmc3": DegreeProfile(((CheckKind.maj(3), 1.0),)),
    "ldmc5": DegreeProfile(((CheckKind.maj(5), 1.0),)),
}


def _load_profile(name: str) -> DegreeProfile:
    if name in _BUILTIN_PROFILES:
        return _BUILTIN_PROFILES[name]
    if name.startswith("ldgm") and name[4:].isdigit():
        return DegreeProfile(((CheckKind.xor(int(name[4:])), 1.0),))
    if os.path.exists(name):
        with open(name, encoding="utf-8") as fh:
            return parse_profile(fh.read())
    raise InfeasibleSpecError(f"unknown ensemble {name!r} (not a builtin or file)")


def _write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (int, float, np.floating)) else str(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_manifest(out: str, args: argparse.Namespace, started: float, extra=None) -> None:
    payload = {
        "argv": sys.argv[1:],
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "walltime_s": round(time.time() - started, 3),
        "threads": thread_cap(),
    }
    if extra:
        payload.update(extra)
    with open(out + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _simulate_point(profile, args, alpha: float, eps: float):
    bers, iotas = [], []
    for t in range(args.trials):
        rng = np.random.default_rng([args.seed, int(round(alpha * 1e9)), t])
        spec = EnsembleSpec(
            k=args.k,
            rate=args.rate,
            profile=profile,
            systematic=args.systematic,
            regular=args.regular,
        )
        graph = sample_graph(spec, rng)
        source = rng.integers(0, 2, size=args.k).astype(np.int8)
        coded = encode(graph, source)
        received = transmit(coded, ChannelParam.bec(eps), rng)
        result = run_bp(graph, received, args.bp_iters)
        ber, iota, _ = measure(result, source)
        bers.append(ber)
        iotas.append(iota)
    ber = float(np.mean(bers))
    stderr = float(np.sqrt(max(ber * (1.0 - ber), 0.0) / (args.k * args.trials)))
    return ber, stderr, float(np.mean(iotas))


def _cmd_simulate(args) -> int:
    profile = _load_profile(args.ensemble)
    alphas = _parse_grid(args.alpha_grid) if args.alpha_grid else None
    if alphas is None:
        eps_grid = _parse_grid(args.eps_grid)
        alphas = (1.0 - eps_grid) / args.rate
    rows = []
    for alpha in alphas:
        eps = min(max(1.0 - alpha * args.rate, 0.0), 1.0)
        ber, stderr, iota = _simulate_point(profile, args, float(alpha), eps)
        rows.append((alpha, eps, ber, stderr, iota, args.trials))
    _write_csv(args.out, ("alpha", "eps", "ber", "ber_stderr", "soft_info", "trials"), rows)
    return EXIT_OK


def _make_family(name: str, surrogate: str, quantity: str, D: int):
    payoff = {"error": "error", "chi2-soft": "chi2", "capacity-soft": "entropy"}[quantity]
    if name in ("ldmc3", "ldmc5"):
        return build_family(name, channel=surrogate, payoff=payoff, D=D)
    if name.startswith("ldgm") and name[4:].isdigit():
        if surrogate != "BEC" or quantity != "error":
            raise InfeasibleSpecError("closed-form LDGM families support BEC/error only")
        return ClosedFormFamily("ldgm", d=int(name[4:]))
    profile = _load_profile(name)
    if surrogate != "BEC" or quantity != "error":
        raise InfeasibleSpecError("mixed-profile families support BEC/error only")
    return ClosedFormFamily("mixed", profile=profile, D=D)


def _cmd_devo(args) -> int:
    family = _make_family(args.family, args.surrogate, args.quantity, args.dmax)
    rows = []
    for alpha in _parse_grid(args.alpha_grid):
        trace = iterate(family, float(alpha), args.x0, args.ell, args.surrogate, args.quantity)
        for t, q in enumerate(trace.values):
            rows.append((alpha, t, q, args.quantity, args.surrogate, args.x0))
    _write_csv(args.out, ("alpha", "t", "q", "quantity", "surrogate", "x0"), rows)
    return EXIT_OK


def _cmd_converse(args) -> int:
    rows = []
    rho = 1.0 / args.rate
    for eps in _parse_grid(args.eps_grid):
        eps = float(eps)
        if args.bound == "shannon":
            val = shannon_single_point(args.rate, 1.0 - eps)
        elif args.bound == "linear1":
            val = linear_single_point(rho, eps)
        elif args.bound == "linear2":
            val = linear_two_point(rho, args.anchor_delta, args.anchor_eps, eps)
        elif args.bound == "general2":
            val = general_two_point(args.rate, args.anchor_delta, args.anchor_eps, eps)
        else:  # area
            if eps <= args.anchor_eps:
                continue
            val = area_two_point(args.rate, args.anchor_delta, args.anchor_eps, eps, args.mode)
        rows.append(("eps", eps, args.bound, val, args.anchor_eps, args.anchor_delta, args.rate))
    _write_csv(
        args.out,
        ("x_axis_kind", "x", "bound_kind", "value", "anchor_eps", "anchor_delta", "R"),
        rows,
    )
    return EXIT_OK


def _cmd_efun(args) -> int:
    alph = f_alphabet(args.family)
    polys = [error_poly(alph, d, args.payoff) for d in range(args.dmax + 1)]
    width = max(p.degree for p in polys) + 1
    header = ["d"] + [f"c{i}" for i in range(width)]
    rows = []
    for d, p in enumerate(polys):
        coeffs = list(p.coeffs) + [0.0] * (width - len(p.coeffs))
        rows.append([d] + coeffs)
    _write_csv(args.out, header, rows)
    return EXIT_OK


def _parse_components(text: str):
    comps = []
    for part in text.split(","):
        kind, _, arity = part.strip().partition(":")
        kind = kind.strip().upper()
        if kind == "XOR":
            comps.append(CheckKind.xor(int(arity)))
        elif kind == "MAJ":
            comps.append(CheckKind.maj(int(arity)))
        else:
            raise InfeasibleSpecError(f"unknown component kind {kind!r}")
    return tuple(comps)


def _cmd_optimize(args) -> int:
    problem = OptProblem(
        components=_parse_components(args.components),
        targets=tuple(float(t) for t in args.targets.split(",")),
        ell=None if args.fixed_point else args.ell,
        D=args.dmax,
        multistart=args.multistart,
        seed=args.seed,
    )
    result = optimize_profile(problem)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_profile(result.profile))
    with open(args.out + ".log", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"objective {_fmt(result.objective)}\n")
        fh.write(f"converged {result.converged}\n")
        for i, hist in enumerate(result.trajectories):
            fh.write(f"start {i} steps {len(hist)} final {_fmt(hist[-1])}\n")
    return EXIT_OK


def _cmd_histogram(args) -> int:
    profile = _load_profile(args.ensemble)
    eps = min(max(1.0 - args.alpha * args.rate, 0.0), 1.0)
    counts = np.zeros(args.bins, dtype=np.int64)
    for t in range(args.trials):
        rng = np.random.default_rng([args.seed, int(round(args.alpha * 1e9)), t])
        spec = EnsembleSpec(
            k=args.k,
            rate=args.rate,
            profile=profile,
            systematic=args.systematic,
            regular=args.regular,
        )
        graph = sample_graph(spec, rng)
        source = rng.integers(0, 2, size=args.k).astype(np.int8)
        received = transmit(encode(graph, source), ChannelParam.bec(eps), rng)
        result = run_bp(graph, received, args.bp_iters)
        _, _, hist = measure(result, source, bins=args.bins)
        counts += hist
    edges = np.linspace(0.0, 1.0, args.bins + 1)
    rows = [(edges[i], edges[i + 1], int(counts[i])) for i in range(args.bins)]
    _write_csv(args.out, ("bin_lo", "bin_hi", "count"), rows)
    return EXIT_OK


def _add_ensemble_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ensemble", required=True, help="builtin (rep, ldmc3, ldmc5, ldgmN) or profile file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--systematic", action="store_true")
    p.add_argument("--regular", action="store_true")
    p.add_argument("--bp-iters", type=int, default=10)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gracecode", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte-Carlo BP sweep over a load grid")
    _add_ensemble_args(p)
    p.add_argument("--alpha-grid", help="a:b:step over alpha = C/R")
    p.add_argument("--eps-grid", help="a:b:step over erasure eps")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("devo", help="density-evolution traces")
    p.add_argument("--family", required=True)
    p.add_argument("--alpha-grid", required=True)
    p.add_argument("--ell", type=int, default=10)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--surrogate", choices=("BEC", "BSC"), default="BEC")
    p.add_argument("--quantity", choices=("error", "chi2-soft", "capacity-soft"), default="error")
    p.add_argument("--dmax", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_devo)

    p = sub.add_parser("converse", help="converse bound curves")
    p.add_argument("--bound", choices=("shannon", "linear1", "linear2", "general2", "area"), required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--anchor-eps", type=float, default=0.0)
    p.add_argument("--anchor-delta", type=float, default=0.0)
    p.add_argument("--mode", choices=("linear_systematic", "systematic"), default="linear_systematic")
    p.add_argument("--eps-grid", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_converse)

    p = sub.add_parser("efun", help="export error/entropy polynomial coefficients")
    p.add_argument("--family", default="ldmc3-bec")
    p.add_argument("--dmax", type=int, default=10)
    p.add_argument("--payoff", choices=("error", "entropy", "chi2"), default="error")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_efun)

    p = sub.add_parser("optimize", help="degree-profile optimization")
    p.add_argument("--components", required=True, help="e.g. XOR:1,XOR:2,XOR:3")
    p.add_argument("--targets", required=True, help="comma-separated alpha values")
    p.add_argument("--ell", type=int, default=5)
    p.add_argument("--fixed-point", action="store_true")
    p.add_argument("--dmax", type=int, default=10)
    p.add_argument("--multistart", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("histogram", help="posterior histogram at one load")
    _add_ensemble_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_histogram)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        status = args.func(args)
    except (InfeasibleSpecError, SamplingFailureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if status == EXIT_OK and getattr(args, "out", None):
        _write_manifest(args.out, args, started, extra={"trials": getattr(args, "trials", None)})
    return status


if __name__ == "__main__":
    sys.exit(main())
