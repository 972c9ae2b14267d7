"""Command-line entry point: ``greedylds <subcommand> ...``.

Exit status is 0 on success, 2 on invalid input, 1 on any other failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .core import PointSet, format_float, read_points, write_points
from .functional import OptimizerConfig
from .harness import (
    MeasureSpec,
    SequenceSpec,
    bad_init_experiment,
    compare,
    nd_experiment,
    robustness_random_starts,
    robustness_single_starts,
    trace,
)
from .nlp import build_model, export_model
from .sequences import GOLDEN_RATIO, read_permutations

TIE_NOTE = ("One-dimensional greedy points are chosen among (2i+1)/(2(n+1)); when two candidates "
            "give the same functional value (within 4 ulps) the smaller one is taken.")


class UsageError(Exception):
    pass


def _add_optimizer(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("optimizer (d >= 2)")
    g.add_argument("--method", choices=["random", "grid", "graddesc", "multistart"], default="random")
    g.add_argument("--budget", type=int, default=10_000, help="evaluations per point (default 10000)")
    g.add_argument("--grid-res", type=int, default=32, help="lattice resolution per axis")
    g.add_argument("--starts", type=int, default=8, help="descent starts for graddesc/multistart")
    g.add_argument("--max-iters", type=int, default=200)
    g.add_argument("--tol", type=float, default=1e-10)


def _add_sequence(p: argparse.ArgumentParser, flag: str = "--sequence", default: str = "kritzinger") -> None:
    p.add_argument(flag, choices=["kritzinger", "kronecker", "vdc", "sobol", "niederreiter"],
                   default=default, dest=flag.lstrip("-").replace("-", "_"))


def _add_sequence_params(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("sequence parameters")
    g.add_argument("--d", type=int, default=1, help="dimension (kritzinger, sobol)")
    g.add_argument("--init", default=None,
                   help="kritzinger start: a point file, or coordinates like '0.5' or '0.5,0.5' "
                        "(default: the centre point)")
    g.add_argument("--alpha", type=float, default=GOLDEN_RATIO, help="Kronecker rotation (default golden ratio)")
    g.add_argument("--start-index", type=int, default=0,
                   help="first Kronecker index k in frac(k alpha) (default 0, the origin)")
    g.add_argument("--base", type=int, default=2, help="van der Corput base")
    g.add_argument("--perm-file", default=None, help="digit permutations, one per line")
    g.add_argument("--skip-zero", action="store_true", help="drop the Sobol' origin")
    _add_optimizer(p)


def _add_measure(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("measure")
    g.add_argument("--measure", choices=["linf", "l2"], default="linf",
                   help="L-infinity star discrepancy or squared L2 star discrepancy")
    ex = g.add_mutually_exclusive_group()
    ex.add_argument("--exact", action="store_true", help="exact L-infinity (default)")
    ex.add_argument("--sampled", type=int, metavar="M", default=None,
                    help="lattice lower bound on {0, 1/M, ..., 1}^d")


def _add_trace_args(p: argparse.ArgumentParser, n_default: int, stride_default: int) -> None:
    p.add_argument("--N", type=int, default=n_default, help="largest n")
    p.add_argument("--stride", type=int, default=stride_default, help="checkpoint spacing")
    p.add_argument("-p", type=float, default=1.0, help="scaled = n * raw / ln(n)^p")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="the only source of randomness")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greedylds", description=__doc__.splitlines()[0],
                                     epilog=TIE_NOTE)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write the first N points of a sequence", epilog=TIE_NOTE)
    _add_sequence(p)
    _add_sequence_params(p)
    p.add_argument("--N", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("measure", help="discrepancy of a point file")
    p.add_argument("--points", required=True)
    _add_measure(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("trace", help="discrepancy trace of a sequence prefix", epilog=TIE_NOTE)
    _add_sequence(p)
    _add_sequence_params(p)
    _add_measure(p)
    _add_trace_args(p, 100_000, 1000)
    _add_common(p)

    p = sub.add_parser("compare", help="checkpoint-wise comparison of two sequences")
    _add_sequence(p, "--a", "kronecker")
    _add_sequence(p, "--b", "kritzinger")
    _add_sequence_params(p)
    _add_measure(p)
    _add_trace_args(p, 100_000, 1000)
    _add_common(p)

    p = sub.add_parser("robustness", help="envelope over several starting sets (d=1)")
    p.add_argument("--mode", choices=["single", "random"], default="single",
                   help="11 single starts 0, 0.1, ..., 0.9, 0.9999 or random k-point sets")
    p.add_argument("--sets", type=int, default=6)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--traces-dir", default=None, help="also write every member trace here")
    _add_trace_args(p, 100_000, 1000)
    _add_common(p)

    p = sub.add_parser("bad-init", help="start from 100 points packed into [0, 0.01)")
    _add_trace_args(p, 100_000, 1000)
    _add_common(p)

    p = sub.add_parser("nd-experiment", help="greedy d-dimensional sequence against Sobol'")
    p.add_argument("--d", type=int, choices=[2, 3], default=2)
    _add_optimizer(p)
    ex = p.add_mutually_exclusive_group()
    ex.add_argument("--exact", action="store_true")
    ex.add_argument("--sampled", type=int, metavar="M", default=None)
    p.add_argument("--skip-zero", action="store_true", help="drop the Sobol' origin")
    p.add_argument("--out-dir", default=None,
                   help="write kritzinger.csv and sobol.csv here (default: both to stdout)")
    _add_trace_args(p, 500, 10)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("nlp-export", help="write the d=2 next-point model file")
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    return parser


def _optimizer(args) -> OptimizerConfig:
    return OptimizerConfig(method=args.method, budget=args.budget, grid_resolution=args.grid_res,
                           seed=args.seed, starts=args.starts, max_iters=args.max_iters, tol=args.tol)


def _init(args, d: int) -> tuple[tuple[float, ...], ...]:
    if args.init is None:
        return ((0.5,) * d,)
    if os.path.exists(args.init):
        ps = read_points(args.init, d)
        return tuple(tuple(float(c) for c in row) for row in ps.coords)
    rows = [r for r in args.init.split(";") if r.strip()]
    try:
        pts = tuple(tuple(float(c) for c in r.replace(",", " ").split()) for r in rows)
    except ValueError:
        raise UsageError(f"--init: neither a file nor coordinates: {args.init!r}") from None
    return pts


def _sequence(args, kind: str) -> SequenceSpec:
    d = args.d
    perms = read_permutations(args.perm_file) if args.perm_file else ()
    init = _init(args, d) if kind == "kritzinger" else ((0.5,) * d,)
    return SequenceSpec(kind, d, init, _optimizer(args), args.alpha, args.base, perms,
                        args.skip_zero, args.start_index)


def _measure(args) -> MeasureSpec:
    return MeasureSpec(args.measure, args.sampled)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out!r}: {exc.strerror}") from exc


def _run(args) -> None:
    cmd = args.command
    if cmd == "generate":
        spec = _sequence(args, args.sequence)
        if spec.kind == "niederreiter":
            from .sequences import niederreiter_set

            ps = niederreiter_set(args.N)
        else:
            ps = spec.prefix(args.N)
        lines = spec.echo() + [f"N={args.N}"]
        if args.out is None:
            write_points(ps, sys.stdout, lines)
        else:
            write_points(ps, args.out, lines)
    elif cmd == "measure":
        ps = read_points(args.points)
        if ps.n == 0:
            raise ValueError(f"{args.points}: no points")
        value = _measure(args)(ps)
        _emit(format_float(value) + "\n", args.out)
    elif cmd == "trace":
        t = trace(_sequence(args, args.sequence), args.N, args.stride, _measure(args), args.p)
        _emit(t.to_csv(), args.out)
    elif cmd == "compare":
        a = _sequence(args, args.a)
        b = _sequence(args, args.b)
        rep = compare(a, b, args.N, args.stride, _measure(args))
        config = (f"N={args.N}", f"stride={args.stride}", *_measure(args).echo())
        _emit(rep.to_csv(config), args.out)
    elif cmd == "robustness":
        if args.mode == "single":
            env = robustness_single_starts(args.N, args.stride, args.p)
        else:
            env = robustness_random_starts(args.N, args.stride, args.sets, args.k, args.seed, args.p)
        config = (f"mode={args.mode}", f"N={args.N}", f"stride={args.stride}",
                  f"p={format_float(args.p)}", f"seed={args.seed}")
        if args.traces_dir:
            os.makedirs(args.traces_dir, exist_ok=True)
            for j, t in enumerate(env.traces):
                _emit(t.to_csv(), os.path.join(args.traces_dir, f"trace_{j:02d}.csv"))
        _emit(env.to_csv(config), args.out)
    elif cmd == "bad-init":
        _emit(bad_init_experiment(args.N, args.stride, args.p).to_csv(), args.out)
    elif cmd == "nd-experiment":
        greedy, ref = nd_experiment(args.d, _optimizer(args), args.N, args.stride, args.p,
                                    args.sampled, args.skip_zero)
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            _emit(greedy.to_csv(), os.path.join(args.out_dir, "kritzinger.csv"))
            _emit(ref.to_csv(), os.path.join(args.out_dir, "sobol.csv"))
        else:
            _emit(greedy.to_csv() + "\n" + ref.to_csv(), None)
    elif cmd == "nlp-export":
        ps = read_points(args.points, 2) if os.path.getsize(args.points) else PointSet(np.zeros((0, 2)), 2)
        export_model(build_model(ps), args.out)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _run(args)
    except (ValueError, UsageError, FileNotFoundError, KeyError) as exc:
        print(f"greedylds: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"greedylds: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
