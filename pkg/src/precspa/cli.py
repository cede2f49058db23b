"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 numerical/solver error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .bench import KINDS, generate, robustness_sweep
from .errors import PrecSpaError
from .mvee import MveeOptions, mvee_active_set
from .pipeline import ALGORITHMS, run_algorithm
from .spa import SpaOptions

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 2, 3
RECORD_FIELDS = ("algorithm", "epsilon", "trial", "recovery", "runtime_seconds")
SUMMARY_FIELDS = ("algorithm", "rob100", "rob95", "mean_runtime")


class UsageError(Exception):
    pass


def read_matrix(path):
    """Headerless CSV of decimal floats, one matrix row per line."""
    try:
        M = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot parse matrix from {path}: {exc}") from exc
    if M.size == 0 or not np.all(np.isfinite(M)):
        raise UsageError(f"{path} is empty or contains non-finite values")
    return M


def write_matrix(path, M):
    # 17 significant digits round-trip every float64 exactly
    np.savetxt(path, np.atleast_2d(M), delimiter=",", fmt="%.17g")


def sidecar_path(path):
    path = Path(path)
    return path.with_suffix(".json") if path.suffix else path.with_name(path.name + ".json")


def _mvee_options(args):
    return MveeOptions(delta=args.delta, eta=args.eta)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def cmd_extract(args):
    M = read_matrix(args.input)
    if not 1 <= args.r <= min(M.shape):
        raise UsageError(f"--r must lie in [1, {min(M.shape)}] for a {M.shape[0]}x{M.shape[1]} matrix")
    opts = _mvee_options(args)
    spa_opts = SpaOptions(selection_p=args.p)
    t0 = time.perf_counter()
    K, sol = run_algorithm(args.algo, M, args.r, opts, spa_opts)
    diagnostics = {"algorithm": args.algo, "r": args.r, "runtime_seconds": time.perf_counter() - t0}
    if sol is not None:
        diagnostics.update(
            gap=sol.gap,
            margin=sol.margin,
            outer_rounds=sol.outer_rounds,
            iterations=sol.iterations,
            active_set_size=len(sol.active_set),
        )
    text = "\n".join(str(k) for k in K) + "\n" + json.dumps(diagnostics, indent=2, default=_json_default) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args):
    if args.r < 2 or args.epsilon < 0:
        raise UsageError("need r >= 2 and epsilon >= 0")
    m = args.m
    if args.kind == "middle-points":
        if m is not None and m != args.r:
            raise UsageError("middle-points instances have m = r")
    elif m is None:
        m = 30
    if m is not None and m < args.r:
        raise UsageError("need m >= r")
    inst = generate(args.kind, m, args.r, args.epsilon, args.seed)
    write_matrix(args.out, inst.M_noisy)
    side = sidecar_path(args.out)
    side.write_text(json.dumps(inst.metadata(), indent=2, default=_json_default) + "\n")
    print(f"wrote {args.out} ({inst.M_noisy.shape[0]}x{inst.M_noisy.shape[1]}) and {side}")
    return EXIT_OK


def parse_grid(text):
    """``"0:0.6:0.05"`` (start:stop:step, inclusive) or a comma list ``"0,0.1"``."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 10) for i in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --eps grid {text!r}: {exc}") from exc


def cmd_bench(args):
    grid = parse_grid(args.eps)
    if not grid or any(b < a for a, b in zip(grid, grid[1:])):
        raise UsageError("--eps must be a non-empty ascending grid")
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown or not algorithms:
        raise UsageError(f"unknown algorithms {unknown}; choose from {', '.join(ALGORITHMS)}")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    m = args.m
    if args.kind == "middle-points-gaussian" and m is None:
        m = 30
    records, summary = robustness_sweep(
        algorithms, grid, args.trials, base_seed=args.seed, kind=args.kind, m=m, r=args.r,
        opts=_mvee_options(args), workers=args.jobs,
    )
    with open(args.records, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for rec in records:
            writer.writerow([rec.algorithm, repr(rec.epsilon), rec.trial, repr(rec.recovery), repr(rec.runtime_seconds)])
    rows = []
    for name in algorithms:
        rts = [rec.runtime_seconds for rec in records if rec.algorithm == name]
        rob100, rob95 = summary[name]
        rows.append((name, rob100, rob95, float(np.mean(rts))))
    with open(args.summary, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_FIELDS)
        for row in rows:
            writer.writerow([row[0]] + [repr(v) for v in row[1:]])
    print(f"{'algorithm':<15}{'rob100':>8}{'rob95':>8}{'mean_runtime':>14}")
    for name, rob100, rob95, rt in rows:
        print(f"{name:<15}{rob100:>8.2f}{rob95:>8.2f}{rt:>14.4g}")
    return EXIT_OK


def cmd_mvee(args):
    M = read_matrix(args.input)
    sol = mvee_active_set(M, M.shape[0], _mvee_options(args))
    if args.output:
        write_matrix(args.output, sol.A)
    else:
        np.savetxt(sys.stdout, sol.A, delimiter=",", fmt="%.17g")
    print(f"margin {sol.margin:.17g}")
    print(f"gap {sol.gap:.3e}")
    print(f"active_set {len(sol.active_set)}")
    print(f"outer_rounds {sol.outer_rounds}")
    return EXIT_OK


def _add_mvee_flags(p):
    p.add_argument("--delta", type=float, default=1e-6, help="feasibility slack (default 1e-6)")
    p.add_argument("--eta", type=int, default=None, help="active-set size (default r(r+1)/2 + r)")


def build_parser():
    parser = argparse.ArgumentParser(prog="precspa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract r column indices from a CSV matrix")
    p.add_argument("input")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--algo", choices=ALGORITHMS, default="prec-spa")
    p.add_argument("--p", type=float, default=2.0, help="selection norm exponent in (1, 2]")
    p.add_argument("--output", "-o", default=None)
    _add_mvee_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("synth", help="write a synthetic middle-points instance")
    p.add_argument("--kind", choices=KINDS, default="middle-points")
    p.add_argument("--m", type=int, default=None, help="rows (middle-points-gaussian only, default 30)")
    p.add_argument("--r", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="robustness sweep over a noise grid")
    p.add_argument("--kind", choices=KINDS, default="middle-points")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--r", type=int, default=20)
    p.add_argument("--eps", default="0:0.6:0.05", help="start:stop:step or comma list")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--algorithms", default=",".join(ALGORITHMS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--records", default="records.csv")
    p.add_argument("--summary", default="summary.csv")
    _add_mvee_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("mvee", help="minimum-volume centred ellipsoid of the columns of a full-row-rank matrix")
    p.add_argument("input")
    p.add_argument("--output", "-o", default=None, help="CSV for A (default: stdout)")
    _add_mvee_flags(p)
    p.set_defaults(func=cmd_mvee)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecSpaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
