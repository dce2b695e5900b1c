"""Command line driver: one subcommand per experiment.

Every run writes ``<out>/<experiment>.json`` (inputs, metrics with tolerances
and pass flags) and ``<out>/<experiment>.csv`` (the swept grid). Exit status is
0 when every metric passes, 1 on a tolerance failure and 2 on invalid input.

Options can also come from a flat JSON file given with ``--config``; keys are
the option names with dashes or underscores, and flags on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .params import DomainError, TransformParams

OUTPUT_ENV = "CTSB_OUTPUT_DIR"
DEFAULT_OUTPUT = "ctsb-reports"

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class InputError(ValueError):
    pass


# --- value parsers ------------------------------------------------------------


def int_range(text: str) -> list[int]:
    """``"2..5"`` -> [2, 3, 4, 5]; also accepts ``"1,3,4"`` and single ints."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def float_range(text: str, default_num: int = 13) -> list[float]:
    """``"2..8"`` -> 13 evenly spaced values, ``"2..8:7"`` -> 7; or a comma list."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            span, _, num = part.partition(":")
            lo, hi = (float(v) for v in span.split(".."))
            out.extend(float(v) for v in np.linspace(lo, hi, int(num) if num else default_num))
        elif part:
            out.append(float(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def float_list(text: str) -> list[float]:
    return float_range(text)


def complex_list(text: str) -> list[complex]:
    try:
        return [complex(p.strip().replace(" ", "").replace("i", "j")) for p in str(text).split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def tuple_list(text: str) -> list[tuple[float, ...]]:
    """``"1:0,2:0.8"`` -> [(1.0, 0.0), (2.0, 0.8)]."""
    try:
        return [tuple(float(v) for v in p.split(":")) for p in str(text).split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# --- parser -----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat JSON file of option values")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true", help="no per-metric lines on stdout")


def _grid(p: argparse.ArgumentParser, n_points: int = 20):
    p.add_argument("--grid", choices=["default"], default="default",
                   help="built-in (s, tau) grid; replaced by --s/--t/--u when those are given")
    p.add_argument("--n-points", type=int, default=n_points)
    p.add_argument("--s", type=float_list)
    p.add_argument("--t", type=float_list)
    p.add_argument("--u", type=float_list)
    p.add_argument("--jobs", type=int, default=1, help="worker processes over grid points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctsb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")

    p = sub.add_parser("euclid-isometry", help="Wick-calculus isometry on R^d")
    _common(p)
    _grid(p)
    p.add_argument("--d", type=int_range, default=[1, 2])
    p.add_argument("--max-degree", type=int, default=6)
    p.add_argument("--n-random", type=int, default=3)

    p = sub.add_parser("euclid-ratio", help="closed-form norm ratio vs quadrature")
    _common(p)
    p.add_argument("--n-points", type=int, default=10)
    p.add_argument("--order", type=int, default=64)

    p = sub.add_parser("uncertainty", help="Schrodinger uncertainty saturation")
    _common(p)
    p.add_argument("--n-states", type=int, default=10)

    p = sub.add_parser("su2-isometry", help="exact SU(2) isometry and operator identities")
    _common(p)
    _grid(p)
    p.add_argument("--n", type=int_range, default=[1, 2, 3, 4, 5])
    p.add_argument("--n-A", type=int, default=5, dest="n_A")
    p.add_argument("--mc", action="store_true", help="also run the Monte Carlo cross-check")
    p.add_argument("--mc-paths", type=int, default=100_000)
    p.add_argument("--mc-steps", type=int, default=200)

    p = sub.add_parser("transform-equiv", help="heat-kernel convolution vs M_tau")
    _common(p)
    p.add_argument("--n", type=int_range, default=[1, 2, 3])
    p.add_argument("--n-z", type=int, default=5)
    p.add_argument("--tau", type=complex_list, default=[1.0, 1 + 0.5j, 1 - 0.5j])
    p.add_argument("--order", type=int, default=48)
    p.add_argument("--radius", type=float, default=0.5)

    p = sub.add_parser("heatk-properties", help="mass, semigroup, invariances, approximate identity")
    _common(p)
    p.add_argument("--t", type=float_list, default=[0.5, 1.0, 2.0])
    p.add_argument("--identity-t", type=float_list, default=[0.5, 0.1, 0.02])
    p.add_argument("--order", type=int, default=48)

    p = sub.add_parser("nu-invariance", help="K-averaged law depends on t only")
    _common(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--variants", type=tuple_list, default=[(1.0, 0.0), (2.0, 0.0), (2.0, 0.8)],
                   help="s:u pairs, e.g. 1:0,2:0,2:0.8")
    p.add_argument("--control", type=tuple_list, default=[(1.0, 0.5, 0.0)], help="s:t:u at another t")
    p.add_argument("--n-paths", type=int, default=200_000)
    p.add_argument("--n-steps", type=int, default=200)

    p = sub.add_parser("large-s", help="decay of rho_s towards Haar measure")
    _common(p)
    p.add_argument("--s", type=float_range, default=None, help="e.g. 2..8 (13 points) or 2..8:25")
    p.add_argument("--trend-s", type=float_list, default=[1.0, 2.0, 4.0, 8.0])
    p.add_argument("--n-entries", type=int, default=3)

    p = sub.add_parser("params-roundtrip", help="(a,b,c) <-> (s,t,u) and metric identities")
    _common(p)
    p.add_argument("--s", type=float_list)
    p.add_argument("--t", type=float_list)
    p.add_argument("--u", type=float_list)
    p.add_argument("--n-random", type=int, default=100)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:  # argparse has no public accessor
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


def _apply_config(sub: argparse.ArgumentParser, path: str):
    """Load a flat JSON document as defaults for ``sub``."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict) or any(isinstance(v, dict) for v in data.values()):
        raise InputError("config must be a flat JSON object")
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest in ("config", "help") or dest not in actions:
            raise InputError(f"unknown config key {key!r}")
        action = actions[dest]
        if isinstance(value, bool) or action.type is None:
            defaults[dest] = value
            continue
        text = ",".join(map(str, value)) if isinstance(value, list) else str(value)
        try:
            defaults[dest] = action.type(text)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise InputError(f"config key {key!r}: {exc}") from None
    sub.set_defaults(**defaults)


def _points(args):
    given = [v is not None for v in (args.s, args.t, args.u)]
    if not any(given):
        return None
    if not (args.s and args.t):
        raise InputError("--s and --t must be given together (--u defaults to 0)")
    return ex.validate_grid(args.s, args.t, args.u or [0.0])


def _jobs(args) -> int:
    if args.jobs < 1:
        raise InputError(f"--jobs must be at least 1, got {args.jobs}")
    return args.jobs


def run_experiment(args) -> ex.Report:
    name = args.experiment
    if name == "euclid-isometry":
        return ex.euclid_isometry(tuple(args.d), args.max_degree, _points(args), args.n_points,
                                  args.n_random, args.seed, jobs=_jobs(args))
    if name == "euclid-ratio":
        return ex.euclid_ratio(args.n_points, args.seed, args.order)
    if name == "uncertainty":
        return ex.uncertainty(args.n_states, args.seed)
    if name == "su2-isometry":
        return ex.su2_isometry(args.n, args.n_A, _points(args), args.n_points, args.seed,
                               mc=args.mc, mc_paths=args.mc_paths, mc_steps=args.mc_steps,
                               jobs=_jobs(args))
    if name == "transform-equiv":
        return ex.transform_equiv(tuple(args.n), args.n_z, tuple(args.tau), args.order, args.radius,
                                  args.seed)
    if name == "heatk-properties":
        return ex.heatk_properties(tuple(args.t), tuple(args.identity_t), args.order, seed=args.seed)
    if name == "nu-invariance":
        if len(args.control) != 1 or len(args.control[0]) != 3:
            raise InputError("--control takes a single s:t:u triple")
        if any(len(v) != 2 for v in args.variants):
            raise InputError("--variants takes s:u pairs")
        for s, u in args.variants:
            TransformParams.make(s, args.t, u).check()
        return ex.nu_invariance(args.t, tuple(args.variants), args.n_paths, args.n_steps, args.seed,
                                args.control[0])
    if name == "large-s":
        if args.s is not None and (len(args.s) < 2 or min(args.s) <= 0):
            raise InputError("--s needs at least two positive values")
        return ex.large_s(args.s, tuple(args.trend_s), args.n_entries, args.seed)
    if name == "params-roundtrip":
        return ex.params_roundtrip(_points(args), args.n_random, seed=args.seed)
    raise InputError(f"unknown experiment {name!r}")


def write_report(report: ex.Report, out_dir: Path) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    jpath = out_dir / f"{report.experiment}.json"
    cpath = out_dir / f"{report.experiment}.csv"
    jpath.write_text(json.dumps(report.as_dict(), indent=2) + "\n")
    cols: list[str] = []
    for row in report.rows:
        cols.extend(k for k in row if k not in cols)
    with cpath.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in report.rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for k, v in row.items()})
    return jpath, cpath


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        if args.config:
            _apply_config(_subparser(parser, args.experiment), args.config)
            args = parser.parse_args(argv)
        report = run_experiment(args)
    except SystemExit as exc:  # argparse usage errors already printed
        return EXIT_INVALID if exc.code else EXIT_OK
    except (DomainError, InputError) as exc:
        print(f"ctsb: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out_dir = Path(args.out or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)
    jpath, _ = write_report(report, out_dir)
    if not args.quiet:
        for m in report.metrics:
            flag = "PASS" if m.passed else "FAIL"
            print(f"{flag} {report.experiment} {m.name} = {m.value:.3e} ({m.comparison} {m.tolerance:g})")
        print(f"report: {jpath}")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
