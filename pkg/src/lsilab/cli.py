"""Command line entry point: ``lsilab run | list-formulas | selfcheck``."""
from __future__ import annotations

import argparse
import sys

from . import bounds, experiments, report
from .config import load_config
from .errors import InputError


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 2
    if args.format:
        cfg.format = args.format
    if args.output:
        cfg.output = args.output
    try:
        rows = experiments.run(cfg, workers=args.workers)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        text = report.emit(rows, cfg.format, None, wall_time=not args.no_wall_time)
        if cfg.output and cfg.output != "-":
            with open(cfg.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (OSError, ValueError) as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 3
    failed = [r for r in rows if r.passed is False]
    checked = sum(r.passed is not None for r in rows)
    print(f"{len(rows)} rows, {checked} checked, {len(failed)} failed", file=sys.stderr)
    for r in failed:
        print(f"  FAIL {r.instance} {r.method} = {r.value!r} {r.error}", file=sys.stderr)
    return 0 if not failed else 1


def _cmd_list(args) -> int:
    for fid, f in bounds.FORMULAS.items():
        inputs = ", ".join(bounds.formula_inputs(fid))
        print(f"{fid:18s} {f.direction:5s} {f.target:5s} ({inputs})  {f.expression}")
    return 0


def _cmd_selfcheck(args) -> int:
    from .selfcheck import run_selfcheck

    ok = True
    for name, passed, detail in run_selfcheck(quick=args.quick):
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsilab", description="Functional inequality constants for mixtures.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="report path ('-' for stdout); overrides the config")
    p.add_argument("-f", "--format", choices=("json", "csv"))
    p.add_argument("-w", "--workers", type=int, help="worker processes (LSILAB_WORKERS wins)")
    p.add_argument("--no-wall-time", action="store_true", help="omit timings for byte-stable reports")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("list-formulas", help="print the bound catalog")
    p.set_defaults(func=_cmd_list)
    p = sub.add_parser("selfcheck", help="run the built-in property suite")
    p.add_argument("--quick", action="store_true", help="1e3 random instances instead of 1e4")
    p.set_defaults(func=_cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
