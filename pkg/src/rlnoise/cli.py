"""Command-line entry point.

Exit codes: 0 on success, 2 for configuration problems (bad files, unknown
names, invalid values), 3 for runtime failures.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import yaml

from .agents import AGENTS, UnknownAgentError
from .core import InvalidConfigError
from .envs import ENVS, UnknownEnvError
from .harness import UnknownAxisError, load_config, report, run_experiment, sweep
from .wrappers import PRESETS, WRAPPER_KINDS, kind_params

_CONFIG_ERRORS = (
    InvalidConfigError,
    UnknownEnvError,
    UnknownAgentError,
    UnknownAxisError,
    FileNotFoundError,
    IsADirectoryError,
    yaml.YAMLError,
)


def _load(args):
    config = load_config(args.config)
    if getattr(args, "out", None):
        config = replace(config, out_dir=args.out)
    return config


def _cmd_run(args) -> int:
    config = _load(args)
    records = run_experiment(config, workers=args.workers)
    print(f"wrote {len(records)} run records to {config.out_dir}")
    return 0


def _cmd_sweep(args) -> int:
    config = _load(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise InvalidConfigError(
            f"--values must be a comma-separated list of numbers, got {args.values!r}"
        ) from None
    records = sweep(config, args.axis, values, workers=args.workers)
    print(f"wrote {len(records)} run records to {config.out_dir} "
          f"({args.axis} in {values})")
    return 0


def _cmd_report(args) -> int:
    table = report(args.in_dir, threshold=args.threshold, out_dir=args.out)
    out = args.out or args.in_dir
    print(f"summary: {len(table.rows)} rows, consistency: {len(table.consistency)} rows")
    print(f"wrote summary.csv, consistency.csv, summary.json and curves to {out}")
    return 0


def _cmd_list_wrappers(args) -> int:
    print("wrapper kinds:")
    for kind in sorted(WRAPPER_KINDS):
        print(f"  {kind}  (params: {', '.join(kind_params(kind)) or 'none'})")
    print("presets:")
    for name in sorted(PRESETS):
        print(f"  {name}")
    return 0


def _cmd_list_envs(args) -> int:
    print("environments:")
    for name in sorted(ENVS):
        print(f"  {name}")
    print("agents:")
    for name in sorted(AGENTS):
        print(f"  {name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlnoise",
        description="Train RL agents under noise-augmented environments and "
                    "compare clean-eval returns against an unaugmented baseline.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True, help="YAML experiment config")
    p_run.add_argument("--out", default=None, help="override the config's out_dir")
    p_run.add_argument("--workers", type=int, default=1,
                       help="parallel worker processes (default 1)")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="re-run an experiment over one wrapper parameter")
    p_sweep.add_argument("--config", required=True, help="YAML experiment config")
    p_sweep.add_argument("--axis", required=True, help="wrapper parameter to vary")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 1.1,1.3,1.5")
    p_sweep.add_argument("--out", default=None, help="override the config's out_dir")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_report = sub.add_parser("report", help="aggregate run records into tables")
    p_report.add_argument("--in", dest="in_dir", required=True,
                          help="directory holding run_*.json records")
    p_report.add_argument("--threshold", type=float, default=0.8,
                          help="consistency inclusion threshold (default 0.8)")
    p_report.add_argument("--out", default=None,
                          help="output directory (default: same as --in)")
    p_report.set_defaults(func=_cmd_report)

    p_lw = sub.add_parser("list-wrappers", help="list wrapper kinds and presets")
    p_lw.set_defaults(func=_cmd_list_wrappers)

    p_le = sub.add_parser("list-envs", help="list registered environments and agents")
    p_le.set_defaults(func=_cmd_list_envs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
