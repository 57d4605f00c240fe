"""Command line entry point.

Subcommands::

    ptsampler run <config-file>       execute an experiment config
    ptsampler validate <config-file>  list diagnostics without executing
    ptsampler born-check --instances 100 --seed 7

Exit codes for `run`: 0 success, 1 runtime failure, 2 invalid config,
3 compute-budget refusal.  `PTSAMPLER_THREADS` caps worker parallelism.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, parse_config_file, validate
from .runner import BudgetError, born_check_rows, run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptsampler", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config file")
    p_run.add_argument("config", help="path to a key=value config file")

    p_val = sub.add_parser("validate", help="check a config without executing")
    p_val.add_argument("config", help="path to a key=value config file")

    p_born = sub.add_parser(
        "born-check",
        help="trajectory vs Choi-contraction probabilities on random instances",
    )
    p_born.add_argument("--instances", type=int, default=100)
    p_born.add_argument("--seed", type=int, default=0)
    p_born.add_argument("--env-max", type=int, default=2)
    p_born.add_argument("--k-max", type=int, default=3)
    p_born.add_argument("--tolerance", type=float, default=1e-10)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "validate":
        try:
            cfg = parse_config_file(args.config)
        except (ConfigError, OSError) as err:
            print(f"config error: {err}")
            return 0
        diags = validate(cfg)
        if not diags:
            print("ok")
        for d in diags:
            print(d)
        return 0
    if args.command == "run":
        try:
            cfg = parse_config_file(args.config)
        except ConfigError as err:
            print(f"invalid config: {err}", file=sys.stderr)
            return 2
        except OSError as err:
            print(f"cannot read config: {err}", file=sys.stderr)
            return 2
        try:
            manifest = run(cfg)
        except BudgetError as err:
            print(f"compute budget refusal: {err}", file=sys.stderr)
            return 3
        except ConfigError as err:
            print(f"invalid config: {err}", file=sys.stderr)
            return 2
        except Exception as err:  # noqa: BLE001 - surface as exit code 1
            print(f"runtime failure: {err}", file=sys.stderr)
            return 1
        print(f"wrote {len(manifest.outputs)} files to {cfg.output_dir}")
        return 0
    if args.command == "born-check":
        rows = born_check_rows(args.instances, args.seed, args.env_max, args.k_max)
        worst = max(r[3] for r in rows)
        print(f"instances: {len(rows)}  max |p_traj - p_choi| = {worst:.3e}")
        if worst < args.tolerance:
            print("PASS")
            return 0
        print(f"FAIL (tolerance {args.tolerance:g})")
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
