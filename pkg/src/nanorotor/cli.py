"""Command-line front end.

    nanorotor --scenario fig3c --seed 42 --out results
    nanorotor --config run.ini --scenario fig4b --set trap.theta=0.3927

Exit codes: 0 success, 1 configuration error, 2 runtime physics error,
3 validation-check failure.
"""
from __future__ import annotations

import argparse
import sys

from .config import apply_overrides, build_experiment, parse_config
from .errors import (
    NanorotorError,
    ParseError,
    UnknownScenario,
    ValidationError,
)
from .scenarios import SCENARIOS, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_VALIDATION = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nanorotor",
        description="Rigid-body simulations of a feedback-cooled, "
        "optically levitated nanodumbbell.",
    )
    parser.add_argument("--config", metavar="PATH", default=None,
                        help="INI config file (defaults fill missing keys)")
    parser.add_argument("--scenario", metavar="NAME", required=True,
                        choices=sorted(SCENARIOS),
                        help="registered experiment protocol to run")
    parser.add_argument("--seed", metavar="U64", type=int, default=None,
                        help="override the ensemble master seed")
    parser.add_argument("--out", metavar="DIR", default="out",
                        help="output root directory (default: out)")
    parser.add_argument("--set", metavar="SECTION.KEY=VALUE", action="append",
                        dest="overrides", default=[],
                        help="dotted-key config override; repeatable")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides.append(f"ensemble.seed={args.seed}")
        cfg = apply_overrides(cfg, overrides)
        build_experiment(cfg)  # surface physics-invalid values as config errors
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out_dir = run_scenario(args.scenario, cfg, args.out)
    except UnknownScenario as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NanorotorError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(out_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
