"""Command-line entry point: ``revdis <scenario> --config <path>``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from revdis.errors import RevdisError
from revdis.scenarios import SCENARIOS, ConfigError, run, validate_config

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="revdis",
        description="Run a cavity/mechanics noise scenario and write CSV data plus a JSON summary.",
    )
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = validate_config(args.config, scenario=args.scenario, output_dir=args.out)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = run(config, threads=args.threads)
    except (RevdisError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"config error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name in summary.files:
        print(config.output_dir / name)
    for w in summary.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
