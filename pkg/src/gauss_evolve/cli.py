"""Command line entry point: ``gauss-evolve run`` and ``gauss-evolve compare``."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .experiment import ConfigError, compare_runs, parse_config, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gauss-evolve",
        description="Seeded genetic-algorithm experiments with Gaussian-family mutation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config, one CSV per seed")
    run.add_argument("config", help="key = value experiment file")
    run.add_argument("--seed-override", type=int, metavar="N", help="run only seed N")
    run.add_argument("--out", metavar="DIR", help="output directory (overrides 'output')")

    cmp_ = sub.add_parser("compare", help="compare final bests of two experiment directories")
    cmp_.add_argument("dir_a")
    cmp_.add_argument("dir_b")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        try:
            spec = parse_config(args.config)
        except ConfigError as exc:
            print(f"gauss-evolve: {exc}", file=sys.stderr)
            return 2
        if args.seed_override is not None:
            if not 0 <= args.seed_override < 2**64:
                print("gauss-evolve: --seed-override must be a 64-bit unsigned integer", file=sys.stderr)
                return 2
            spec = dataclasses.replace(spec, seeds=(args.seed_override,))
        if args.out is not None:
            spec = dataclasses.replace(spec, output_path=args.out)
        return run_experiment(spec)

    try:
        report = compare_runs(args.dir_a, args.dir_b)
    except ValueError as exc:
        print(f"gauss-evolve: {exc}", file=sys.stderr)
        return 2
    print(report.format())
    return 0


if __name__ == "__main__":
    sys.exit(main())
