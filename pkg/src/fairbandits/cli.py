"""Command line entry point: ``fairbandits run|validate <config.yaml>``."""
from __future__ import annotations

import argparse
import logging
import sys

from fairbandits.config import ConfigError, load_config, validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _seed_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"seeds must be integers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairbandits", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-seed progress")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run every seed and write CSV/JSON artifacts")
    val_p = sub.add_parser("validate", help="check a config and print diagnostics")
    for p in (run_p, val_p):
        p.add_argument("config", help="path to a YAML experiment config")
        p.add_argument("--output-dir", help="override output_dir")
        p.add_argument("--seeds", type=_seed_list, help="override seeds, e.g. '1,2,3'")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel worker processes (default 1)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if args.seeds is not None:
        cfg.seeds = args.seeds
    problems = validate(cfg)
    if problems:
        for line in problems:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print("config ok")
        return EXIT_OK
    if args.jobs < 1:
        print("config error: --jobs: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    from fairbandits.harness import run

    try:
        agg = run(cfg, jobs=args.jobs)
    except Exception as exc:  # noqa: BLE001 - any failure mid-run maps to the runtime exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    mean = agg["mean"]
    print(f"{len(agg['seeds'])} seed(s) -> {cfg.output_dir}: mean regret {mean['cumulative_regret']:.4f}, "
          f"mean fairness loss {mean['fairness_loss']:.1f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
