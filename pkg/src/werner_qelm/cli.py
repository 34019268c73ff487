"""Command-line entry point: ``werner-qelm run <preset|config> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import PRESETS, ResolvedConfig, config_to_dict, parse_config
from .experiment import ConfigError, run_generalization, run_sweep
from .report import dumps_json, emit_results, generalization_record, sweep_record

OUT_DIR_ENV = "WERNER_QELM_OUT_DIR"

log = logging.getLogger("werner_qelm")


def execute(resolved: ResolvedConfig, workers: int = 1) -> dict:
    """Run a resolved configuration and return its result record."""
    exp = resolved.experiment
    if resolved.kind == "generalization":
        return generalization_record(resolved, run_generalization(exp, workers=workers))
    return sweep_record(resolved, run_sweep(exp, workers=workers, keep_records=resolved.scatter))


def _default_out(source: str, fmt: str) -> Path:
    stem = source if source in PRESETS else Path(source).stem
    return Path(os.environ.get(OUT_DIR_ENV, ".")) / f"{stem}.{fmt}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="werner-qelm",
        description="Quantum extreme learning machine estimating the Werner parameter p.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or a TOML configuration file",
                         description=f"Presets: {', '.join(PRESETS)}.")
    run.add_argument("source", help="preset name, TOML config path, or JSON result record to re-run")
    run.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    run.add_argument("--out", type=Path, default=None,
                     help=f"output path (default: ${OUT_DIR_ENV} or the current directory, named after the source)")
    run.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default: csv)")
    run.add_argument("--quick", action="store_true", help="scaled-down run: 3 realizations, 40 train/test states")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config field, e.g. --set inputs.epsilons=[0.1] (repeatable)")
    run.add_argument("--workers", type=int, default=1, help="worker processes; does not change results")
    run.add_argument("--dry-run", action="store_true", help="print the resolved configuration as JSON and exit")
    run.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    sub.add_parser("presets", help="list the built-in presets")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        for name in PRESETS:
            print(name)
        return 0

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        resolved = parse_config(args.source, args.overrides, seed=args.seed, quick=args.quick)
        if args.dry_run:
            sys.stdout.write(dumps_json(config_to_dict(resolved)))
            return 0
        if args.workers < 1:
            raise ConfigError("--workers: must be >= 1")
        out = args.out or _default_out(args.source, args.format)
        log.info("running %s (%s)", args.source, resolved.kind)
        record = execute(resolved, workers=args.workers)
        for path in emit_results(record, args.format, out):
            log.info("wrote %s", path)
    except ConfigError as exc:
        print(f"werner-qelm: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"werner-qelm: I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
