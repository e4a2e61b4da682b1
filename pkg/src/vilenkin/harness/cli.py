"""Command line entry point: ``vilenkin-lpr <experiment> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ExperimentConfig
from .experiments import RUNNERS, default_config
from .report import emit

# older experiment names kept for existing scripts
ALIASES = {"theorem1": "square", "theorem2": "lacunary"}


def _budget(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name, float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"budget {name!r} is not a number") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vilenkin-lpr", description="Run square-function experiments.")
    parser.add_argument("experiment", choices=sorted(RUNNERS) + sorted(ALIASES))
    parser.add_argument("--config", help="JSON file with an ExperimentConfig")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--out", help="directory for <experiment>.csv and <experiment>.json")
    parser.add_argument("--budget", type=_budget, action="append", default=[], metavar="NAME=VALUE",
                        help="override a budget (repeatable)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.experiment = ALIASES.get(args.experiment, args.experiment)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    cfg = ExperimentConfig.load(args.config) if args.config else default_config(args.experiment)
    if args.seed is not None:
        cfg.seed = args.seed
    for name, value in args.budget:
        cfg.budgets[name] = value
    cfg.__post_init__()
    report = RUNNERS[args.experiment](cfg)
    out = args.out or cfg.output
    if out:
        emit(report, out)
    print(json.dumps({"experiment": report.name, "passed": report.passed,
                      "checks": {k: v["passed"] for k, v in report.checks.items()}}, sort_keys=True))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
