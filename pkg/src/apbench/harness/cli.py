"""Command-line entry point.

Exit codes: 0 when every invariant holds, 1 when one fails, 2 for a bad
configuration.  Reports are written to ``--out`` whether or not they pass.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import COMMANDS
from .report import emit, load_report

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="apbench", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["emit"]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON config file")
        sp.add_argument("--seed", type=int, help="overrides the config seed")
        sp.add_argument("--out", type=Path, help="directory for CSV and JSON output")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "theorem3":
            sp.add_argument("--workers", type=int, default=1, help="parallel sweep points")
        if name == "emit":
            sp.add_argument("report", type=Path, help="JSON report to re-emit as CSV tables")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "emit":
            try:
                report = load_report(args.report)
            except (OSError, ValueError, KeyError) as exc:
                raise ConfigError(f"cannot read report {args.report}: {exc}") from exc
        else:
            cfg = load_config(args.config, args.seed, args.command)
            fn = COMMANDS[args.command]
            report = fn(cfg, workers=args.workers) if args.command == "theorem3" else fn(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out is not None:
        for path in emit(report, args.out):
            print(f"wrote {path}")
    for line in report.summary_lines():
        print(line)
    for note in report.notes:
        print(f"note: {note}")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
