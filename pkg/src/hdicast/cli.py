"""Command-line entry point: ``hdicast {validate,rank,evaluate,forecast,run-all}``.

Exit status: 0 all countries OK, 2 partial failure, 1 config/data error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from hdicast.config import PipelineConfig, validate
from hdicast.errors import HdicastError
from hdicast.pipeline import run_pipeline

log = logging.getLogger("hdicast")

COMMAND_STAGES = {
    "rank": ("rank",),
    "evaluate": ("evaluate",),
    "forecast": ("forecast",),
    "run-all": ("rank", "evaluate", "forecast"),
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hdicast", description="HDI forecasting pipeline")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("validate", *COMMAND_STAGES):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="pipeline JSON config")
        sp.add_argument("--output-dir", help="override the config's output_dir")
        if name != "validate":
            sp.add_argument("--workers", type=int, default=1, help="countries processed in parallel")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def _error(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = PipelineConfig.load(args.config)
        if args.output_dir:
            config = dataclasses.replace(config, output_dir=str(Path(args.output_dir).absolute()))
    except HdicastError as exc:
        _error({"stage": "config", "error": type(exc).__name__, "message": str(exc)})
        return 1
    violations = validate(config)
    if args.command == "validate":
        for v in violations:
            print(v)
        if not violations:
            print("ok")
        return 1 if violations else 0
    if violations:
        for v in violations:
            _error({"stage": "config", "error": "Violation", "field": v.field, "message": v.message})
        return 1
    if args.workers < 1:
        _error({"stage": "config", "error": "Violation", "field": "--workers", "message": "must be >= 1"})
        return 1
    try:
        status, outcomes = run_pipeline(config, COMMAND_STAGES[args.command], workers=args.workers,
                                        reuse=args.command != "run-all",
                                        write_manifest=args.command == "run-all")
    except (HdicastError, OSError, ValueError) as exc:
        _error({"stage": "load", "error": type(exc).__name__, "message": str(exc)})
        return 1
    for o in outcomes:
        if o.failure is not None:
            _error(o.failure)
    return status


if __name__ == "__main__":
    sys.exit(main())
