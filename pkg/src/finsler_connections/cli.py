"""Command line entry point: ``finsler-connections {report,check,list-metrics}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import FinslerError
from .metrics import FAMILIES, MetricSpec
from .report import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_PASS,
    FORMATS,
    RunConfig,
    config_from_dict,
    default_config,
    parse_point,
    read_config_document,
    run_check,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finsler-connections",
        description="Spray, Barthel, Cartan and Berwald connections with invariant checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("report", "write the full report document"),
        ("check", "run the checks and print one line per check"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--metric", help="metric family (overrides the config)")
        p.add_argument("--dimension", type=int, default=None, help="dimension for --metric (default 2)")
        p.add_argument("--point", action="append", default=[], metavar="X;Y",
                       help='explicit point "x1,..;y1,.." (repeatable)')
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=Path, default=None, help="write the report here")
        p.add_argument("--format", choices=FORMATS, default=None)
    sub.add_parser("list-metrics", help="list the built-in metric families")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Config file (or the default config) with command line overrides applied."""
    if args.config:
        doc = dict(read_config_document(args.config))
    else:
        doc = default_config().to_dict()
        doc.pop("checks")
    if args.metric:
        dim = args.dimension
        if dim is None:
            dim = len(parse_point(args.point[0]).x) if args.point else 2
        doc.pop("metrics", None)
        doc["metric"] = {"family": args.metric, "dimension": dim}
    elif args.dimension is not None:
        raw = doc.pop("metrics", None) or [doc.pop("metric")]
        doc["metrics"] = [{"family": m["family"], "dimension": args.dimension} for m in raw]
    if args.point:
        doc["points"] = list(args.point)
        doc["sample_count"] = 0
    if args.seed is not None:
        doc["seed"] = args.seed
    output = dict(doc.get("output") or {})
    if args.out is not None:
        output["path"] = str(args.out)
    if args.format is not None:
        output["format"] = args.format
    doc["output"] = output
    return config_from_dict(doc)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-metrics":
        for fam in FAMILIES:
            print(fam, json.dumps(MetricSpec.create(fam, 2).params))
        return EXIT_PASS
    try:
        cfg = config_from_args(args)
    except FinslerError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outcome = run_check(cfg)
    if args.command == "check":
        for line in outcome.lines:
            print(line)
    else:
        if outcome.text is None:
            for line in outcome.lines:
                print(line, file=sys.stderr)
        elif cfg.output_path is None:
            sys.stdout.write(outcome.text)
        else:
            print(outcome.lines[-1])
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
