"""Command-line entry point.

Subcommands: ingest, delineate, fit, map, align, analytics, report, zoom,
run (full pipeline), demo (write the bundled synthetic dataset). Exit codes:
0 success, 2 config error, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, DataError, NumericError
from .pipeline import STAGES, load_config, run_pipeline, run_zoom
from .synth import write_demo

logger = logging.getLogger("topicalign")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline configuration JSON")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the fit seeds")
    parser.add_argument("--verbose", action="store_true", help="verbose logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicalign",
        description=(
            "Map the topic structure of a supply corpus and a demand corpus with "
            "LDA and quantify their alignment via Jensen-Shannon topic distances. "
            "Tokens are lowercase alphanumeric runs of length >= 2, excluding "
            "purely numeric strings; seed patterns support a trailing '*' only."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
        ("run", "run the full pipeline (ingest through report)"),
        ("ingest", "parse corpora and match the seed query"),
        ("delineate", "expand the seed corpus through citation clusters"),
        ("fit", "build vocabularies and fit both topic models"),
        ("map", "topic distances, PCoA layouts, relevance tables, map files"),
        ("align", "cross-corpus distances, closest pairs, echo flags"),
        ("analytics", "co-occurrence, cores, trends, profiles, pseudo-topics"),
        ("report", "emit the alignment report"),
        ("zoom", "extract the configured sub-corpus and refit it"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "run":
            p.add_argument(
                "--stage",
                choices=STAGES,
                default=None,
                help="run only this stage (prior stage artifacts must exist)",
            )

    demo = sub.add_parser("demo", help="write the bundled synthetic dataset and config")
    demo.add_argument("--out", required=True, help="directory for the demo dataset")
    demo.add_argument("--seed", type=int, default=20240601)
    demo.add_argument("--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "demo":
            config_path = write_demo(args.out, seed=args.seed)
            print(f"demo dataset written; config at {config_path}")
            return EXIT_OK

        cfg = load_config(args.config, out_override=args.out, seed_override=args.seed)
        if args.command == "run":
            manifest = run_pipeline(cfg, stage=args.stage)
        elif args.command == "zoom":
            manifest = run_zoom(cfg)
        else:
            manifest = run_pipeline(cfg, stage=args.command)
        print(f"{args.command}: {len(manifest['artifacts'])} artifact(s) in {cfg.output_dir}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
