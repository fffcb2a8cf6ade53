"""Command-line entry point: ``quadevo evolve|reevaluate|analyze|export-plots``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import OUTPUT_ENV, ConfigError, load_config
from .runlog import SchemaError
from .experiments import WorkflowError, analyze, evolve, export_plots, reevaluate


def _default_root() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "quadevo-output"))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quadevo", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="run the evolutionary run matrix of a config")
    ev.add_argument("--config", required=True, type=Path)
    ev.add_argument("--jobs", type=int, default=1, help="runs executed concurrently")
    ev.add_argument("--out", type=Path, default=None,
                    help=f"output directory (default: config output_dir, else ${OUTPUT_ENV}/<name>)")

    re_ = sub.add_parser("reevaluate", help="re-test front individuals on every surface")
    re_.add_argument("--runs", required=True, type=Path)
    re_.add_argument("--out", type=Path, default=None, help="re-evaluation CSV path")
    re_.add_argument("--seed", required=True, type=int)
    re_.add_argument("--count", type=int, default=None, help="individuals per training surface")
    re_.add_argument("--repeats", type=int, default=None)

    an = sub.add_parser("analyze", help="fronts, hypervolume, significance, distances, summary")
    an.add_argument("--runs", required=True, type=Path)
    an.add_argument("--reeval", type=Path, default=None)
    an.add_argument("--out", type=Path, default=None)

    ex = sub.add_parser("export-plots", help="plot-ready tables from an analysis directory")
    ex.add_argument("--analysis", required=True, type=Path)
    ex.add_argument("--out", type=Path, default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "evolve":
            if args.jobs < 1:
                raise WorkflowError("--jobs must be at least 1")
            dirs = evolve(load_config(args.config), jobs=args.jobs, out_root=args.out)
            print(f"{len(dirs)} runs complete under {dirs[0].parent}")
        elif args.command == "reevaluate":
            out = args.out or _default_root() / "reeval.csv"
            path = reevaluate(args.runs, out, args.seed, count=args.count, repeats=args.repeats)
            print(f"wrote {path}")
        elif args.command == "analyze":
            out = args.out or _default_root() / "analysis"
            result = analyze(args.runs, args.reeval, out)
            print("\n".join(result["summary"]))
        elif args.command == "export-plots":
            out = args.out or _default_root() / "plots"
            for path in export_plots(args.analysis, out):
                print(f"wrote {path}")
    except (ConfigError, SchemaError, WorkflowError, FileNotFoundError) as exc:
        print(f"quadevo {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
