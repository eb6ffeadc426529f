"""Command-line surface: one subcommand per experiment.

Usage:
    nlslab <experiment> --out DIR [--config FILE] [--seed N] [--threads K]
                        [--dump-fields]

The config file is flat key=value text; unknown keys are errors.  Outputs are
``report.txt`` (human-readable, status in the header) and ``results.csv``
(machine-readable); with ``--dump-fields`` experiments also write NLSF1
snapshots.  The exit code is 0 only for status ok (3 clamped, 4 boundary-mass
violation, 1 error).
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

from .experiments import (
    CLAMPED,
    ERROR,
    INVALID_BOUNDARY,
    OK,
    RUNNERS,
    build_config,
    parse_config_file,
    run_experiment,
)

EXIT_CODES = {OK: 0, CLAMPED: 3, INVALID_BOUNDARY: 4, ERROR: 1}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlslab",
        description="batch experiments for the truncated cubic-flow laboratory",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="key=value config file")
        p.add_argument("--out", type=str, required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker hint recorded in the report; runs are sequential")
        p.add_argument("--dump-fields", action="store_true")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    overrides = {}
    if args.config:
        overrides.update(parse_config_file(args.config))
    if args.seed is not None:
        overrides["seed"] = args.seed
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        cfg = build_config(args.experiment, overrides)
        result = RUNNERS[args.experiment](cfg)
    except Exception as exc:
        (out_dir / "report.txt").write_text(
            f"experiment={args.experiment}\nstatus=error\nerror={exc}\n"
        )
        traceback.print_exc()
        return EXIT_CODES[ERROR]
    result.header["threads"] = args.threads
    result.header["seed"] = cfg.get("seed")
    (out_dir / "report.txt").write_text(result.report_text())
    (out_dir / "results.csv").write_text(result.csv_text())
    if args.dump_fields and result.fields:
        from .fieldio import write_field

        for name, fld in result.fields.items():
            write_field(out_dir / f"{name}.nlsf", fld)
    print(f"{args.experiment}: status={result.status} -> {out_dir}")
    return EXIT_CODES.get(result.status, 1)


if __name__ == "__main__":
    sys.exit(main())
