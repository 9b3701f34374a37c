"""Command-line driver.

Maps flags onto a :class:`~pcrkit.pipeline.RunConfig`, runs the
pipeline, and writes or prints the report.  Exit codes identify the
failing stage: 0 success, 2 input validation (including flag misuse),
3 preprocessing, 4 component extraction, 5 regression, 6 output.
"""

from __future__ import annotations

import argparse
import sys

from .errors import STAGE_EXIT_CODES, PcrError, StageError
from .fixtures import FIXTURE_NAMES
from .pipeline import (
    REPORT_FORMATS,
    ROTATION_MODES,
    SCORE_METHODS,
    RunConfig,
    emit_report,
    render_report_text,
    run_pipeline,
)
from .preprocess import DIFFERENCE_MODES


def _components_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'auto' or a positive integer, got {text!r}"
        ) from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"component count must be positive, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcrkit",
        description=(
            "Principal-components regression over yearly indicator tables: "
            "difference, standardize, correlate, extract and rotate "
            "components, regress the response increment on component "
            "scores, and rebuild the level path."
        ),
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument(
        "--input", metavar="PATH", help="delimited yearly table (header: year,<name>,...)"
    )
    source.add_argument(
        "--fixture",
        choices=FIXTURE_NAMES,
        help="bundled correlation matrix; runs matrix-only (no regression)",
    )
    parser.add_argument(
        "--response", default="IY", metavar="NAME", help="response column (default: IY)"
    )
    parser.add_argument(
        "--diff",
        choices=DIFFERENCE_MODES,
        default="absolute",
        help="year-over-year differencing mode (default: absolute)",
    )
    parser.add_argument(
        "--components",
        type=_components_arg,
        default="auto",
        metavar="auto|K",
        help="components to retain: 'auto' applies the eigenvalue-above-1 rule",
    )
    parser.add_argument(
        "--rotation",
        choices=ROTATION_MODES,
        default="varimax",
        help="loading rotation (default: varimax)",
    )
    parser.add_argument(
        "--scores",
        choices=SCORE_METHODS,
        default="regression",
        help="component score method (default: regression)",
    )
    parser.add_argument(
        "--out",
        metavar="DIR",
        help="directory for report files; omit to print the report to stdout",
    )
    parser.add_argument(
        "--format",
        choices=REPORT_FORMATS,
        default="text",
        help="report file format (default: text)",
    )
    parser.add_argument(
        "--ridge",
        action="store_true",
        help="regularize score weights on a numerically singular correlation matrix",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(
        input_path=args.input,
        fixture=args.fixture,
        response=args.response,
        diff=args.diff,
        components=args.components,
        rotation=args.rotation,
        scores=args.scores,
        out=args.out,
        format=args.format,
        ridge=args.ridge,
    )
    try:
        report = run_pipeline(config)
    except StageError as err:
        print(f"error: {err}", file=sys.stderr)
        if config.out is not None and err.report is not None:
            # Best effort: preserve the stages that completed.
            try:
                emit_report(err.report, config.out, config.format)
            except PcrError:
                pass
        return err.exit_code

    if config.out is None:
        print(render_report_text(report), end="")
        return 0
    try:
        paths = emit_report(report, config.out, config.format)
    except PcrError as err:
        print(f"error: [output] {err}", file=sys.stderr)
        return STAGE_EXIT_CODES["output"]
    for path in paths:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
