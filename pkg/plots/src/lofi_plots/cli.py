"""Command line entry point for rendering sweep result figures.

Subcommands:

* ``plots ber --csv results.csv --out ber.png`` draws the BER curves.
* ``plots tradeoff --csv results.csv --out tradeoff.png --target-ber 0.01``
  draws the cost/quality scatter.

Exit codes: 0 success (warnings go to stderr), 1 nothing to plot,
2 bad arguments or a malformed results file.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .figures import PlotDataError, make_ber_figure, make_tradeoff_figure, save_figure
from .results_io import ResultsFormatError, load_results


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--csv", required=True, help="sweep results CSV to read")
    parser.add_argument("--out", required=True, help="output image path (format by extension)")
    parser.add_argument(
        "--only",
        default="",
        help="comma-separated scheduler names to include (default: all)",
    )
    parser.add_argument("--title", default=None, help="optional figure title")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from scheduler sweep results."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ber = sub.add_parser("ber", help="BER vs SNR curves, one line per scheduler series")
    _add_common(ber)

    tr = sub.add_parser(
        "tradeoff", help="objective evaluations vs SNR needed to reach a target BER"
    )
    _add_common(tr)
    tr.add_argument(
        "--target-ber",
        type=float,
        default=0.01,
        help="BER level whose crossing defines the x axis (default 0.01)",
    )
    return parser


def _include_list(text: str) -> Optional[list[str]]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    return names or None


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rows = load_results(args.csv)
    except FileNotFoundError:
        print(f"error: results file not found: {args.csv}", file=sys.stderr)
        return 2
    except ResultsFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    include = _include_list(args.only)
    try:
        if args.command == "ber":
            fig, series, notes = make_ber_figure(rows, include=include, title=args.title)
        else:
            if not (args.target_ber > 0.0):
                print("error: --target-ber must be > 0", file=sys.stderr)
                return 2
            fig, series, notes = make_tradeoff_figure(
                rows, args.target_ber, include=include, title=args.title
            )
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    save_figure(fig, args.out)
    print(f"wrote {args.out} ({len(series)} series)")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
