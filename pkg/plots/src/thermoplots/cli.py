"""Command line entry point: render one plot spec."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import PlotError
from .render import render
from .spec import load_spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermochain-plot",
        description="Render a figure from a declarative plot spec over "
        "simulation CSV time series.",
    )
    parser.add_argument(
        "--spec", required=True, metavar="PATH", help="plot spec file (JSON)"
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        output = render(load_spec(args.spec))
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
