"""render: one figure from one CSV artifact.

    render --kind decay --in results/decay.csv --out results/decay.png
"""

import argparse
import sys
from pathlib import Path

from spinfigs.plots import KINDS, PlotSpec, RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render", description="Render a figure from a spinlab CSV artifact.")
    parser.add_argument("--kind", required=True, choices=KINDS,
                        help="which artifact the CSV holds")
    parser.add_argument("--in", dest="source", required=True,
                        help="input CSV path")
    parser.add_argument("--out", dest="output", required=True,
                        help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(inputs=(Path(args.source),), output=Path(args.output),
                    kind=args.kind)
    try:
        out = render(spec)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
