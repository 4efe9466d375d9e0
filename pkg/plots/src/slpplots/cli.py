"""slp-plots: render sweep figures from the CSV produced by slprobust."""

from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError
from .figures import FIGURE_NAMES, FigureSpec, render


def build_parser():
    ap = argparse.ArgumentParser(prog="slp-plots", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    rp = sub.add_parser("render", help="render figures from a sweep CSV")
    rp.add_argument("--csv", required=True, help="input sweep CSV path")
    rp.add_argument("--out", required=True, help="output directory")
    rp.add_argument("--format", choices=("svg", "png"), default="svg")
    rp.add_argument("--figures", default=",".join(FIGURE_NAMES),
                    help="comma list among power,ser,eta")
    rp.add_argument("--noise-draws", type=int, default=100,
                    help="per-slot error draws behind each SER cell (sets the log floor)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(csv_path=args.csv, out_dir=args.out, fmt=args.format,
                          figures=tuple(f.strip() for f in args.figures.split(",") if f.strip()),
                          noise_draws=args.noise_draws)
        written = render(spec)
    except SchemaError as e:
        sys.stderr.write(f"schema error: {e}\n")
        return 1
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
