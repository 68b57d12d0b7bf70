#!/usr/bin/env python3
"""Render the eigen-structure sweep figure from a sweep CSV.

Usage: render_eigen.py <csv> <out.png>

Two stacked panels: eigenvalues of the position information (log-log) and
eigenvector directions in degrees, both against the prior accuracy.
"""

import argparse
import sys

import reflectplots


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render the eigen-structure sweep figure from a sweep CSV."
    )
    parser.add_argument("csv_path", help="eigen sweep CSV")
    parser.add_argument("out_path", help="output image file")
    args = parser.parse_args(argv)
    spec = reflectplots.FigureSpec(
        kind="eigen", csv_paths=(args.csv_path,), out_path=args.out_path
    )
    try:
        reflectplots.render_to_file(spec)
    except (FileNotFoundError, reflectplots.SchemaMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
