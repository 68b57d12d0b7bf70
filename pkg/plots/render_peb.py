#!/usr/bin/env python3
"""Render the PEB sweep figure from two sweep CSVs (one per reflector case).

Usage: render_peb.py <csvA> <csvB> <out.png>

One log-log panel with the Rx and VA-1 position error bounds of both cases
overlaid; rows flagged singular appear as gaps.
"""

import argparse
import sys

import reflectplots


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render the PEB sweep figure from two sweep CSVs."
    )
    parser.add_argument("csv_a", help="PEB sweep CSV, first case")
    parser.add_argument("csv_b", help="PEB sweep CSV, second case")
    parser.add_argument("out_path", help="output image file")
    args = parser.parse_args(argv)
    spec = reflectplots.FigureSpec(
        kind="peb", csv_paths=(args.csv_a, args.csv_b), out_path=args.out_path
    )
    try:
        reflectplots.render_to_file(spec)
    except (FileNotFoundError, reflectplots.SchemaMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
