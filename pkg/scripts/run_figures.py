#!/usr/bin/env python3
"""Run both mixing-curve suites and drop CSVs under out/figures.

Thin wrapper over the CLI; pass --full for the near paper-scale versions.
"""

import argparse
import pathlib
import sys

from solhmc.cli import main as cli


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/figures")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--full", action="store_true")
    args = ap.parse_args()
    base = pathlib.Path(args.out)
    for suite in ("fig1", "fig2"):
        argv = [suite, "--out", str(base / suite), "--seed", str(args.seed)]
        if args.full:
            argv.append("--full")
        code = cli(argv)
        if code != 0:
            return code
        print(f"{suite}: wrote CSVs to {base / suite}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
