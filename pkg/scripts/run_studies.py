#!/usr/bin/env python3
"""Run the invariance, scaling and diffusion-limit studies from the bundled configs."""

import argparse
import pathlib
import sys

from solhmc.cli import main as cli

HERE = pathlib.Path(__file__).resolve().parent
CONFIGS = HERE / "configs"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/studies")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()
    base = pathlib.Path(args.out)
    base.mkdir(parents=True, exist_ok=True)
    jobs = [
        ("invariance", CONFIGS / "invariance_gaussian.toml"),
        ("scaling", CONFIGS / "scaling_double_well.toml"),
        ("diffusion-limit", CONFIGS / "diffusion_limit_double_well.toml"),
    ]
    for cmd, cfg in jobs:
        argv = [cmd, "--config", str(cfg), "--out", str(base / f"{cmd}.csv")]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        code = cli(argv)
        if code != 0:
            return code
        print(f"{cmd}: wrote {base / f'{cmd}.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
