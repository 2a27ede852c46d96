"""Command-line entry point.

Subcommands::

    solhmc sample           --config c.toml --out trace.csv
    solhmc fig1             --out DIR [--seed S] [--seeds K] [--full]
    solhmc fig2             --out DIR [--seed S] [--seeds K] [--full]
    solhmc diffusion-limit  --config c.toml --out report.csv
    solhmc scaling          --config c.toml --out report.csv
    solhmc invariance       --config c.toml --out report.csv

Exit codes: 0 success, 2 configuration error, 3 numerical abort, 4 I/O
error.  Every command is deterministic under a fixed seed; CSV bodies are
byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .spectral import ValidationError
from .sampler import NumericalAbort, run_chain
from .analysis import (acceptance_scaling_study, diffusion_limit_study,
                       invariance_study, FUNCTIONALS)
from .experiments import fig1_reports, fig2_reports
from . import configio
from .configio import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _seeded(doc: dict, args) -> dict:
    """Apply a --seed override onto the loaded config document."""
    if args.seed is not None:
        doc.setdefault("run", {})["seed"] = args.seed
    return doc


def cmd_sample(args) -> int:
    t0 = time.monotonic()
    doc = _seeded(configio.load_config(args.config), args)
    cfg = configio.sampler_config_from_dict(doc)
    header = ["step", "accepted", "delta_H"] + list(cfg.observables)
    aborted = False
    try:
        trace = run_chain(cfg)
    except NumericalAbort as exc:
        trace = exc.trace
        aborted = True
        print(f"solhmc sample: {exc}", file=sys.stderr)
    rows = []
    for k in range(trace.iterations):
        rows.append([k + 1, trace.accepted[k], trace.delta_h[k]]
                    + [trace.observables[name][k] for name in cfg.observables])
    configio.write_csv(args.out, header, rows)
    manifest = configio.timed_manifest(
        "sample", cfg.seed, configio.sampler_config_to_dict(cfg),
        [os.path.basename(args.out)], t0)
    manifest.write(configio.manifest_path(args.out))
    return EXIT_NUMERICAL if aborted else EXIT_OK


def _label_to_filename(prefix: str, label: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch in ".-" else "_" for ch in label)
    return f"{prefix}_{safe}.csv"


def _write_mixing_reports(args, reports, prefix: str, config_echo: dict, t0) -> int:
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    written = []
    for rep in reports:
        fname = _label_to_filename(prefix, rep.label)
        header = ["method", "n", "e_mean", "e_min", "e_max", "seeds"]
        rows = [[rep.label, int(n), em, lo, hi, rep.seeds]
                for n, em, lo, hi in zip(rep.n, rep.e_mean, rep.e_min, rep.e_max)]
        configio.write_csv(os.path.join(outdir, fname), header, rows)
        written.append(fname)
    manifest = configio.timed_manifest(prefix, args.seed or 0, config_echo, written, t0)
    manifest.write(os.path.join(outdir, f"{prefix}.manifest.json"))
    return EXIT_OK


def cmd_fig1(args) -> int:
    t0 = time.monotonic()
    reports = fig1_reports(seed=args.seed or 0, full=args.full, seeds=args.seeds)
    echo = {"suite": "fig1", "full": args.full,
            "seeds": args.seeds, "methods": [r.label for r in reports]}
    return _write_mixing_reports(args, reports, "fig1", echo, t0)


def cmd_fig2(args) -> int:
    t0 = time.monotonic()
    reports = fig2_reports(seed=args.seed or 0, full=args.full, seeds=args.seeds)
    echo = {"suite": "fig2", "full": args.full,
            "seeds": args.seeds, "methods": [r.label for r in reports]}
    return _write_mixing_reports(args, reports, "fig2", echo, t0)


def cmd_diffusion_limit(args) -> int:
    t0 = time.monotonic()
    doc = _seeded(configio.load_config(args.config), args)
    cfg = configio.sampler_config_from_dict(doc)
    study = doc.get("study", {})
    deltas = study.get("deltas", [0.2, 0.1, 0.05, 0.025])
    t_final = float(study.get("t_final", 5.0))
    n_chains = int(study.get("chains_per_level", 2000))
    functionals = tuple(study.get("functionals", FUNCTIONALS))
    target = cfg.build_target()
    report = diffusion_limit_study(target, deltas, t_final, n_chains, cfg.seed,
                                   functionals=functionals,
                                   n_sde=study.get("sde_trajectories"),
                                   sde_dt=study.get("sde_dt"))
    header = ["delta", "functional", "chain_mean", "chain_se",
              "sde_mean", "sde_se", "gap", "combined_se", "converging"]
    rows = []
    for name in report.functionals:
        gaps = report.gap(name)
        cses = report.combined_se(name)
        for i, d in enumerate(report.deltas):
            if report.deltas.size < 2 or i == 0:
                conv = "n/a"
            else:
                conv = "yes" if abs(gaps[i]) <= abs(gaps[i - 1]) + 3 * (cses[i] + cses[i - 1]) \
                    else "no"
            rows.append([d, name, report.chain_mean[name][i], report.chain_se[name][i],
                         report.sde_mean[name], report.sde_se[name],
                         gaps[i], cses[i], conv])
    configio.write_csv(args.out, header, rows)
    manifest = configio.timed_manifest(
        "diffusion-limit", cfg.seed, configio.sampler_config_to_dict(cfg),
        [os.path.basename(args.out)], t0)
    manifest.write(configio.manifest_path(args.out))
    return EXIT_OK


def cmd_scaling(args) -> int:
    t0 = time.monotonic()
    doc = _seeded(configio.load_config(args.config), args)
    cfg = configio.sampler_config_from_dict(doc)
    study = doc.get("study", {})
    deltas = study.get("deltas", [0.2, 0.1, 0.05, 0.025])
    steps = int(study.get("steps_per_level", 10_000))
    target = cfg.build_target()
    report = acceptance_scaling_study(target, deltas, steps, cfg.seed,
                                      burn_in=study.get("burn_in"))
    header = ["delta", "mean_rejection", "stderr"]
    rows = [[d, m, s] for d, m, s in
            zip(report.deltas, report.mean_rejection, report.stderr)]
    rows.append(["slope", report.slope if report.slope is not None else "n/a",
                 report.slope_stderr if report.slope_stderr is not None else "n/a"])
    configio.write_csv(args.out, header, rows)
    manifest = configio.timed_manifest(
        "scaling", cfg.seed, configio.sampler_config_to_dict(cfg),
        [os.path.basename(args.out)], t0)
    manifest.write(configio.manifest_path(args.out))
    return EXIT_OK


def cmd_invariance(args) -> int:
    t0 = time.monotonic()
    doc = _seeded(configio.load_config(args.config), args)
    cfg = configio.sampler_config_from_dict(doc)
    study = doc.get("study", {})
    report = invariance_study(cfg, include_sde=bool(study.get("include_sde", True)),
                              sde_dt=float(study.get("sde_dt", 0.05)))
    header = ["mode", "lambda_sq", "chain_var", "chain_ratio", "sde_var", "sde_ratio"]
    rows = []
    for i in range(report.modes.size):
        rows.append([
            int(report.modes[i]), report.lambda_sq[i],
            report.chain_var[i], report.chain_ratio[i],
            report.sde_var[i] if report.sde_var is not None else "n/a",
            report.sde_ratio[i] if report.sde_ratio is not None else "n/a",
        ])
    configio.write_csv(args.out, header, rows)
    manifest = configio.timed_manifest(
        "invariance", cfg.seed, configio.sampler_config_to_dict(cfg),
        [os.path.basename(args.out)], t0)
    manifest.write(configio.manifest_path(args.out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solhmc",
        description="Function-space SOL-HMC sampling and its diagnostic studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, needs_config=True, out_is_dir=False):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("--config", required=True, help="TOML config (or manifest JSON)")
        p.add_argument("--out", required=True,
                       help="output directory" if out_is_dir else "output CSV path")
        p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed")
        p.add_argument("--seeds", type=int, default=None,
                       help="number of averaging seeds (figure commands)")
        p.add_argument("--full", action="store_true",
                       help="near paper-scale run instead of desk scale")
        p.set_defaults(func=func)
        return p

    add("sample", cmd_sample)
    add("fig1", cmd_fig1, needs_config=False, out_is_dir=True)
    add("fig2", cmd_fig2, needs_config=False, out_is_dir=True)
    add("diffusion-limit", cmd_diffusion_limit)
    add("scaling", cmd_scaling)
    add("invariance", cmd_invariance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print(f"solhmc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"solhmc: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FloatingPointError as exc:
        print(f"solhmc: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"solhmc: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
