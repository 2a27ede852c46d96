"""Mixing-curve experiment suites on the double-well bridge target.

Two method line-ups:

  * suite one compares MALA, HMC (50 steps of size 0.02, so tau = 1) and the
    one-step small-delta samplers at velocity-mixing levels iota = 0.9, 0.99
    and 0.999 (delta = h pinned by iota);
  * suite two compares HMC against partial-refresh sampling at
    iota = 2^{-1/2} with 10, 25, 50 and uniformly random 25..75 integrator
    steps per proposal, all at step size 0.02.

Desk-scale notes.  Suite two runs on the flagship interval (0, 100).  For
suite one the iota ladder pins delta = h at 0.83, 1.96 and 3.11, while the
splitting integrator's nonlinear kick is only stable for
h < pi / interval_length on this target; at interval 100 those chains reject
essentially every proposal and freeze.  The desk default therefore runs
suite one on the interval (0, 15), where iota = 0.9 lands in the partially
rejecting regime that separates the methods: HMC mixes best, the iota ladder
sits between, MALA (same step size as HMC, one step per proposal) is
slowest.  ``full=True`` switches suite one to the interval (0, 100) ladder
regardless.

Chains start from a warm state prepared by relaxing the SDE reference for a
fixed time; all methods share the same per-seed warm states so their curves
are comparable, including the n = 0 row.
"""

from __future__ import annotations

import numpy as np

from .sampler import SamplerConfig, preset
from .analysis import MixingReport, mixing_curve
from .integrators import IntegratorParams, iota_to_delta
from . import sde as sde_mod

DESK_FIG1 = dict(interval_length=15.0, n_modes=128, grid_size=512,
                 seeds=8, n_total=20_000, h_mala=0.02, h_hmc=0.02)
FULL_FIG1 = dict(interval_length=100.0, n_modes=128, grid_size=512,
                 seeds=8, n_total=100_000, h_mala=0.02, h_hmc=0.02)
DESK_FIG2 = dict(interval_length=100.0, n_modes=128, grid_size=512,
                 seeds=8, n_total=20_000, h=0.02)
FULL_FIG2 = dict(interval_length=100.0, n_modes=128, grid_size=512,
                 seeds=8, n_total=100_000, h=0.02)

WARM_TIME = 30.0
WARM_DT = 0.005


def warm_start(config: SamplerConfig, seeds: int, seed_seq) -> tuple:
    """Relax the SDE reference to near-stationarity, one state per seed.

    Starts from the zero path with reference-draw velocities; the zero path
    has zero potential force, so the relaxation is stable at small dt even
    on stiff intervals where prior draws would be rejected forever.
    """
    target = config.build_target()
    rng = np.random.default_rng(seed_seq)
    Q = np.zeros((seeds, config.n_modes))
    V = target.prior.sample(rng, size=seeds)
    params = sde_mod.SdeParams(dt=WARM_DT, t_final=WARM_TIME, gamma1=0.0, gamma2=1.0)
    return sde_mod.run_ensemble(target, params, seeds, rng, initial=(Q, V))


def _curves(methods, seed, seeds, n_total) -> list[MixingReport]:
    root = np.random.SeedSequence(seed)
    warm_ss, *method_ss = root.spawn(len(methods) + 1)
    first_cfg = methods[0][1]
    init = warm_start(first_cfg, seeds, warm_ss)
    reports = []
    for (label, cfg), ss in zip(methods, method_ss):
        reports.append(mixing_curve(cfg, n_total, seeds, label, initial=init, seed=ss))
    return reports


def fig1_reports(seed: int = 0, full: bool = False, seeds: int | None = None,
                 n_total: int | None = None) -> list[MixingReport]:
    p = dict(FULL_FIG1 if full else DESK_FIG1)
    seeds = p["seeds"] if seeds is None else seeds
    n_total = p["n_total"] if n_total is None else n_total
    common = dict(target_label="double-well", n_modes=p["n_modes"],
                  grid_size=p["grid_size"], interval_length=p["interval_length"])
    methods = [
        ("mala", preset("mala", step_size=p["h_mala"], **common)),
        ("hmc", preset("hmc", step_size=p["h_hmc"], **common)),
    ]
    for iota in (0.9, 0.99, 0.999):
        delta = iota_to_delta(iota)
        integ = IntegratorParams(step_size=delta, n_steps=1, iota=iota)
        methods.append((f"sol-hmc iota={iota}", SamplerConfig(integrator=integ, **common)))
    return _curves(methods, seed, seeds, n_total)


def fig2_reports(seed: int = 0, full: bool = False, seeds: int | None = None,
                 n_total: int | None = None) -> list[MixingReport]:
    p = dict(FULL_FIG2 if full else DESK_FIG2)
    seeds = p["seeds"] if seeds is None else seeds
    n_total = p["n_total"] if n_total is None else n_total
    h = p["h"]
    common = dict(target_label="double-well", n_modes=p["n_modes"],
                  grid_size=p["grid_size"], interval_length=p["interval_length"])
    iota = 2.0 ** -0.5
    methods = [("hmc", preset("hmc", step_size=h, **common))]
    for nd in (10, 25, 50):
        methods.append((f"sol-hmc nd={nd}",
                        preset("sol-hmc", step_size=h, n_steps=nd, iota=iota, **common)))
    methods.append(("sol-hmc nd=25-75",
                    preset("sol-hmc", step_size=h, n_steps=50, iota=iota,
                           n_steps_range=(25, 75), **common)))
    return _curves(methods, seed, seeds, n_total)
