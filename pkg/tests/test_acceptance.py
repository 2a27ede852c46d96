"""Acceptance suite: one test per exit criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines; the whole suite is seeded and deterministic.  Desk-scale settings are
sized for a laptop-class machine; see README for the near paper-scale runs.
"""

import time

import numpy as np
import pytest

from solhmc import (ChainEnsemble, IntegratorParams, PhasePoint, SamplerConfig,
                    bridge_prior, flow_jacobian_det, hamiltonian, integrate,
                    make_target, split_step)
from solhmc.analysis import (acceptance_scaling_study, diffusion_limit_study,
                             fit_loglog_slope, invariance_study)
from solhmc.experiments import fig1_reports, fig2_reports


def verdict(number, label, ok, elapsed, detail=""):
    status = "PASS" if ok else "FAIL"
    extra = f"  [{detail}]" if detail else ""
    print(f"\nACCEPTANCE {number} ({label}): {status} in {elapsed:.1f}s{extra}")
    assert ok, f"criterion {number} ({label}) failed: {detail}"


def test_criterion_1_gaussian_exactness():
    t0 = time.monotonic()
    cfg = SamplerConfig(target_label="gaussian", n_modes=128, grid_size=512,
                        interval_length=100.0,
                        integrator=IntegratorParams(step_size=0.2, n_steps=1, iota=0.5),
                        iterations=1, seed=2024, observables=())
    ens = ChainEnsemble(cfg, n_chains=1, record=False)
    steps = 100_000
    max_abs_dh = 0.0
    all_accepted = True
    for _ in range(steps):
        accepted, dh = ens.step()
        all_accepted &= bool(accepted[0])
        max_abs_dh = max(max_abs_dh, abs(float(dh[0])))
    elapsed = time.monotonic() - t0
    ok = all_accepted and max_abs_dh < 1e-10 and elapsed < 30.0
    verdict(1, "gaussian exactness", ok, elapsed,
            f"max |dH| = {max_abs_dh:.2e}, all accepted = {all_accepted}")


def test_criterion_2_reference_invariance():
    t0 = time.monotonic()
    cfg = SamplerConfig(target_label="gaussian", n_modes=128, grid_size=512,
                        interval_length=100.0,
                        integrator=IntegratorParams(step_size=0.15, n_steps=1, iota=0.5),
                        iterations=200_000, seed=7, observables=())
    report = invariance_study(cfg, sde_dt=0.05)
    elapsed = time.monotonic() - t0
    chain_dev = np.abs(report.chain_ratio[:10] - 1.0).max()
    sde_dev = np.abs(report.sde_ratio[:10] - 1.0).max()
    ok = chain_dev <= 0.05 and sde_dev <= 0.05 and elapsed < 240.0
    verdict(2, "reference-measure invariance", ok, elapsed,
            f"max ratio deviation: chain {chain_dev:.3f}, sde {sde_dev:.3f}")


def test_criterion_3_integrator_contracts():
    t0 = time.monotonic()
    rng = np.random.default_rng(10)
    checks = {}

    target32 = make_target("double-well", bridge_prior(2.0, 32), 128)
    x = PhasePoint(target32.prior.sample(rng), target32.prior.sample(rng))
    y, _ = integrate(x, target32, 0.05, 40)
    back, _ = integrate(PhasePoint(y.q, -y.v), target32, 0.05, 40)
    checks["reversibility"] = max(np.abs(back.q - x.q).max(),
                                  np.abs(back.v + x.v).max()) < 1e-10

    target4 = make_target("double-well", bridge_prior(2.0, 4), 16)
    x4 = PhasePoint(target4.prior.sample(rng), target4.prior.sample(rng))
    det = flow_jacobian_det(x4, target4, 0.1, 5)
    checks["jacobian"] = abs(det - 1.0) <= 1e-5

    dh_err = 0.0
    for _ in range(5):
        xs = PhasePoint(target32.prior.sample(rng), target32.prior.sample(rng))
        ys, dh = integrate(xs, target32, 0.02, 50)
        direct = hamiltonian(xs, target32) - hamiltonian(ys, target32)
        dh_err = max(dh_err, abs(dh - direct))
    checks["energy bookkeeping"] = dh_err < 1e-8

    q = target32.prior.sample(rng)
    v = target32.prior.sample(rng)
    h = 0.21
    y1, _ = split_step(PhasePoint(q, v), target32, h)
    cg_q = target32.cov_grad_psi(q)
    q_star = np.cos(h) * q + np.sin(h) * v - 0.5 * h * np.sin(h) * cg_q
    v_star = (-np.sin(h) * q + np.cos(h) * v - 0.5 * h * np.cos(h) * cg_q
              - 0.5 * h * target32.cov_grad_psi(q_star))
    rel = max(np.abs(y1.q - q_star).max() / np.abs(q_star).max(),
              np.abs(y1.v - v_star).max() / np.abs(v_star).max())
    checks["closed-form proposal"] = rel < 1e-12

    elapsed = time.monotonic() - t0
    ok = all(checks.values()) and elapsed < 60.0
    verdict(3, "integrator contracts", ok, elapsed,
            ", ".join(f"{k}={'ok' if v else 'BAD'}" for k, v in checks.items()))


def test_criterion_4_energy_error_order():
    t0 = time.monotonic()
    target = make_target("double-well", bridge_prior(1.0, 64), 256)
    rng = np.random.default_rng(3)
    x = PhasePoint(target.prior.sample(rng), target.prior.sample(rng))
    hs = np.array([1 / 10, 1 / 20, 1 / 40, 1 / 80])
    errs = np.array([abs(integrate(x, target, h, round(1 / h))[1]) for h in hs])
    slope, _ = fit_loglog_slope(hs, errs)
    elapsed = time.monotonic() - t0
    ok = abs(slope - 2.0) <= 0.2 and elapsed < 60.0
    verdict(4, "energy-error order", ok, elapsed, f"slope = {slope:.3f}")


def test_criterion_5_acceptance_scaling():
    t0 = time.monotonic()
    target = make_target("double-well", bridge_prior(1.0, 64), 256)
    report = acceptance_scaling_study(target, [0.2, 0.1, 0.05, 0.025],
                                      steps_per_level=10_000, rng_seed=11)
    elapsed = time.monotonic() - t0
    ok = report.slope is not None and report.slope >= 1.8 and elapsed < 300.0
    rej = ", ".join(f"{d:g}:{m:.2e}" for d, m in
                    zip(report.deltas, report.mean_rejection))
    verdict(5, "acceptance scaling", ok, elapsed,
            f"slope = {report.slope:.2f}; E[1-alpha] {rej}")


def test_criterion_6_diffusion_limit():
    t0 = time.monotonic()
    target = make_target("double-well", bridge_prior(1.0, 32), 128)
    report = diffusion_limit_study(target, [0.2, 0.1, 0.05, 0.025], t_final=5.0,
                                   n_chains=2000, rng_seed=20, n_sde=4000)
    elapsed = time.monotonic() - t0
    details = []
    ok = True
    for name in report.functionals:
        mono = report.nonincreasing_within(name, 3.0)
        fine = report.finest_within(name, 3.0)
        ok = ok and mono and fine
        z = abs(report.gap(name)[-1]) / report.combined_se(name)[-1]
        details.append(f"{name}: mono={'y' if mono else 'N'} finest={z:.1f}se")
    ok = ok and elapsed < 900.0
    verdict(6, "diffusion limit", ok, elapsed, "; ".join(details))


def test_criterion_7_mixing_suite_one():
    t0 = time.monotonic()
    reports = {r.label: r for r in fig1_reports(seed=0)}
    elapsed = time.monotonic() - t0
    decreasing = {}
    for label, rep in reports.items():
        k = max(1, len(rep.e_mean) // 4)
        decreasing[label] = rep.e_mean[-k:].mean() < rep.e_mean[1:1 + k].mean()
    hmc = reports["hmc"].final_half_mean()
    sol9 = reports["sol-hmc iota=0.9"].final_half_mean()
    mala = reports["mala"].final_half_mean()
    ordered = hmc <= sol9 <= mala
    ok = all(decreasing.values()) and ordered and elapsed < 600.0
    verdict(7, "mixing suite one", ok, elapsed,
            f"final-half means hmc={hmc:.4f} <= sol(0.9)={sol9:.4f} <= mala={mala:.4f}; "
            f"decreasing={decreasing}")


def test_criterion_8_mixing_suite_two():
    t0 = time.monotonic()
    reports = {r.label: r for r in fig2_reports(seed=0)}
    elapsed = time.monotonic() - t0
    e0 = reports["hmc"].e_mean[0]
    level = 0.1 * e0
    crossings = {label: rep.first_crossing(level) for label, rep in reports.items()}
    hmc_cross = crossings["hmc"]
    ok = hmc_cross is not None
    for nd in (25, 50):
        c = crossings[f"sol-hmc nd={nd}"]
        ok = ok and c is not None and c < hmc_cross
    ok = ok and elapsed < 600.0
    verdict(8, "mixing suite two", ok, elapsed,
            f"0.1*E(0)={level:.4f}; crossings {crossings}")


def test_criterion_9_gradient_and_lipschitz():
    t0 = time.monotonic()
    target = make_target("double-well", bridge_prior(100.0, 32), 128)
    rng = np.random.default_rng(17)
    eps = 1e-5
    grad_ok = True
    worst = 0.0
    for _ in range(100):
        q = target.prior.sample(rng) * 0.3
        h = rng.standard_normal(32)
        h /= np.linalg.norm(h)
        fd = (target.psi(q + eps * h) - target.psi(q - eps * h)) / (2 * eps)
        err = abs(fd - float(np.dot(target.grad_psi(q), h)))
        rel = err / (1.0 + abs(target.psi(q)))
        worst = max(worst, rel)
        grad_ok &= rel <= 1e-6

    def ratios(n_pairs, gen):
        out = np.empty(n_pairs)
        for i in range(n_pairs):
            x = gen.standard_normal(32)
            x *= 5.0 * gen.random() / np.linalg.norm(x)
            y = gen.standard_normal(32)
            y *= 5.0 * gen.random() / np.linalg.norm(y)
            num = np.linalg.norm(target.force(x) - target.force(y))
            out[i] = num / np.linalg.norm(x - y)
        return out

    r1 = ratios(1000, np.random.default_rng(5))
    r2 = ratios(2000, np.random.default_rng(5))
    lip_ok = np.isfinite(r1).all() and r1.max() < 1e5 and r2.max() <= 1.3 * r1.max()
    elapsed = time.monotonic() - t0
    ok = grad_ok and lip_ok and elapsed < 30.0
    verdict(9, "gradient and lipschitz suites", ok, elapsed,
            f"worst fd deviation {worst:.1e}; ratio max {r1.max():.1f} "
            f"(stable: {r2.max() <= 1.3 * r1.max()})")
