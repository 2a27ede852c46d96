import numpy as np
import pytest

from solhmc import (IntegratorParams, SamplerConfig, ValidationError, bridge_prior,
                    e_of_n, interpolant, make_target, run_chain)
from solhmc.analysis import (ScalingReport, acceptance_scaling_study,
                             diffusion_limit_study, fit_loglog_slope,
                             invariance_study, mixing_curve, path_mean_abs,
                             running_mean_path)
from solhmc.sampler import ChainTrace
from conftest import mild_dw


def make_trace(snapshots_q, delta=0.5, n_modes=None, iterations=None, thinning=1):
    """Assemble a ChainTrace directly from given snapshot coefficients."""
    snapshots_q = np.asarray(snapshots_q, dtype=float)
    n_modes = snapshots_q.shape[1] if n_modes is None else n_modes
    iters = snapshots_q.shape[0] - 1 if iterations is None else iterations
    cfg = SamplerConfig(target_label="gaussian", n_modes=n_modes,
                        grid_size=4 * n_modes, interval_length=100.0,
                        integrator=IntegratorParams(step_size=delta, n_steps=1, delta=delta),
                        iterations=iters, seed=0, observables=(), thinning=thinning)
    return ChainTrace(
        config=cfg, seed=0,
        accepted=np.ones(iters, dtype=bool),
        delta_h=np.zeros(iters),
        n_steps=np.ones(iters, dtype=int),
        observables={},
        snapshot_steps=np.arange(snapshots_q.shape[0]),
        snapshots_q=snapshots_q,
        snapshots_v=np.zeros_like(snapshots_q),
    )


class TestEOfN:
    def test_constant_first_mode_path_closed_form(self):
        # all snapshots c * phi_1: E = c (2/pi) sqrt(2/T), checked by quadrature
        T, c, n_modes = 100.0, 2.5, 4
        target = make_target("gaussian", bridge_prior(T, n_modes), 1024)
        q = np.zeros(n_modes)
        q[0] = c
        trace = make_trace(np.tile(q, (6, 1)))
        rows = e_of_n(trace, target)
        closed_form = c * (2.0 / np.pi) * np.sqrt(2.0 / T)
        grid_oracle = path_mean_abs(target.prior, q, 1024)
        assert grid_oracle == pytest.approx(closed_form, rel=1e-4)
        for _, e in rows:
            assert e == pytest.approx(grid_oracle, rel=1e-12)

    def test_symmetric_pairs_cancel(self):
        q = np.array([1.0, -0.5, 0.25, 0.0])
        snaps = np.stack([np.zeros(4), q, -q, q, -q])
        target = make_target("gaussian", bridge_prior(10.0, 4), 64)
        rows = dict(e_of_n(make_trace(snaps), target))
        assert rows[2] == pytest.approx(0.0, abs=1e-15)
        assert rows[4] == pytest.approx(0.0, abs=1e-15)
        assert rows[1] > 0

    def test_single_zero_snapshot(self):
        target = make_target("gaussian", bridge_prior(10.0, 4), 64)
        rows = e_of_n(make_trace(np.zeros((2, 4))), target)
        assert rows == [(1, 0.0)]

    def test_empty_trace_rejected(self):
        target = make_target("gaussian", bridge_prior(10.0, 4), 64)
        with pytest.raises(ValidationError):
            e_of_n(make_trace(np.zeros((1, 4)), iterations=0), target)

    def test_work_axis_uses_integrator_steps(self):
        target = make_target("gaussian", bridge_prior(10.0, 4), 64)
        trace = make_trace(np.zeros((4, 4)))
        trace.n_steps = np.array([5, 5, 5])
        rows = e_of_n(trace, target)
        assert [n for n, _ in rows] == [5, 10, 15]

    def test_iid_reference_sequence_decays_like_sqrt(self):
        # mean of k iid reference draws has coefficients ~ lambda/sqrt(k)
        rng = np.random.default_rng(31)
        prior = bridge_prior(100.0, 32)
        target = make_target("gaussian", prior, 128)
        n = 1000
        snaps = np.vstack([np.zeros((1, 32)), prior.sample(rng, size=n)])
        rows = e_of_n(make_trace(snaps), target,
                      schedule=np.unique(np.geomspace(10, n, 30).astype(int)))
        ns = np.array([r[0] for r in rows], dtype=float)
        es = np.array([r[1] for r in rows])
        slope, _ = fit_loglog_slope(ns, es)
        assert slope == pytest.approx(-0.5, abs=0.15)

    def test_burn_in_changes_average_window(self):
        q = np.array([1.0, 0.0])
        snaps = np.stack([np.zeros(2), q, np.zeros(2), np.zeros(2)])
        target = make_target("gaussian", bridge_prior(10.0, 2), 32)
        with_burn = dict(e_of_n(make_trace(snaps), target, burn_in=1))
        without = dict(e_of_n(make_trace(snaps), target))
        assert with_burn[3] == pytest.approx(0.0, abs=1e-15)
        assert without[3] > 0


class TestRunningMean:
    def test_mean_over_snapshots(self):
        q = np.array([2.0, 0.0, 0.0, 0.0])
        snaps = np.stack([np.zeros(4), q, np.zeros(4)])
        target = make_target("gaussian", bridge_prior(10.0, 4), 64)
        tau, qbar = running_mean_path(make_trace(snaps), target)
        expected = target.prior.synthesize(q / 2.0, 64)
        assert np.allclose(qbar, expected, rtol=1e-14)
        assert tau.shape == (63,)


class TestInterpolant:
    def test_knots_are_exact(self):
        snaps = np.arange(12.0).reshape(4, 3)
        trace = make_trace(snaps, delta=0.5)
        for k in range(4):
            x = interpolant(trace, 0.5 * k)
            assert np.array_equal(x.q, snaps[k])

    def test_midpoint_is_mean(self):
        snaps = np.arange(6.0).reshape(2, 3)
        trace = make_trace(snaps, delta=0.5)
        x = interpolant(trace, 0.25)
        assert np.allclose(x.q, snaps.mean(axis=0), rtol=1e-15)

    def test_affine_between_knots(self):
        snaps = np.array([[0.0, 1.0], [2.0, -1.0], [4.0, 3.0]])
        trace = make_trace(snaps, delta=1.0)
        for t0 in (0.2, 0.5, 0.8):
            a = interpolant(trace, t0).q
            b = interpolant(trace, 0.0).q * (1 - t0) + interpolant(trace, 1.0).q * t0
            assert np.allclose(a, b, rtol=1e-12)

    def test_out_of_range(self):
        trace = make_trace(np.zeros((3, 2)), delta=0.5)
        with pytest.raises(ValidationError):
            interpolant(trace, 1.5)

    def test_requires_one_step_regime(self):
        cfgsnaps = np.zeros((3, 2))
        trace = make_trace(cfgsnaps, delta=0.5)
        object.__setattr__(trace.config.integrator, "n_steps", 3)
        with pytest.raises(ValidationError):
            interpolant(trace, 0.1)


class TestScalingStudy:
    def test_gaussian_target_never_rejects(self):
        target = make_target("gaussian", bridge_prior(10.0, 8), 32)
        report = acceptance_scaling_study(target, [0.2, 0.1], 500, rng_seed=1,
                                          n_chains=4)
        assert np.all(report.mean_rejection == 0.0)
        assert report.slope is None

    def test_single_point_ladder_has_no_slope(self):
        target = mild_dw(8)
        report = acceptance_scaling_study(target, [0.1], 400, rng_seed=1, n_chains=4)
        assert report.slope is None
        assert report.mean_rejection.shape == (1,)
        assert report.mean_rejection[0] > 0

    def test_rejection_drops_at_least_quadratically(self):
        # the bound is delta^2; the measured rate for this integrator is
        # steeper (about cubic), so halving delta cuts rejection by >= 2.8x
        target = mild_dw(16)
        report = acceptance_scaling_study(target, [0.2, 0.1], 4000, rng_seed=3)
        assert report.mean_rejection[1] <= report.mean_rejection[0] / 2.8
        assert report.mean_rejection[0] <= 1.0


class TestDiffusionStudy:
    def test_zero_chains_rejected(self):
        target = mild_dw(4)
        with pytest.raises(ValidationError):
            diffusion_limit_study(target, [0.1], 1.0, 0, rng_seed=1)

    def test_gaussian_target_matches_reference_at_every_delta(self):
        prior = bridge_prior(10.0, 8)
        target = make_target("gaussian", prior, 32)
        report = diffusion_limit_study(target, [0.4, 0.2], 2.0, 600, rng_seed=5,
                                       n_sde=1200, sde_dt=0.02)
        for name in report.functionals:
            gaps = np.abs(report.gap(name))
            assert np.all(gaps <= 3.5 * report.combined_se(name))

    def test_report_helpers(self):
        target = mild_dw(4)
        report = diffusion_limit_study(target, [0.2, 0.1], 1.0, 200, rng_seed=2,
                                       n_sde=400, sde_dt=0.02)
        for name in report.functionals:
            assert isinstance(report.nonincreasing_within(name), bool)
            assert isinstance(report.finest_within(name), bool)

    def test_double_well_first_mode_mean_is_sign_symmetric(self):
        # the target is invariant under q -> -q, so E<q, e_1> = 0 at every delta
        target = mild_dw(16)
        report = diffusion_limit_study(target, [0.2, 0.1, 0.05], 2.0, 1500,
                                       rng_seed=9, n_sde=100, sde_dt=0.05)
        assert np.all(np.abs(report.chain_mean["q1"]) <= 3 * report.chain_se["q1"])


class TestInvarianceStudy:
    def test_gaussian_chain_and_sde_match_reference_variances(self):
        cfg = SamplerConfig(target_label="gaussian", n_modes=6, grid_size=24,
                            interval_length=10.0,
                            integrator=IntegratorParams(step_size=0.3, n_steps=1, iota=0.5),
                            iterations=40_000, seed=3, observables=())
        report = invariance_study(cfg, sde_dt=0.05)
        assert report.within(0.06, n_modes=6)


class TestMixingCurve:
    def test_rows_monotone_in_work_and_start_at_zero(self):
        cfg = SamplerConfig(target_label="double-well", n_modes=8, grid_size=32,
                            interval_length=1.0,
                            integrator=IntegratorParams(step_size=0.2, n_steps=3, iota=0.7),
                            iterations=1, seed=5, observables=())
        rep = mixing_curve(cfg, n_total=300, seeds=4, label="x")
        assert rep.n[0] == 0
        assert np.all(np.diff(rep.n) > 0)
        assert rep.n[-1] == 300
        assert np.all(rep.e_min <= rep.e_mean + 1e-15)
        assert np.all(rep.e_mean <= rep.e_max + 1e-15)
        assert 0.0 <= rep.acceptance_rate <= 1.0
