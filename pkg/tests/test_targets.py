import numpy as np
import pytest

from solhmc import ValidationError, bridge_prior, make_target
from solhmc.targets import DoubleWellPotential


class TestPsi:
    def test_zero_path_value(self):
        # constant integrand V(0) = 1 over (0, 100): psi = 100/2 exactly
        target = make_target("double-well", bridge_prior(100.0, 8), 64)
        assert target.psi(np.zeros(8)) == pytest.approx(50.0, rel=1e-14)

    def test_zero_functional(self, small_gauss, rng):
        q = small_gauss.prior.sample(rng)
        assert small_gauss.psi(q) == 0.0
        assert np.array_equal(small_gauss.grad_psi(q), np.zeros(8))

    def test_quadrature_refinement(self, rng):
        prior = bridge_prior(100.0, 64)
        coarse = make_target("double-well", prior, 512)
        fine = make_target("double-well", prior, 1024)
        q = prior.sample(rng) * 0.1  # modest amplitude keeps V smooth on the grid
        a, b = coarse.psi(q), fine.psi(q)
        assert abs(a - b) <= 1e-4 * abs(b)

    def test_batched_evaluation(self, small_dw, rng):
        Q = small_dw.prior.sample(rng, size=5)
        psis = small_dw.psi(Q)
        assert psis.shape == (5,)
        for i in range(5):
            assert psis[i] == pytest.approx(small_dw.psi(Q[i]), rel=1e-14)


class TestGradient:
    def test_double_well_critical_point_at_zero(self, small_dw):
        # V'(0) = 0, so the zero path is a critical point
        assert np.allclose(small_dw.grad_psi(np.zeros(8)), 0.0, atol=1e-15)

    def test_finite_difference_agreement(self, rng):
        target = make_target("double-well", bridge_prior(100.0, 32), 128)
        eps = 1e-5
        for _ in range(100):
            q = target.prior.sample(rng) * 0.3
            h = rng.standard_normal(32)
            h /= np.linalg.norm(h)
            fd = (target.psi(q + eps * h) - target.psi(q - eps * h)) / (2 * eps)
            pairing = float(np.dot(target.grad_psi(q), h))
            assert abs(fd - pairing) <= 1e-6 * (1.0 + abs(target.psi(q)))

    def test_symmetry_exact(self, small_dw, rng):
        q = small_dw.prior.sample(rng)
        assert small_dw.psi(-q) == small_dw.psi(q)
        assert np.array_equal(small_dw.grad_psi(-q), -small_dw.grad_psi(q))


class TestForce:
    def test_zero_functional_force_is_identity(self, small_gauss, rng):
        q = small_gauss.prior.sample(rng)
        assert np.array_equal(small_gauss.force(q), q)

    def test_cov_grad_zero_at_origin(self, small_dw):
        assert np.allclose(small_dw.cov_grad_psi(np.zeros(8)), 0.0, atol=1e-15)

    def test_sampled_lipschitz_ratio_bounded_and_stable(self, rng):
        target = make_target("double-well", bridge_prior(100.0, 32), 128)
        prior = target.prior

        def ratios(n_pairs, gen):
            out = np.empty(n_pairs)
            for i in range(n_pairs):
                x = gen.standard_normal(32)
                x *= 5.0 * gen.random() / np.linalg.norm(x)
                y = gen.standard_normal(32)
                y *= 5.0 * gen.random() / np.linalg.norm(y)
                num = prior.sobolev_norm(target.force(x) - target.force(y), 0.0)
                den = prior.sobolev_norm(x - y, 0.0)
                out[i] = num / den
            return out

        r1 = ratios(1000, np.random.default_rng(7))
        r2 = ratios(2000, np.random.default_rng(7))
        assert np.isfinite(r1).all()
        # the bound exists (operator norm of I + C d2Psi on the ball) ...
        assert r1.max() < 1e5
        # ... and is stable under doubling the sample
        assert r2.max() <= 1.3 * r1.max()

    def test_cov_grad_tail_small_for_smooth_paths(self, rng):
        target = make_target("double-well", bridge_prior(100.0, 64), 256)
        q = np.zeros(64)
        q[:8] = target.prior.eigenvalues[:8] * rng.standard_normal(8)
        cg = target.cov_grad_psi(q)
        tail = np.sum(cg[32:] ** 2)
        assert tail < 0.01 * np.sum(cg ** 2)


class TestRegistry:
    def test_unknown_label(self):
        with pytest.raises(ValidationError):
            make_target("cubic", bridge_prior(1.0, 4), 16)

    def test_grid_guard(self):
        with pytest.raises(ValidationError):
            make_target("double-well", bridge_prior(1.0, 8), 15)

    def test_double_well_derivative_consistency(self):
        pot = DoubleWellPotential()
        u = np.linspace(-2, 2, 41)
        eps = 1e-6
        fd = (pot.v(u + eps) - pot.v(u - eps)) / (2 * eps)
        assert np.allclose(fd, pot.dv(u), atol=1e-7)
