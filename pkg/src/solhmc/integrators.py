"""Flow maps for the extended-phase-space dynamics and their composition.

Three exactly solvable pieces:

  * ``ou_step``  -- exact Ornstein-Uhlenbeck refresh of the velocity,
    v' = e^{-delta Gamma_2} v + xi,  xi ~ N(0, C(I - e^{-2 delta Gamma_2}));
  * ``kick``     -- v <- v - t C grad_psi(q), position frozen;
  * ``rotate``   -- componentwise rotation of (q, v) by angle t, the exact
    flow of the Gaussian part of the Hamiltonian.

``split_step`` composes kick(h/2) . rotate(h) . kick(h/2): a volume
preserving, time reversible, second order map that is exact when psi == 0.
Its energy change is accumulated analytically, mode sums only, so the
accept/reject rule never forms the (nearly cancelling) full Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import PhasePoint, SpectralPrior, ValidationError
from .targets import TargetModel


def iota_to_delta(iota: float) -> float:
    """OU time delta with Gamma_2 = I: e^{-2 delta} = 1 - iota^2."""
    if not 0.0 <= iota <= 1.0:
        raise ValidationError(f"iota must lie in [0, 1], got {iota}")
    if iota == 1.0:
        return math.inf
    return -0.5 * math.log1p(-iota * iota)


def delta_to_iota(delta: float) -> float:
    if delta < 0:
        raise ValidationError(f"delta must be nonnegative, got {delta}")
    return math.sqrt(-math.expm1(-2.0 * delta))


@dataclass(frozen=True)
class IntegratorParams:
    """Proposal parameters: OU time, leap step, step count, friction.

    Exactly one of ``delta`` and ``iota`` must be given.  ``iota`` is only
    meaningful for Gamma_2 = I, where e^{-2 delta} = 1 - iota^2; iota = 1
    (delta = inf) is a full velocity refresh, iota = 0 no refresh.
    ``gamma2`` is the diagonal of Gamma_2 in the eigenbasis; None means the
    identity.
    """

    step_size: float
    n_steps: int
    delta: float | None = None
    iota: float | None = None
    gamma2: np.ndarray | None = None

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValidationError(f"step_size must be positive, got {self.step_size}")
        if self.n_steps < 1:
            raise ValidationError(f"n_steps must be >= 1, got {self.n_steps}")
        if (self.delta is None) == (self.iota is None):
            raise ValidationError("exactly one of delta and iota must be supplied")
        if self.gamma2 is not None:
            g2 = np.asarray(self.gamma2, dtype=float)
            object.__setattr__(self, "gamma2", g2)
            if not np.all(np.isfinite(g2)) or not np.all(g2 > 0):
                raise ValidationError("gamma2 entries must be positive and finite")
        if self.iota is not None:
            if self.gamma2 is not None and not np.allclose(self.gamma2, 1.0):
                raise ValidationError("iota parametrization requires Gamma_2 = I")
            object.__setattr__(self, "delta", iota_to_delta(self.iota))
        else:
            if self.delta < 0:
                raise ValidationError(f"delta must be nonnegative, got {self.delta}")
            if self.gamma2 is None:
                object.__setattr__(self, "iota", delta_to_iota(self.delta))

    @property
    def tau(self) -> float:
        """Total deterministic integration time per proposal."""
        return self.n_steps * self.step_size

    def ou_coefficients(self, prior: SpectralPrior):
        """Per-mode decay e^{-delta gamma_j} and noise scale lambda_j sqrt(1 - e^{-2 delta gamma_j})."""
        g2 = np.ones(prior.n_modes) if self.gamma2 is None else self.gamma2
        if g2.shape != (prior.n_modes,):
            raise ValidationError("gamma2 length does not match the prior truncation")
        decay = np.exp(-self.delta * g2)
        scale = prior.eigenvalues * np.sqrt(np.maximum(-np.expm1(-2.0 * self.delta * g2), 0.0))
        return decay, scale


def ou_step(x: PhasePoint, prior: SpectralPrior, params: IntegratorParams, rng) -> PhasePoint:
    """Exact OU evolution of the velocity over time delta; q unchanged."""
    decay, scale = params.ou_coefficients(prior)
    v = decay * x.v + scale * rng.standard_normal(x.v.shape)
    return PhasePoint(x.q, v)


def kick(x: PhasePoint, target: TargetModel, t: float) -> PhasePoint:
    """v <- v - t C grad_psi(q); exact flow of the nonlinear split piece."""
    return PhasePoint(x.q, x.v - t * target.cov_grad_psi(x.q))


def rotate(x: PhasePoint, t: float) -> PhasePoint:
    """Componentwise rotation (q, v) -> (q cos t + v sin t, -q sin t + v cos t)."""
    c, s = math.cos(t), math.sin(t)
    return PhasePoint(c * x.q + s * x.v, -s * x.q + c * x.v)


def _integrate_batch(target: TargetModel, Q, V, h: float, n_steps: int,
                     psi0=None, grad0=None):
    """Compose the split step n_steps times on batched states.

    Returns (Q*, V*, dH, psi*, grad*) where dH is the telescoped analytic
    energy change H(input) - H(output), accumulated per step as

        dH_step = psi - psi* + (h/2) (<grad, v> + <grad*, v*>)
                  + (h^2/8) (|C^{1/2} grad*|^2 - |C^{1/2} grad|^2)

    with (psi, grad) at the step input and starred quantities at its output.
    The endpoint evaluation of each step is reused as the next step's input,
    so n_steps cost n_steps + 1 gradient evaluations.
    """
    lam2 = target.prior.eigenvalues ** 2
    c, s = math.cos(h), math.sin(h)
    if psi0 is None or grad0 is None:
        psi0, grad0 = target.psi_and_grad(Q)
    psi, grad = psi0, grad0
    dH = np.zeros(Q.shape[:-1])
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_steps):
            pair_in = np.sum(grad * V, axis=-1)
            half_sq_in = np.sum(lam2 * grad * grad, axis=-1)
            V1 = V - (0.5 * h) * (lam2 * grad)
            Qn = c * Q + s * V1
            Vt = -s * Q + c * V1
            psin, gradn = target.psi_and_grad(Qn)
            Vn = Vt - (0.5 * h) * (lam2 * gradn)
            pair_out = np.sum(gradn * Vn, axis=-1)
            half_sq_out = np.sum(lam2 * gradn * gradn, axis=-1)
            dH = dH + (psi - psin) + (0.5 * h) * (pair_in + pair_out) \
                + (h * h / 8.0) * (half_sq_out - half_sq_in)
            Q, V, psi, grad = Qn, Vn, psin, gradn
    return Q, V, dH, psi, grad


def split_step(x: PhasePoint, target: TargetModel, h: float):
    """One step of kick(h/2) . rotate(h) . kick(h/2).

    Returns the new phase point and the analytic energy change
    H(input) - H(output) of this step.
    """
    if not h > 0:
        raise ValidationError(f"step size must be positive, got {h}")
    Q, V, dH, _, _ = _integrate_batch(target, x.q[None, :], x.v[None, :], h, 1)
    return PhasePoint(Q[0], V[0]), float(dH[0])


def integrate(x: PhasePoint, target: TargetModel, h: float, n_steps: int):
    """Compose ``split_step`` n_steps times; energy changes telescope.

    The summed per-step changes equal H(start) - H(end) analytically, but
    avoid the catastrophic cancellation of subtracting two O(N) Hamiltonians.
    """
    if n_steps < 1:
        raise ValidationError(f"n_steps must be >= 1, got {n_steps}")
    Q, V, dH, _, _ = _integrate_batch(target, x.q[None, :], x.v[None, :], h, n_steps)
    return PhasePoint(Q[0], V[0]), float(dH[0])


def hamiltonian(x: PhasePoint, target: TargetModel) -> float:
    """Direct finite-N Hamiltonian: test oracle only.

    1/2 |q|_C^2 + 1/2 |v|_C^2 + psi(q).  The quadratic terms grow like the
    truncation, so differences of this quantity lose precision at large N;
    keep N modest (tests use N <= 256) when comparing against telescoped
    energy changes.
    """
    lam2 = target.prior.eigenvalues ** 2
    quad = 0.5 * np.sum(x.q ** 2 / lam2) + 0.5 * np.sum(x.v ** 2 / lam2)
    return float(quad + target.psi(x.q))


def flow_jacobian_det(x: PhasePoint, target: TargetModel, h: float, n_steps: int,
                      fd_step: float = 1e-6) -> float:
    """Central-difference Jacobian determinant of the deterministic flow.

    Treats ``integrate`` as a map on R^{2N}; the determinant of a volume
    preserving flow is 1.  A dense 2N x 2N Jacobian, so N is expected small.
    """
    n = x.n_modes
    z0 = np.concatenate([x.q, x.v])

    def flow(z):
        if h == 0.0:
            return z.copy()
        y, _ = integrate(PhasePoint(z[:n], z[n:]), target, h, n_steps)
        return np.concatenate([y.q, y.v])

    jac = np.empty((2 * n, 2 * n))
    for i in range(2 * n):
        eps = fd_step * max(1.0, abs(z0[i]))
        zp, zm = z0.copy(), z0.copy()
        zp[i] += eps
        zm[i] -= eps
        jac[:, i] = (flow(zp) - flow(zm)) / (2.0 * eps)
    return float(np.linalg.det(jac))
