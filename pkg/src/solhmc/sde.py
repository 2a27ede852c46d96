"""Finite-N integrators for the underdamped Langevin system

    dq = [v - Gamma_1 F(q)] dt + sqrt(2 Gamma_1) dB_1,
    dv = [-F(q) - Gamma_2 v] dt + sqrt(2 Gamma_2) dB_2,

with F(q) = q + C grad_psi(q) and B_1, B_2 independent Brownian motions
with covariance C.  The Gamma operators are diagonal in the eigenbasis.
This is the reference law for the small-step limit of the sampler (with
Gamma_1 = 0) and an independent way to draw from the same target.

Schemes:

  * "ou-splitting" (default): Strang composition kick(dt/2) . linear(dt)
    . kick(dt/2).  The linear SDE (psi == 0) is solved exactly per mode; the
    2x2 transition matrix has a closed form and the noise covariance is
    lambda_j^2 (I - E E^T) because the stationary covariance of the linear
    system is lambda_j^2 I on each mode.
  * "euler-maruyama": x += G(x) dt + sqrt(2 Gamma dt) C^{1/2} xi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import PhasePoint, ValidationError
from .targets import TargetModel

SCHEMES = ("ou-splitting", "euler-maruyama")


@dataclass(frozen=True)
class SdeParams:
    """Diagonal friction of the two equations plus step and horizon control."""

    dt: float
    t_final: float
    gamma1: np.ndarray | float = 0.0
    gamma2: np.ndarray | float = 1.0
    scheme: str = "ou-splitting"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ValidationError(f"t_final must be nonnegative, got {self.t_final}")
        if self.dt > self.t_final and self.t_final > 0:
            raise ValidationError("dt must not exceed t_final")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}; known: {SCHEMES}")
        for name in ("gamma1", "gamma2"):
            g = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(g)) or np.any(g < 0):
                raise ValidationError(f"{name} entries must be finite and nonnegative")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def broadcast(self, n_modes: int):
        g1 = np.broadcast_to(np.asarray(self.gamma1, dtype=float), (n_modes,))
        g2 = np.broadcast_to(np.asarray(self.gamma2, dtype=float), (n_modes,))
        return g1, g2


def _linear_step_coefficients(lam, g1, g2, dt):
    """Exact per-mode transition of the linear (psi == 0) system.

    Per mode, d(q,v) = A (q,v) dt + noise with A = [[-g1, 1], [-1, -g2]].
    Writing A = -a I + K, a = (g1+g2)/2, K = [[b, 1], [-1, -b]], b = (g2-g1)/2,
    K^2 = (b^2 - 1) I gives a closed-form exponential.  The one-step noise
    covariance is lam^2 (I - E E^T); its Cholesky factor is assembled with
    clipping so the hypoelliptic g1 = 0 case stays PSD under roundoff.
    """
    a = 0.5 * (g1 + g2)
    b = 0.5 * (g2 - g1)
    disc = 1.0 - b * b
    w = np.sqrt(np.abs(disc))
    wt = w * dt
    # cos/cosh branch by sign of disc; sin(wt)/w -> dt as w -> 0
    c = np.where(disc >= 0, np.cos(wt), np.cosh(wt))
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(disc >= 0, np.sin(wt), np.sinh(wt)) / w
    s = np.where(w == 0.0, dt, s)
    ea = np.exp(-a * dt)
    E00 = ea * (c + b * s)
    E01 = ea * s
    E10 = -ea * s
    E11 = ea * (c - b * s)
    EET00 = E00 * E00 + E01 * E01
    EET01 = E00 * E10 + E01 * E11
    EET11 = E10 * E10 + E11 * E11
    S00 = np.maximum(1.0 - EET00, 0.0)
    S01 = -EET01
    S11 = np.maximum(1.0 - EET11, 0.0)
    L00 = np.sqrt(S00)
    safe = np.where(L00 > 0, L00, 1.0)
    L10 = np.where(L00 > 0, S01 / safe, 0.0)
    L11 = np.sqrt(np.maximum(S11 - L10 * L10, 0.0))
    lamL00 = lam * L00
    lamL10 = lam * L10
    lamL11 = lam * L11
    return (E00, E01, E10, E11), (lamL00, lamL10, lamL11)


class _Kernel:
    """Batched stepping state shared by sde_step and simulate."""

    def __init__(self, target: TargetModel, params: SdeParams):
        self.target = target
        self.params = params
        prior = target.prior
        self.lam = prior.eigenvalues
        self.lam2 = self.lam ** 2
        self.g1, self.g2 = params.broadcast(prior.n_modes)
        if params.scheme == "ou-splitting":
            self.E, self.L = _linear_step_coefficients(self.lam, self.g1, self.g2, params.dt)

    def step(self, Q, V, rng):
        dt = self.params.dt
        if self.params.scheme == "euler-maruyama":
            with np.errstate(over="ignore", invalid="ignore"):
                g = self.target.grad_psi(Q)
                F = Q + self.lam2 * g
                r1 = rng.standard_normal(Q.shape)
                r2 = rng.standard_normal(Q.shape)
                Qn = Q + (V - self.g1 * F) * dt + np.sqrt(2 * self.g1 * dt) * self.lam * r1
                Vn = V + (-F - self.g2 * V) * dt + np.sqrt(2 * self.g2 * dt) * self.lam * r2
            return Qn, Vn
        # Strang: half kick, exact linear step, half kick
        E00, E01, E10, E11 = self.E
        L00, L10, L11 = self.L
        with np.errstate(over="ignore", invalid="ignore"):
            g = self.target.grad_psi(Q)
            cg = self.lam2 * g
            Qh = Q - 0.5 * dt * self.g1 * cg
            Vh = V - 0.5 * dt * cg
            r1 = rng.standard_normal(Q.shape)
            r2 = rng.standard_normal(Q.shape)
            Qn = E00 * Qh + E01 * Vh + L00 * r1
            Vn = E10 * Qh + E11 * Vh + L10 * r1 + L11 * r2
            g = self.target.grad_psi(Qn)
            cg = self.lam2 * g
            Qn = Qn - 0.5 * dt * self.g1 * cg
            Vn = Vn - 0.5 * dt * cg
        return Qn, Vn


def sde_step(x: PhasePoint, target: TargetModel, params: SdeParams, rng) -> PhasePoint:
    """Advance one step of the chosen scheme.  Aborts on non-finite states."""
    kernel = _Kernel(target, params)
    Q, V = kernel.step(x.q[None, :], x.v[None, :], rng)
    if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(V))):
        raise FloatingPointError("SDE state became non-finite (reduce dt)")
    return PhasePoint(Q[0], V[0])


@dataclass
class SdeTrajectory:
    times: np.ndarray
    snapshots_q: np.ndarray
    snapshots_v: np.ndarray


def simulate(x0: PhasePoint, target: TargetModel, params: SdeParams, rng,
             snapshot_every: int = 1) -> SdeTrajectory:
    """Integrate to t_final recording every ``snapshot_every``-th state.

    The initial state is always recorded; t_final = 0 yields just x0.
    """
    kernel = _Kernel(target, params)
    Q, V = x0.q[None, :].copy(), x0.v[None, :].copy()
    times = [0.0]
    snaps_q = [Q[0].copy()]
    snaps_v = [V[0].copy()]
    for k in range(1, params.n_steps + 1):
        Q, V = kernel.step(Q, V, rng)
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(V))):
            raise FloatingPointError(f"SDE state became non-finite at step {k} (reduce dt)")
        if k % snapshot_every == 0 or k == params.n_steps:
            times.append(k * params.dt)
            snaps_q.append(Q[0].copy())
            snaps_v.append(V[0].copy())
    return SdeTrajectory(np.array(times), np.stack(snaps_q), np.stack(snaps_v))


def run_ensemble(target: TargetModel, params: SdeParams, n_traj: int, rng,
                 initial=None):
    """Integrate n_traj independent trajectories to t_final; returns (Q, V).

    The default initial condition is independent reference draws per
    trajectory (q and v both N(0, C)).
    """
    kernel = _Kernel(target, params)
    prior = target.prior
    if initial is None:
        Q = prior.sample(rng, size=n_traj)
        V = prior.sample(rng, size=n_traj)
    else:
        Q, V = (np.array(a, dtype=float, copy=True) for a in initial)
    for k in range(params.n_steps):
        Q, V = kernel.step(Q, V, rng)
    if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(V))):
        raise FloatingPointError("SDE state became non-finite (reduce dt)")
    return Q, V
