"""Chain diagnostics: mixing statistic, interpolants, and empirical studies.

The mixing statistic for a chain of paths is the spatial average of the
absolute running-mean path,

    E(n) = (1/T) integral_0^T | qbar(tau) | dtau,
    qbar(tau) = mean of the chain's paths over the steps taken so far,

reported against n, the cumulative count of integrator steps (the work paid,
counting rejected proposals).  For the symmetric double-well target the mean
path is zero, so the rate at which E(n) drops measures sampling efficiency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import PhasePoint, ValidationError
from .targets import TargetModel
from .sampler import ChainEnsemble, ChainTrace, SamplerConfig
from .integrators import _integrate_batch, delta_to_iota
from . import sde as sde_mod


def running_mean_path(trace: ChainTrace, target: TargetModel,
                      burn_in: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Grid and values of the running-mean path over post-burn-in snapshots.

    Averages the stored snapshots with step index > burn_in (the initial
    state never contributes).  Requires at least one retained snapshot.
    """
    keep = trace.snapshot_steps > burn_in
    if not np.any(keep):
        raise ValidationError("no snapshots beyond burn_in; nothing to average")
    qbar = trace.snapshots_q[keep].mean(axis=0)
    prior = target.prior
    return prior.grid(target.grid_size), prior.synthesize(qbar, target.grid_size)


def path_mean_abs(prior, qbar: np.ndarray, grid_size: int) -> float:
    """(1/T) integral |path| dtau by trapezoid quadrature (zero endpoints).

    The trapezoid weight is T/M per interior node, so the spatial average
    divides the interior sum by M, not by the M - 1 node count.
    """
    path = prior.synthesize(qbar, grid_size)
    return float(np.sum(np.abs(path), axis=-1) / grid_size)


def e_of_n(trace: ChainTrace, target: TargetModel, schedule=None,
           burn_in: int = 0) -> list[tuple[int, float]]:
    """Rows (n, E(n)) from a densely stored trace (thinning must be 1).

    ``schedule`` lists MCMC step counts at which to emit rows (default: every
    step); ``burn_in`` drops the first steps from the running mean, with the
    work n still counted from the start of the run.
    """
    if trace.config.thinning != 1:
        raise ValidationError("e_of_n needs a densely stored trace (thinning = 1)")
    n_steps = trace.iterations
    if n_steps == 0:
        raise ValidationError("empty trace")
    if schedule is None:
        schedule = range(burn_in + 1, n_steps + 1)
    prior = target.prior
    S = prior.basis_matrix(target.grid_size)
    work = trace.work
    rows = []
    csum = np.zeros(S.shape[0])
    next_idx = 0
    schedule = sorted(set(int(k) for k in schedule))
    for k in range(burn_in + 1, n_steps + 1):
        csum += trace.snapshots_q[k] @ S.T
        while next_idx < len(schedule) and schedule[next_idx] == k:
            qbar_path = csum / (k - burn_in)
            rows.append((int(work[k - 1]),
                         float(np.sum(np.abs(qbar_path)) / target.grid_size)))
            next_idx += 1
    return rows


def interpolant(trace: ChainTrace, t: float) -> PhasePoint:
    """Piecewise linear interpolant of a densely stored small-step chain.

    Defined for the regime delta = h = tau (one integrator step per proposal)
    with knots t_k = k delta; valid for 0 <= t <= iterations * delta.
    """
    cfg = trace.config
    if cfg.thinning != 1:
        raise ValidationError("interpolant needs a densely stored trace (thinning = 1)")
    integ = cfg.integrator
    if integ.n_steps != 1 or not math.isclose(integ.delta, integ.step_size):
        raise ValidationError("interpolant is defined for the delta = h = tau regime")
    delta = integ.step_size
    t_max = trace.iterations * delta
    if not 0.0 <= t <= t_max + 1e-12 * max(1.0, t_max):
        raise ValidationError(f"t = {t} outside [0, {t_max}]")
    k = min(int(t / delta), trace.iterations - 1) if trace.iterations else 0
    frac = t / delta - k
    q = (1.0 - frac) * trace.snapshots_q[k] + frac * trace.snapshots_q[k + 1]
    v = (1.0 - frac) * trace.snapshots_v[k] + frac * trace.snapshots_v[k + 1]
    return PhasePoint(q, v)


# ---------------------------------------------------------------------------
# studies


@dataclass
class MixingReport:
    """Seed-averaged (n, E) rows for one method."""

    label: str
    n: np.ndarray
    e_mean: np.ndarray
    e_min: np.ndarray
    e_max: np.ndarray
    seeds: int
    acceptance_rate: float

    def final_half_mean(self) -> float:
        sel = self.n >= self.n[-1] / 2
        return float(self.e_mean[sel].mean())

    def first_crossing(self, level: float):
        hit = np.nonzero(self.e_mean <= level)[0]
        return int(self.n[hit[0]]) if hit.size else None


def mixing_curve(config: SamplerConfig, n_total: int, seeds: int, label: str,
                 initial=None, n_checkpoints: int = 240, seed=None) -> MixingReport:
    """Seed-averaged E(n) curve for one sampler configuration.

    Runs ``seeds`` chains in an ensemble, accumulates the running-mean path
    per chain, and emits E at about ``n_checkpoints`` evenly spaced values of
    the work n (plus a row at n = 0 for the initial states).  The work of a
    proposal is charged whether or not it is accepted.
    """
    mean_nd = (config.integrator.n_steps if config.n_steps_range is None
               else 0.5 * (config.n_steps_range[0] + config.n_steps_range[1]))
    n_mcmc = max(1, int(round(n_total / mean_nd)))
    ens = ChainEnsemble(config, n_chains=seeds, initial=initial, record=False, seed=seed)
    S = ens.target.prior.basis_matrix(config.grid_size)
    csum = np.zeros((seeds, S.shape[0]))
    M = config.grid_size
    e0 = np.sum(np.abs(ens.Q @ S.T), axis=-1) / M
    rows = [(0, e0.mean(), e0.min(), e0.max())]
    checkpoints = np.unique(np.linspace(1, n_total, n_checkpoints).astype(np.int64))
    ci = 0
    work = 0
    accepted = 0.0
    for k in range(n_mcmc):
        acc, _ = ens.step()
        accepted += float(np.mean(acc))
        work += ens.last_n_steps
        csum += ens.Q @ S.T
        if ci < len(checkpoints) and work >= checkpoints[ci]:
            e_vals = np.sum(np.abs(csum / (k + 1)), axis=-1) / M
            rows.append((work, e_vals.mean(), e_vals.min(), e_vals.max()))
            while ci < len(checkpoints) and work >= checkpoints[ci]:
                ci += 1
    arr = np.array(rows, dtype=float)
    return MixingReport(label=label, n=arr[:, 0].astype(np.int64), e_mean=arr[:, 1],
                        e_min=arr[:, 2], e_max=arr[:, 3], seeds=seeds,
                        acceptance_rate=accepted / n_mcmc)


def fit_loglog_slope(x, y):
    """OLS slope of log y against log x; (None, None) for degenerate ladders.

    The slope standard error is the usual OLS formula, available from three
    points on.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(y <= 0) or np.any(x <= 0):
        return None, None
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    if x.size < 3:
        return float(slope), None
    resid = ly - (slope * lx + intercept)
    sxx = np.sum((lx - lx.mean()) ** 2)
    se = math.sqrt(float(np.sum(resid ** 2)) / (x.size - 2) / sxx)
    return float(slope), se


FUNCTIONALS = ("q1", "norm_q_sq", "norm_v_sq", "psi")


def _evaluate_functionals(target: TargetModel, names, Q, V):
    out = {}
    for name in names:
        if name == "q1":
            out[name] = Q[:, 0]
        elif name == "norm_q_sq":
            out[name] = np.sum(Q * Q, axis=-1)
        elif name == "norm_v_sq":
            out[name] = np.sum(V * V, axis=-1)
        elif name == "psi":
            out[name] = target.psi(Q)
        else:
            raise ValidationError(f"unknown functional {name!r}; known: {FUNCTIONALS}")
    return out


@dataclass
class DiffusionLimitReport:
    """Terminal-time expectations of the small-step chains vs the SDE law."""

    deltas: np.ndarray          # strictly decreasing ladder
    functionals: tuple
    chain_mean: dict            # name -> array over the ladder
    chain_se: dict
    sde_mean: dict              # name -> scalar
    sde_se: dict
    chains_per_level: int
    sde_trajectories: int
    t_final: float

    def gap(self, name):
        return self.chain_mean[name] - self.sde_mean[name]

    def combined_se(self, name):
        return np.hypot(self.chain_se[name], self.sde_se[name])

    def nonincreasing_within(self, name, n_se: float = 3.0) -> bool:
        """Gaps do not grow down the ladder beyond n_se combined errors."""
        g = np.abs(self.gap(name))
        tol = n_se * self.combined_se(name)
        return bool(np.all(g[1:] <= g[:-1] + tol[1:] + tol[:-1]))

    def finest_within(self, name, n_se: float = 3.0) -> bool:
        return bool(abs(self.gap(name)[-1]) <= n_se * self.combined_se(name)[-1])


def diffusion_limit_study(target: TargetModel, deltas, t_final: float,
                          n_chains: int, rng_seed: int,
                          functionals=FUNCTIONALS, n_sde: int | None = None,
                          sde_dt: float | None = None) -> DiffusionLimitReport:
    """Compare small-step chains against the underdamped Langevin reference.

    For each delta on the (strictly decreasing) ladder, runs ``n_chains``
    independent chains in the one-step regime delta = h = tau to time
    ``t_final`` and estimates E[f(z(T))] for the requested functionals; the
    reference expectation comes from the SDE integrator at a fine dt with
    Gamma_1 = 0, Gamma_2 = I.  Both start from independent reference draws.
    """
    deltas = np.asarray(sorted(set(float(d) for d in deltas), reverse=True))
    if deltas.size == 0:
        raise ValidationError("empty delta ladder")
    if np.any(deltas <= 0):
        raise ValidationError("deltas must be positive")
    if n_chains < 1:
        raise ValidationError("need at least one chain per level")
    root = np.random.SeedSequence(rng_seed)
    sde_ss, *level_ss = root.spawn(deltas.size + 1)
    n_sde = 2 * n_chains if n_sde is None else int(n_sde)
    sde_dt = min(0.01, deltas.min() / 4.0) if sde_dt is None else float(sde_dt)
    params = sde_mod.SdeParams(dt=sde_dt, t_final=t_final, gamma1=0.0, gamma2=1.0)
    Qr, Vr = sde_mod.run_ensemble(target, params, n_sde, np.random.default_rng(sde_ss))
    ref_vals = _evaluate_functionals(target, functionals, Qr, Vr)
    sde_mean = {k: float(v.mean()) for k, v in ref_vals.items()}
    sde_se = {k: float(v.std(ddof=1) / math.sqrt(v.size)) for k, v in ref_vals.items()}

    chain_mean = {k: [] for k in functionals}
    chain_se = {k: [] for k in functionals}
    prior = target.prior
    for delta, ss in zip(deltas, level_ss):
        rng = np.random.default_rng(ss)
        Q = prior.sample(rng, size=n_chains)
        V = prior.sample(rng, size=n_chains)
        iota = delta_to_iota(delta)
        decay = math.sqrt(1.0 - iota * iota)
        scale = prior.eigenvalues * iota
        psi, grad = target.psi_and_grad(Q)
        n_steps = int(round(t_final / delta))
        for _ in range(n_steps):
            v_prime = decay * V + scale * rng.standard_normal(V.shape)
            Qs, Vs, dH, psis, grads = _integrate_batch(
                target, Q, v_prime, delta, 1, psi0=psi, grad0=grad)
            with np.errstate(divide="ignore"):
                accepted = np.log(rng.random(n_chains)) < dH
            acc = accepted[:, None]
            Q = np.where(acc, Qs, Q)
            V = np.where(acc, Vs, -v_prime)
            psi = np.where(accepted, psis, psi)
            grad = np.where(acc, grads, grad)
        vals = _evaluate_functionals(target, functionals, Q, V)
        for k in functionals:
            chain_mean[k].append(float(vals[k].mean()))
            chain_se[k].append(float(vals[k].std(ddof=1) / math.sqrt(n_chains)))
    return DiffusionLimitReport(
        deltas=deltas, functionals=tuple(functionals),
        chain_mean={k: np.array(v) for k, v in chain_mean.items()},
        chain_se={k: np.array(v) for k, v in chain_se.items()},
        sde_mean=sde_mean, sde_se=sde_se,
        chains_per_level=n_chains, sde_trajectories=n_sde, t_final=t_final)


@dataclass
class ScalingReport:
    """Mean rejection probability against the step parameter, with a fit."""

    deltas: np.ndarray
    mean_rejection: np.ndarray
    stderr: np.ndarray
    slope: float | None         # None for degenerate (single-point) ladders
    slope_stderr: float | None
    steps_per_level: int
    burn_in: int


def acceptance_scaling_study(target: TargetModel, deltas, steps_per_level: int,
                             rng_seed: int, n_chains: int = 16,
                             burn_in: int | None = None) -> ScalingReport:
    """Estimate E[1 - alpha] on a delta ladder and fit its log-log slope.

    Runs an ensemble per level in the delta = h = tau regime, discards a
    burn-in (default 10 percent of the per-level steps), and averages the
    per-step rejection probabilities 1 - min(1, exp(dH)) across chains and
    steps.  The standard error treats chains as independent (between-chain
    variance of the per-chain means).
    """
    deltas = np.asarray(sorted(set(float(d) for d in deltas), reverse=True))
    if np.any(deltas <= 0):
        raise ValidationError("deltas must be positive")
    if steps_per_level < 1:
        raise ValidationError("steps_per_level must be >= 1")
    per_chain = max(1, int(math.ceil(steps_per_level / n_chains)))
    burn = max(1, per_chain // 10) if burn_in is None else int(burn_in)
    root = np.random.SeedSequence(rng_seed)
    prior = target.prior
    means, ses = [], []
    for delta, ss in zip(deltas, root.spawn(deltas.size)):
        rng = np.random.default_rng(ss)
        Q = prior.sample(rng, size=n_chains)
        V = prior.sample(rng, size=n_chains)
        iota = delta_to_iota(delta)
        decay = math.sqrt(1.0 - iota * iota)
        scale = prior.eigenvalues * iota
        psi, grad = target.psi_and_grad(Q)
        rej_sum = np.zeros(n_chains)
        kept = 0
        for k in range(per_chain + burn):
            v_prime = decay * V + scale * rng.standard_normal(V.shape)
            Qs, Vs, dH, psis, grads = _integrate_batch(
                target, Q, v_prime, delta, 1, psi0=psi, grad0=grad)
            if k >= burn:
                rej_sum += 1.0 - np.minimum(1.0, np.exp(np.minimum(dH, 0.0)))
                kept += 1
            with np.errstate(divide="ignore"):
                accepted = np.log(rng.random(n_chains)) < dH
            acc = accepted[:, None]
            Q = np.where(acc, Qs, Q)
            V = np.where(acc, Vs, -v_prime)
            psi = np.where(accepted, psis, psi)
            grad = np.where(acc, grads, grad)
        per_chain_mean = rej_sum / kept
        means.append(float(per_chain_mean.mean()))
        ses.append(float(per_chain_mean.std(ddof=1) / math.sqrt(n_chains)))
    means = np.array(means)
    ses = np.array(ses)
    slope, slope_se = fit_loglog_slope(deltas, means)
    return ScalingReport(deltas=deltas, mean_rejection=means, stderr=ses,
                         slope=slope, slope_stderr=slope_se,
                         steps_per_level=per_chain * n_chains, burn_in=burn)


@dataclass
class InvarianceReport:
    """Per-mode empirical variances against the reference eigenvalues."""

    modes: np.ndarray
    lambda_sq: np.ndarray
    chain_var: np.ndarray
    chain_ratio: np.ndarray
    sde_var: np.ndarray | None
    sde_ratio: np.ndarray | None
    steps: int

    def within(self, tol: float, n_modes: int, include_sde: bool = True) -> bool:
        ok = bool(np.all(np.abs(self.chain_ratio[:n_modes] - 1.0) <= tol))
        if include_sde and self.sde_ratio is not None:
            ok = ok and bool(np.all(np.abs(self.sde_ratio[:n_modes] - 1.0) <= tol))
        return ok


def invariance_study(config: SamplerConfig, rng_seed: int | None = None,
                     include_sde: bool = True, sde_dt: float = 0.05,
                     burn_in: int | None = None) -> InvarianceReport:
    """Check that per-mode variances of q match the reference eigenvalues.

    Runs a single chain for ``config.iterations`` steps, accumulating sums
    and squared sums of the coefficients after a burn-in (default 10 percent).
    For the Gaussian target the chain is started at a reference draw, which
    is already stationary.  Optionally runs the SDE reference (an ensemble of
    trajectories, their terminal coefficient pooled over a time window) for
    the same per-mode comparison.
    """
    seed = config.seed if rng_seed is None else rng_seed
    ens = ChainEnsemble(config, n_chains=1, record=False, seed=seed)
    burn = config.iterations // 10 if burn_in is None else int(burn_in)
    s1 = np.zeros(config.n_modes)
    s2 = np.zeros(config.n_modes)
    kept = 0
    for k in range(config.iterations):
        ens.step()
        if k >= burn:
            s1 += ens.Q[0]
            s2 += ens.Q[0] ** 2
            kept += 1
    mean = s1 / kept
    chain_var = s2 / kept - mean ** 2
    lam2 = ens.target.prior.eigenvalues ** 2
    sde_var = sde_ratio = None
    if include_sde:
        # ensemble of trajectories, variance pooled over terminal states
        target = ens.target
        n_traj = 256
        t_relax = 40.0
        params = sde_mod.SdeParams(dt=sde_dt, t_final=t_relax, gamma1=0.0, gamma2=1.0)
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
        Q = target.prior.sample(rng, size=n_traj)
        V = target.prior.sample(rng, size=n_traj)
        kernel = sde_mod._Kernel(target, params)
        ss1 = np.zeros(config.n_modes)
        ss2 = np.zeros(config.n_modes)
        cnt = 0
        n_steps = params.n_steps
        for k in range(n_steps):
            Q, V = kernel.step(Q, V, rng)
            if k >= n_steps // 10 and k % 5 == 0:
                ss1 += Q.sum(axis=0)
                ss2 += (Q * Q).sum(axis=0)
                cnt += Q.shape[0]
        sde_mean = ss1 / cnt
        sde_var = ss2 / cnt - sde_mean ** 2
        sde_ratio = sde_var / lam2
    return InvarianceReport(
        modes=np.arange(1, config.n_modes + 1),
        lambda_sq=lam2,
        chain_var=chain_var,
        chain_ratio=chain_var / lam2,
        sde_var=sde_var,
        sde_ratio=sde_ratio,
        steps=config.iterations,
    )
