"""The SOL-HMC Markov chain with accept/momentum-flip rule, plus presets.

One step from (q, v):

  1. OU-refresh the velocity: v' from ``ou_step`` over time delta;
  2. integrate the split Hamiltonian map for n_steps of size h from (q, v'),
     accumulating the analytic energy change dH = H(q, v') - H(q*, v*);
  3. accept the endpoint with probability 1 ^ exp(dH), otherwise move to
     (q, -v'): the position is kept and the refreshed velocity sign-flipped.

With iota = 1 (full refresh) this is the function-space HMC special case;
with additionally n_steps = 1 it is the function-space MALA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import PhasePoint, ValidationError, bridge_prior
from .targets import TargetModel, make_target
from .integrators import IntegratorParams, _integrate_batch


class NumericalAbort(RuntimeError):
    """The chain produced a non-finite energy change: discretization blow-up.

    Carries the partial trace accumulated before the abort in ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


OBSERVABLES = ("q1", "norm_q_sq", "norm_v_sq", "psi", "mean_abs_path")


def _observable_values(name: str, target: TargetModel, Q, V, psi):
    if name == "q1":
        return Q[..., 0]
    if name == "norm_q_sq":
        return np.sum(Q * Q, axis=-1)
    if name == "norm_v_sq":
        return np.sum(V * V, axis=-1)
    if name == "psi":
        return psi
    if name == "mean_abs_path":
        S = target.prior.basis_matrix(target.grid_size)
        return np.sum(np.abs(Q @ S.T), axis=-1) / target.grid_size
    raise ValidationError(f"unknown observable {name!r}; known: {OBSERVABLES}")


@dataclass(frozen=True)
class SamplerConfig:
    """Everything needed to reproduce a chain bit for bit."""

    target_label: str = "double-well"
    n_modes: int = 128
    grid_size: int = 512
    interval_length: float = 100.0
    integrator: IntegratorParams = None
    iterations: int = 1000
    seed: int = 0
    observables: tuple = ("psi", "norm_q_sq")
    thinning: int = 1
    n_steps_range: tuple | None = None   # inclusive (lo, hi): draw n_steps per step
    sobolev_index: float = 0.0

    def __post_init__(self):
        if self.integrator is None:
            object.__setattr__(self, "integrator",
                               IntegratorParams(step_size=0.1, n_steps=1, iota=0.5))
        if self.iterations < 0:
            raise ValidationError("iterations must be >= 0")
        if self.thinning < 1:
            raise ValidationError("thinning must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.n_steps_range is not None:
            lo, hi = self.n_steps_range
            if not (1 <= lo <= hi):
                raise ValidationError(f"bad n_steps_range {self.n_steps_range}")
        for name in self.observables:
            if name not in OBSERVABLES:
                raise ValidationError(f"unknown observable {name!r}; known: {OBSERVABLES}")

    def build_target(self) -> TargetModel:
        prior = bridge_prior(self.interval_length, self.n_modes, self.sobolev_index)
        return make_target(self.target_label, prior, self.grid_size)


def preset(name: str, **overrides) -> SamplerConfig:
    """Named configurations: "sol-hmc", "hmc" (full refresh, tau ~ 1), "mala".

    ``hmc`` sets iota = 1 and n_steps = round(1/h); ``mala`` sets iota = 1 and
    n_steps = 1 so tau = h.  Keyword overrides are applied on top and may
    include integrator fields (step_size, n_steps, iota, delta, gamma2).
    """
    integ_keys = {"step_size", "n_steps", "iota", "delta", "gamma2"}
    integ_over = {k: overrides.pop(k) for k in list(overrides) if k in integ_keys}
    if name == "hmc":
        h = integ_over.pop("step_size", 0.02)
        integ_over.pop("iota", None)
        integ = IntegratorParams(step_size=h, iota=1.0,
                                 n_steps=integ_over.pop("n_steps", max(1, round(1.0 / h))),
                                 **integ_over)
    elif name == "mala":
        h = integ_over.pop("step_size", 0.02)
        integ_over.pop("iota", None)
        integ_over.pop("n_steps", None)
        integ = IntegratorParams(step_size=h, iota=1.0, n_steps=1, **integ_over)
    elif name == "sol-hmc":
        if "delta" not in integ_over and "iota" not in integ_over:
            integ_over["iota"] = 2 ** -0.5
        integ = IntegratorParams(step_size=integ_over.pop("step_size", 0.02),
                                 n_steps=integ_over.pop("n_steps", 50), **integ_over)
    else:
        raise ValidationError(f"unknown preset {name!r}; known: sol-hmc, hmc, mala")
    return SamplerConfig(integrator=integ, **overrides)


@dataclass
class ChainTrace:
    """Per-step records of a finished (or aborted) run."""

    config: SamplerConfig
    seed: int
    accepted: np.ndarray          # bool, one per step
    delta_h: np.ndarray           # energy change of each proposal
    n_steps: np.ndarray           # integrator steps paid per proposal
    observables: dict             # name -> array, evaluated on post-step states
    snapshot_steps: np.ndarray    # step indices of stored states (0 = initial)
    snapshots_q: np.ndarray       # (n_snapshots, N)
    snapshots_v: np.ndarray
    aborted: bool = False

    @property
    def iterations(self) -> int:
        return int(self.accepted.size)

    @property
    def acceptance_count(self) -> int:
        return int(np.sum(self.accepted))

    @property
    def acceptance_rate(self) -> float:
        return self.acceptance_count / max(1, self.iterations)

    @property
    def work(self) -> np.ndarray:
        """Cumulative integrator steps n after each MCMC step."""
        return np.cumsum(self.n_steps)

    def rejection_probabilities(self) -> np.ndarray:
        """Per-step 1 - alpha = 1 - min(1, exp(dH))."""
        return 1.0 - np.minimum(1.0, np.exp(np.minimum(self.delta_h, 0.0)))


def sol_hmc_step(x: PhasePoint, target: TargetModel, params: IntegratorParams,
                 rng, n_steps: int | None = None, accept_override: bool | None = None):
    """One transition of the chain.  Returns (next state, accepted, dH).

    ``accept_override`` forces the accept/reject outcome (testing hook); the
    uniform variate is still consumed so the stream stays aligned.
    ``n_steps`` overrides the configured count for this step (random-length
    proposals draw it upstream from the chain's stream).
    """
    prior = target.prior
    decay, scale = params.ou_coefficients(prior)
    v_prime = decay * x.v + scale * rng.standard_normal(x.v.shape)
    nd = params.n_steps if n_steps is None else int(n_steps)
    Q, V, dH, _, _ = _integrate_batch(target, x.q[None, :], v_prime[None, :],
                                      params.step_size, nd)
    dh = float(dH[0])
    u = rng.random()
    if not math.isfinite(dh):
        raise NumericalAbort(f"non-finite energy change {dh!r}: "
                             "the discretization blew up (reduce step_size)")
    accepted = True if u == 0.0 else math.log(u) < dh
    if accept_override is not None:
        accepted = bool(accept_override)
    if accepted:
        return PhasePoint(Q[0], V[0]), True, dh
    return PhasePoint(x.q, -v_prime), False, dh


def run_chain(config: SamplerConfig, initial: PhasePoint | None = None,
              target: TargetModel | None = None) -> ChainTrace:
    """Run the chain for ``config.iterations`` steps; deterministic in the seed.

    The initial state defaults to independent reference-measure draws for q
    and v.  Raises ``NumericalAbort`` (with the partial trace attached) if a
    proposal's energy change is non-finite.
    """
    if target is None:
        target = config.build_target()
    ens = ChainEnsemble(config, target, n_chains=1, initial=initial)
    try:
        for _ in range(config.iterations):
            ens.step()
    except NumericalAbort as exc:
        exc.trace = ens.to_trace(aborted=True)
        raise
    return ens.to_trace()


class ChainEnsemble:
    """Vectorized bundle of independent chains sharing one configuration.

    Each chain owns a private generator spawned from the configured seed, so
    single chains extracted from an ensemble are reproducible in isolation.
    The heavy algebra (transforms, kicks, rotations) runs batched across the
    ensemble.
    """

    def __init__(self, config: SamplerConfig, target: TargetModel | None = None,
                 n_chains: int = 1, initial=None, seed=None, record: bool = True):
        self.config = config
        self.target = config.build_target() if target is None else target
        self.n_chains = int(n_chains)
        self.record = record
        if isinstance(seed, np.random.SeedSequence):
            root = seed
        else:
            root = np.random.SeedSequence(config.seed if seed is None else seed)
        init_ss, *chain_ss = root.spawn(self.n_chains + 1)
        self.rngs = [np.random.default_rng(s) for s in chain_ss]
        prior = self.target.prior
        if initial is None:
            init_rng = np.random.default_rng(init_ss)
            self.Q = prior.sample(init_rng, size=self.n_chains)
            self.V = prior.sample(init_rng, size=self.n_chains)
        elif isinstance(initial, PhasePoint):
            self.Q = np.tile(initial.q, (self.n_chains, 1))
            self.V = np.tile(initial.v, (self.n_chains, 1))
        else:
            Q0, V0 = initial
            self.Q = np.array(Q0, dtype=float, copy=True).reshape(self.n_chains, -1)
            self.V = np.array(V0, dtype=float, copy=True).reshape(self.n_chains, -1)
        self.psi, self.grad = self.target.psi_and_grad(self.Q)
        self.step_index = 0
        self._decay, self._scale = config.integrator.ou_coefficients(prior)
        self._records = {"accepted": [], "delta_h": [], "n_steps": []}
        self._obs = {name: [] for name in config.observables}
        self._snap_steps = [0]
        self._snap_q = [self.Q.copy()]
        self._snap_v = [self.V.copy()]

    def _draw_normals(self):
        out = np.empty_like(self.V)
        for i, rng in enumerate(self.rngs):
            out[i] = rng.standard_normal(out.shape[-1])
        return out

    def _draw_uniforms(self):
        return np.array([rng.random() for rng in self.rngs])

    def step(self):
        cfg = self.config
        params = cfg.integrator
        if cfg.n_steps_range is not None:
            lo, hi = cfg.n_steps_range
            # one shared draw per ensemble step keeps chains aligned in work
            nd = int(self.rngs[0].integers(lo, hi + 1))
        else:
            nd = params.n_steps
        v_prime = self._decay * self.V + self._scale * self._draw_normals()
        Qs, Vs, dH, psis, grads = _integrate_batch(
            self.target, self.Q, v_prime, params.step_size, nd,
            psi0=self.psi, grad0=self.grad)
        if not np.all(np.isfinite(dH)):
            raise NumericalAbort(
                f"non-finite energy change at step {self.step_index}: "
                "the discretization blew up (reduce step_size)")
        u = self._draw_uniforms()
        with np.errstate(divide="ignore"):
            accepted = np.log(u) < dH
        acc = accepted[:, None]
        self.Q = np.where(acc, Qs, self.Q)
        self.V = np.where(acc, Vs, -v_prime)
        self.psi = np.where(accepted, psis, self.psi)
        self.grad = np.where(acc, grads, self.grad)
        self.step_index += 1
        self.last_n_steps = nd
        if self.record:
            self._records["accepted"].append(accepted)
            self._records["delta_h"].append(dH)
            self._records["n_steps"].append(nd)
            for name in self._obs:
                self._obs[name].append(
                    _observable_values(name, self.target, self.Q, self.V, self.psi))
            if self.step_index % cfg.thinning == 0:
                self._snap_steps.append(self.step_index)
                self._snap_q.append(self.Q.copy())
                self._snap_v.append(self.V.copy())
        return accepted, dH

    def to_trace(self, chain: int = 0, aborted: bool = False) -> ChainTrace:
        n = self.step_index
        rec = self._records
        return ChainTrace(
            config=self.config,
            seed=self.config.seed,
            accepted=(np.array(rec["accepted"])[:, chain] if n else np.zeros(0, bool)),
            delta_h=(np.array(rec["delta_h"])[:, chain] if n else np.zeros(0)),
            n_steps=np.array(rec["n_steps"], dtype=int),
            observables={k: (np.array(v)[:, chain] if n else np.zeros(0))
                         for k, v in self._obs.items()},
            snapshot_steps=np.array(self._snap_steps, dtype=int),
            snapshots_q=np.stack([s[chain] for s in self._snap_q]),
            snapshots_v=np.stack([s[chain] for s in self._snap_v]),
            aborted=aborted,
        )
