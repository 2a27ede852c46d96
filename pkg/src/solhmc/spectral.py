"""Truncated Gaussian reference measures N(0, C) in the eigenbasis of C.

A draw from the measure is represented by its coefficient vector in the
orthonormal eigenbasis {phi_j} of the covariance operator, so every linear
operation (covariance application, OU decay, rotation) is diagonal.  The
physical realization on a uniform grid uses the sine basis

    phi_j(tau) = sqrt(2/T) sin(j pi tau / T),   tau in (0, T),

which is the Dirichlet eigenbasis on the interval, so synthesized paths
vanish at both endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """A constructor or configuration argument violates its contract."""


def bridge_eigenvalues(interval_length: float, n_modes: int) -> np.ndarray:
    """Eigenvalue ladder lambda_j = T / (j pi) of the Brownian bridge on (0, T).

    The bridge precision is the negative Laplacian with homogeneous Dirichlet
    boundary conditions, whose eigenvalues are (j pi / T)^2; the covariance
    eigenvalues lambda_j^2 are their inverses.  The decay exponent is 1.
    """
    if not interval_length > 0:
        raise ValidationError(f"interval_length must be positive, got {interval_length}")
    if n_modes < 1:
        raise ValidationError(f"n_modes must be >= 1, got {n_modes}")
    j = np.arange(1, n_modes + 1, dtype=float)
    return interval_length / (j * np.pi)


@dataclass(frozen=True)
class SpectralPrior:
    """Gaussian measure N(0, C) truncated to its first N eigenpairs.

    Attributes
    ----------
    interval_length:
        Length T of the path domain (0, T).
    eigenvalues:
        lambda_j > 0, strictly decreasing; C phi_j = lambda_j^2 phi_j.
    decay_exponent:
        kappa in lambda_j ~ j^-kappa; must exceed 1/2 for a trace-class
        covariance in the untruncated limit.
    sobolev_index:
        Index s of the space carrying the measure; requires s < kappa - 1/2.
    """

    interval_length: float
    eigenvalues: np.ndarray
    decay_exponent: float
    sobolev_index: float = 0.0
    _basis_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", lam)
        if lam.ndim != 1 or lam.size < 1:
            raise ValidationError("eigenvalues must be a nonempty 1-d array")
        if not np.all(np.isfinite(lam)) or not np.all(lam > 0):
            raise ValidationError("eigenvalues must be finite and positive")
        if lam.size > 1 and not np.all(np.diff(lam) < 0):
            raise ValidationError("eigenvalues must be strictly decreasing")
        if not self.interval_length > 0:
            raise ValidationError("interval_length must be positive")
        if not self.decay_exponent > 0.5:
            raise ValidationError(
                f"decay_exponent must exceed 1/2, got {self.decay_exponent}")
        s, kappa = self.sobolev_index, self.decay_exponent
        if not 0.0 <= s < kappa - 0.5:
            raise ValidationError(
                f"sobolev_index must lie in [0, {kappa - 0.5}), got {s}")
        # Per-mode trace contributions lambda_j^2 j^{2s} must not grow with j,
        # otherwise the truncation is not approximating anything summable.
        j = np.arange(1, lam.size + 1, dtype=float)
        tail = lam ** 2 * j ** (2 * s)
        if lam.size > 1 and np.any(np.diff(tail) > 1e-12 * tail[:-1]):
            raise ValidationError("per-mode H^s trace terms must be nonincreasing")

    @property
    def n_modes(self) -> int:
        return int(self.eigenvalues.size)

    def sample(self, rng, size=None) -> np.ndarray:
        """Draw coefficients q_j = lambda_j rho_j with rho_j iid standard normal.

        ``size`` prepends batch dimensions; the trailing axis is the mode index.
        """
        shape = (self.n_modes,) if size is None else tuple(np.atleast_1d(size)) + (self.n_modes,)
        return self.eigenvalues * rng.standard_normal(shape)

    def apply_cov(self, w: np.ndarray) -> np.ndarray:
        """Apply C: multiply coefficients by lambda_j^2."""
        w = self._check_len(w)
        return w * self.eigenvalues ** 2

    def apply_cov_sqrt(self, w: np.ndarray) -> np.ndarray:
        """Apply C^{1/2}: multiply coefficients by lambda_j."""
        w = self._check_len(w)
        return w * self.eigenvalues

    def sobolev_norm(self, w: np.ndarray, r: float) -> float | np.ndarray:
        """H^r norm (sum_j j^{2r} w_j^2)^{1/2}; r = 0 is the plain H norm."""
        w = self._check_len(w)
        j = np.arange(1, self.n_modes + 1, dtype=float)
        return np.sqrt(np.sum(j ** (2 * r) * w ** 2, axis=-1))

    def grid(self, grid_size: int) -> np.ndarray:
        """Interior grid points tau_m = m T / M, m = 1..M-1."""
        m = np.arange(1, grid_size)
        return m * (self.interval_length / grid_size)

    def basis_matrix(self, grid_size: int) -> np.ndarray:
        """Values phi_j(tau_m) as an (M-1, N) matrix, cached per grid size.

        The discrete rows are orthogonal under the quadrature weight T/M,
        so analysis is the transpose up to that weight.
        """
        M = int(grid_size)
        if M < 2 * self.n_modes:
            raise ValidationError(
                f"grid_size {M} < 2 N = {2 * self.n_modes}: aliasing risk in "
                "synthesize/analyze round trips")
        cached = self._basis_cache.get(M)
        if cached is None:
            T = self.interval_length
            m = np.arange(1, M)
            j = np.arange(1, self.n_modes + 1)
            cached = np.sqrt(2.0 / T) * np.sin(np.pi * np.outer(m, j) / M)
            self._basis_cache[M] = cached
        return cached

    def synthesize(self, q: np.ndarray, grid_size: int) -> np.ndarray:
        """Evaluate sum_j q_j phi_j on the interior grid (endpoints are 0)."""
        q = self._check_len(q)
        return q @ self.basis_matrix(grid_size).T

    def analyze(self, path: np.ndarray, grid_size: int | None = None) -> np.ndarray:
        """Project interior grid values back to coefficients.

        Discrete sine transform with quadrature weight T/M; exactly inverts
        ``synthesize`` for any N <= M - 1.
        """
        path = np.asarray(path, dtype=float)
        M = path.shape[-1] + 1 if grid_size is None else int(grid_size)
        if path.shape[-1] != M - 1:
            raise ValidationError(
                f"path has {path.shape[-1]} interior values, expected {M - 1}")
        weight = self.interval_length / M
        return weight * (path @ self.basis_matrix(M))

    def _check_len(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape[-1] != self.n_modes:
            raise ValidationError(
                f"coefficient vector has length {w.shape[-1]}, expected {self.n_modes}")
        return w


def bridge_prior(interval_length: float, n_modes: int,
                 sobolev_index: float = 0.0) -> SpectralPrior:
    """Brownian bridge reference measure on (0, T), truncated to N modes."""
    return SpectralPrior(
        interval_length=interval_length,
        eigenvalues=bridge_eigenvalues(interval_length, n_modes),
        decay_exponent=1.0,
        sobolev_index=sobolev_index,
    )


@dataclass(frozen=True)
class PhasePoint:
    """Position/velocity pair (q, v) as coefficient vectors of equal length."""

    q: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", v)
        if q.shape != v.shape or q.ndim != 1:
            raise ValidationError(f"q and v must be 1-d of equal length, got {q.shape}, {v.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
            raise ValidationError("phase point entries must be finite")

    @property
    def n_modes(self) -> int:
        return int(self.q.size)

    def flip_velocity(self) -> "PhasePoint":
        return PhasePoint(self.q, -self.v)
