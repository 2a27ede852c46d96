"""Change-of-measure functionals on path space.

The target measure has density proportional to exp(-psi(q)) with respect to
the Gaussian reference, with

    psi(q) = 1/2 * integral_0^T V(q(tau)) dtau

evaluated by trapezoid quadrature on a uniform grid.  The synthesized path
vanishes at the endpoints, so their (constant) contribution V(0) enters psi
but never its gradient.  The discrete gradient is exact for the discrete
functional: differentiating the quadrature sum gives the pointwise field
V'(q(tau))/2 projected back to coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralPrior, ValidationError


@dataclass(frozen=True)
class DoubleWellPotential:
    """V(u) = (u^2 - 1)^2, the symmetric quartic double well."""

    is_zero: bool = False

    def v(self, u):
        return (u * u - 1.0) ** 2

    def dv(self, u):
        return 4.0 * u * (u * u - 1.0)


@dataclass(frozen=True)
class ZeroPotential:
    """V identically 0: the target coincides with the Gaussian reference."""

    is_zero: bool = True

    def v(self, u):
        return np.zeros_like(u)

    def dv(self, u):
        return np.zeros_like(u)


POTENTIALS = {
    "gaussian": ZeroPotential,
    "double-well": DoubleWellPotential,
}


@dataclass(frozen=True)
class TargetModel:
    """A potential, its quadrature grid, and the induced functionals.

    All evaluation methods accept batched coefficient arrays of shape
    (..., N); the trailing axis is the mode index.
    """

    prior: SpectralPrior
    potential: object
    grid_size: int
    label: str = "custom"

    def __post_init__(self):
        if self.grid_size < 2 * self.prior.n_modes:
            raise ValidationError(
                f"grid_size {self.grid_size} < 2 N = {2 * self.prior.n_modes}")
        # warm the basis cache so evaluation never mutates shared state later
        self.prior.basis_matrix(self.grid_size)

    @property
    def is_gaussian(self) -> bool:
        return bool(getattr(self.potential, "is_zero", False))

    @property
    def _weight(self) -> float:
        return self.prior.interval_length / self.grid_size

    def psi(self, q: np.ndarray):
        """Quadrature value of 1/2 integral V(q(tau)) dtau, endpoints included."""
        return self.psi_and_grad(q)[0]

    def grad_psi(self, q: np.ndarray) -> np.ndarray:
        """Gradient of psi in H: coefficients of the field V'(q(tau))/2."""
        return self.psi_and_grad(q)[1]

    def psi_and_grad(self, q: np.ndarray):
        """Evaluate psi and grad_psi from a single synthesis of the path."""
        q = np.asarray(q, dtype=float)
        if self.is_gaussian:
            return np.zeros(q.shape[:-1]), np.zeros_like(q)
        S = self.prior.basis_matrix(self.grid_size)
        w = self._weight
        with np.errstate(over="ignore", invalid="ignore"):
            path = q @ S.T
            # trapezoid: interior weight w, both zero endpoints weight w/2 each
            psi = 0.5 * w * (np.sum(self.potential.v(path), axis=-1)
                             + self.potential.v(0.0))
            grad = w * ((0.5 * self.potential.dv(path)) @ S)
        return psi, grad

    def cov_grad_psi(self, q: np.ndarray) -> np.ndarray:
        """C grad_psi(q): the gradient seen by the velocity equation."""
        return self.grad_psi(q) * self.prior.eigenvalues ** 2

    def force(self, q: np.ndarray) -> np.ndarray:
        """F(q) = q + C grad_psi(q), the drift of the velocity equation."""
        return q + self.cov_grad_psi(q)


def make_target(label: str, prior: SpectralPrior, grid_size: int) -> TargetModel:
    """Look up a registered potential by label and bind it to a prior/grid."""
    try:
        pot = POTENTIALS[label]()
    except KeyError:
        raise ValidationError(
            f"unknown target label {label!r}; known: {sorted(POTENTIALS)}") from None
    return TargetModel(prior=prior, potential=pot, grid_size=grid_size, label=label)
