"""Function-space SOL-HMC sampling on spectrally truncated Gaussian measures."""

from .spectral import (PhasePoint, SpectralPrior, ValidationError,
                       bridge_eigenvalues, bridge_prior)
from .targets import (DoubleWellPotential, TargetModel, ZeroPotential, make_target)
from .integrators import (IntegratorParams, delta_to_iota, flow_jacobian_det,
                          hamiltonian, integrate, iota_to_delta, kick, ou_step,
                          rotate, split_step)
from .sampler import (ChainEnsemble, ChainTrace, NumericalAbort, SamplerConfig,
                      preset, run_chain, sol_hmc_step)
from .sde import SdeParams, sde_step, simulate
from .analysis import (acceptance_scaling_study, diffusion_limit_study, e_of_n,
                       interpolant, invariance_study, mixing_curve,
                       running_mean_path)

__version__ = "0.1.0"

__all__ = [
    "PhasePoint", "SpectralPrior", "ValidationError", "bridge_eigenvalues",
    "bridge_prior", "DoubleWellPotential", "TargetModel", "ZeroPotential",
    "make_target", "IntegratorParams", "delta_to_iota", "flow_jacobian_det",
    "hamiltonian", "integrate", "iota_to_delta", "kick", "ou_step", "rotate",
    "split_step", "ChainEnsemble", "ChainTrace", "NumericalAbort",
    "SamplerConfig", "preset", "run_chain", "sol_hmc_step", "SdeParams",
    "sde_step", "simulate", "acceptance_scaling_study", "diffusion_limit_study",
    "e_of_n", "interpolant", "invariance_study", "mixing_curve",
    "running_mean_path",
]
