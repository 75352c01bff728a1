"""Effective master equations for systems kicked by units, with rate-level thermodynamics."""

from .drive import DriveMimicResult, DriveMimicSpec, drive_mimic
from .poisson import (EnsembleRates, PoissonKickSpec, RateLedger, background_generator,
                      ensemble_rates, entropy_bookkeeping_residual, jump_superoperators,
                      kraus_operators, naive_effective_sigma, poisson_generator, poisson_rates)
from .regular import (CenteringError, RegularKickRates, RegularKickSpec, collision_step,
                      double_commutator_generator, finite_step_information_rate, operator_schmidt,
                      regular_kick_generator, regular_kick_rates)
from .trajectories import TrajectoryResult, trajectory_sampler

__all__ = [
    "CenteringError", "DriveMimicResult", "DriveMimicSpec", "EnsembleRates", "PoissonKickSpec",
    "RateLedger", "RegularKickRates", "RegularKickSpec", "TrajectoryResult", "background_generator",
    "collision_step", "double_commutator_generator", "drive_mimic", "ensemble_rates",
    "entropy_bookkeeping_residual", "finite_step_information_rate", "jump_superoperators",
    "kraus_operators", "naive_effective_sigma", "operator_schmidt", "poisson_generator",
    "poisson_rates", "regular_kick_generator", "regular_kick_rates", "trajectory_sampler",
]
