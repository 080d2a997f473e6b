"""Radially symmetric vortex profiles of two nonlinear Schrodinger models.

Variational minimization, power-constrained minimization with multiplier
extraction, and an independent shooting oracle for the n-vortex radial
equation with a logarithmic (condensate) or saturable (optical)
nonlinearity.
"""

from ._kernels import JIT_ENABLED
from .analysis import (CheckResult, DecayFit, NegativeActionCertificate,
                       OmegaBound, PlateauCertificate, TentCertificate,
                       certify_negative_action, check_omega_in_bound, fit_decay,
                       minimizing_flat_amplitude, omega_bound, plateau_certificate,
                       saturable_peak_response, tent_certificate, tent_profile,
                       trial_action_terms, trial_profile, verification_suite)
from .energy import (HomogenizationData, Profile, action_gradient, beam_power,
                     beam_power_gradient, centrifugal, flat_action_density,
                     log_action, make_homogenization, ode_residual,
                     plateau_action, plateau_force, plateau_potential,
                     potential_density, saturable_action,
                     saturable_potential_density, scaled_residual_norm,
                     weighted_norm)
from .errors import ParameterError, ShootBlowupError, SolverError
from .grid import RadialGrid, differentiate, integrate, make_grid, second_derivative
from .model import (BoundaryRegime, Logarithmic, Nonlinearity, PowerConstrained,
                    Saturable, VortexProblem, ZeroPlateau, ZeroZero,
                    log_plateau_problem, log_zero_problem, nonlinear_term,
                    omega_window, plateau_level, plateau_omega_ceiling,
                    plateau_stiffness, saturable_power_problem,
                    zero_zero_omega_ceiling)
from .solver import (GivenInit, RandomInit, SolveReport, SolverConfig, TentInit,
                     TrialInit, extract_multiplier, minimize_constrained,
                     minimize_unconstrained, shoot, shoot_match)

__version__ = "0.1.0"
