"""Discretized action functionals, their exact discrete gradients, and the
auxiliary pointwise functions of both models.

The derivative term of every action uses the piecewise-linear (cellwise
exact) Dirichlet form sum_j m_j ((u_{j+1}-u_j)/h_j)^2 with m_j the exact
cell measure of r dr; all pointwise terms go through the nodal quadrature
weights.  Gradients are the exact derivatives of these discrete sums
(discretize-then-differentiate), so line-searched descent on them is
monotone by construction.  The strong-form residual of the vortex ODE is
evaluated independently through three-point difference stencils and serves
as a cross-check on converged minimizers.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import ParameterError
from .grid import RadialGrid, differentiate, second_derivative
from .model import (Logarithmic, PowerConstrained, Saturable, VortexProblem,
                    ZeroPlateau, ZeroZero, nonlinear_term)

_TINY = 1e-300


@dataclass
class Profile:
    """Sampled radial amplitude with a pinned vortex core u(0) = 0."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != self.grid.nodes.shape:
            raise ParameterError("profile length does not match the grid")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("profile values must be finite")
        if vals[0] != 0.0:
            raise ParameterError("the vortex core requires u(0) = 0")
        self.values = vals

    def copy(self):
        return Profile(self.grid, self.values.copy())


@dataclass(frozen=True)
class HomogenizationData:
    """Cutoff ramp and induced source turning the plateau condition homogeneous.

    ``ramp`` rises smoothly (C^2 quintic) from 0 on [0, 1] to ``level`` on
    [2, R]; ``source`` is ramp'' + ramp'/r - n^2 ramp / r^2, which vanishes
    on [0, 1] and equals -n^2 level / r^2 beyond r = 2.
    """

    grid: RadialGrid
    ramp: np.ndarray
    source: np.ndarray
    level: float


def make_homogenization(level, n, grid):
    """Quintic-smoothstep cutoff on [1, 2] and its induced source term."""
    if not (math.isfinite(level) and level > 0.0):
        raise ParameterError("plateau level must be positive")
    if grid.R <= 2.0:
        raise ParameterError("homogenization needs a grid extending past r = 2")
    r = grid.nodes
    x = np.clip(r - 1.0, 0.0, 1.0)
    ramp = level * x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)
    d1 = np.where((r > 1.0) & (r < 2.0), level * 30.0 * x * x * (1.0 - x) ** 2, 0.0)
    d2 = np.where((r > 1.0) & (r < 2.0),
                  level * 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x), 0.0)
    source = np.zeros_like(r)
    outer = r > 1.0
    source[outer] = (d2[outer] + d1[outer] / r[outer]
                     - n * n * ramp[outer] / r[outer] ** 2)
    ramp.flags.writeable = False
    source.flags.writeable = False
    return HomogenizationData(grid=grid, ramp=ramp, source=source, level=float(level))


def centrifugal(grid, n):
    """n^2 / r^2 sampled on the grid, zeroed at the origin node.

    The origin carries zero quadrature weight, so the value there never
    enters an integral; zeroing it just keeps intermediates finite.
    """
    out = np.zeros_like(grid.nodes)
    out[1:] = (n * n) / grid.nodes[1:] ** 2
    return out


def _require(problem, nl_type, regime_type, what):
    if not isinstance(problem.nonlinearity, nl_type) or not isinstance(problem.regime, regime_type):
        raise ParameterError(f"{what} is defined for the "
                             f"{nl_type.__name__}/{regime_type.__name__} problem")


# ---------------------------------------------------------------------------
# pointwise auxiliaries
# ---------------------------------------------------------------------------

def potential_density(s, beta):
    """Quartic potential density s^4 log(s^2/beta) - s^4/2.

    Strictly positive for |s| > e^(1/4) sqrt(beta) and o(s^2) at the
    origin; the action of the homogeneous logarithmic problem decomposes
    as I(u) = ||u||^2/2 + (alpha/2) * integral of this density.
    """
    arr = np.asarray(s, dtype=np.float64)
    s2 = arr * arr
    out = s2 * s2 * np.log(np.maximum(s2, _TINY) / beta) - 0.5 * s2 * s2
    return float(out) if arr.ndim == 0 else out


def flat_action_density(s, omega, alpha, beta):
    """Action density s^2 (2 omega + alpha s^2 log(s^2/beta) - alpha s^2 / 2)
    of a spatially constant amplitude; negative somewhere inside the
    existence window, which is what the negative-action trial exploits."""
    arr = np.asarray(s, dtype=np.float64)
    s2 = arr * arr
    out = 2.0 * omega * s2 + alpha * (s2 * s2 * np.log(np.maximum(s2, _TINY) / beta)
                                      - 0.5 * s2 * s2)
    return float(out) if arr.ndim == 0 else out


def plateau_force(t, omega, alpha, beta):
    """Reaction term of the plateau problem: 2 omega t + 2 alpha t^3 log(t^2/beta)
    for t >= 0, linearized to 2 omega t for t < 0."""
    out = _k.plateau_force_numpy(t, omega, alpha, beta)
    return float(out) if np.ndim(t) == 0 else out


def plateau_potential(t, omega, alpha, beta):
    """Closed-form primitive of plateau_force with value 0 at t = 0."""
    out = _k.plateau_potential_numpy(t, omega, alpha, beta)
    return float(out) if np.ndim(t) == 0 else out


def saturable_potential_density(t, s, gamma):
    """Nonnegative potential density q(t) of the saturable action; q(0) = 0."""
    out = _k.sat_potential_numpy(t, s, gamma)
    return float(out) if np.ndim(t) == 0 else out


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------

def weighted_norm(problem, profile):
    """Norm (int (u'^2 + (n^2/r^2 + 2 omega) u^2) r dr)^(1/2) of the space
    underlying the homogeneous logarithmic problem (needs omega > 0)."""
    _require(problem, Logarithmic, ZeroZero, "the weighted norm")
    if not problem.omega > 0.0:
        raise ParameterError("the weighted norm needs omega > 0 to be positive definite")
    g, u = profile.grid, profile.values
    avec = centrifugal(g, problem.n) + 2.0 * problem.omega
    quad = float(np.dot(g.node_mass, avec * u * u))
    return math.sqrt(_k.dirichlet_sum(u, g.stiffness) + quad)


def log_action(problem, profile):
    """Action of the homogeneous logarithmic problem,
    (1/2) int {u'^2 + (n^2/r^2 + 2w) u^2 + a u^4 log(u^2/b) - (a/2) u^4} r dr."""
    _require(problem, Logarithmic, ZeroZero, "the logarithmic action")
    g, u = profile.grid, profile.values
    nl = problem.nonlinearity
    avec = centrifugal(g, problem.n) + 2.0 * problem.omega
    return _k.log_action_sum(u, g.node_mass, avec, g.stiffness, nl.alpha, nl.beta)


def plateau_action(problem, v_profile, hom=None):
    """Homogenized plateau action
    int {v'^2/2 + (n^2/r^2) v^2/2 + G(v + ramp) - G(level) - source*v} r dr.

    ``v_profile`` holds the shifted unknown v = u - ramp with v(0) = v(R) = 0.
    """
    _require(problem, Logarithmic, ZeroPlateau, "the plateau action")
    g, v = v_profile.grid, v_profile.values
    if v[-1] != 0.0:
        raise ParameterError("the plateau unknown v must vanish at both ends")
    if hom is None:
        hom = make_homogenization(problem.regime.level, problem.n, g)
    nl = problem.nonlinearity
    nr2 = centrifugal(g, problem.n)
    level_pot = plateau_potential(hom.level, problem.omega, nl.alpha, nl.beta)
    return _k.plateau_action_sum(v, g.node_mass, nr2, g.stiffness, hom.ramp, hom.source,
                                 problem.omega, nl.alpha, nl.beta, level_pot)


def saturable_action(problem, profile):
    """Saturable action J(u): Dirichlet/centrifugal part plus the
    nonnegative saturation potential (no omega term; omega is a multiplier)."""
    _require(problem, Saturable, PowerConstrained, "the saturable action")
    g, u = profile.grid, profile.values
    nl = problem.nonlinearity
    nr2 = centrifugal(g, problem.n)
    return _k.sat_action_sum(u, g.node_mass, nr2, g.stiffness, nl.s, nl.gamma)


def beam_power(profile):
    """Beam power 2 pi int u^2 r dr."""
    g, u = profile.grid, profile.values
    return 2.0 * math.pi * float(np.dot(g.node_mass, u * u))


def beam_power_gradient(profile):
    """Nodal gradient of the beam power: 4 pi * (weights * u)."""
    return 4.0 * math.pi * profile.grid.node_mass * profile.values


def action_gradient(problem, profile, hom=None):
    """Exact nodal gradient of the discretized action for ``problem``.

    The directional derivative of the discrete action along any nodal
    perturbation h equals dot(gradient, h); boundary entries are zero
    (both end values are pinned unknowns).  For the plateau problem the
    profile holds the shifted unknown v.
    """
    g = profile.grid
    u = profile.values
    nl = problem.nonlinearity
    if isinstance(problem.regime, ZeroZero) and isinstance(nl, Logarithmic):
        avec = centrifugal(g, problem.n) + 2.0 * problem.omega
        return _k.log_action_grad(u, g.node_mass, avec, g.stiffness, nl.alpha, nl.beta)
    if isinstance(problem.regime, ZeroPlateau):
        if hom is None:
            hom = make_homogenization(problem.regime.level, problem.n, g)
        nr2 = centrifugal(g, problem.n)
        return _k.plateau_action_grad(u, g.node_mass, nr2, g.stiffness, hom.ramp,
                                      hom.source, problem.omega, nl.alpha, nl.beta)
    if isinstance(problem.regime, PowerConstrained):
        nr2 = centrifugal(g, problem.n)
        return _k.sat_action_grad(u, g.node_mass, nr2, g.stiffness, nl.s, nl.gamma)
    raise ParameterError("no action gradient for this problem combination")


# ---------------------------------------------------------------------------
# strong-form residual
# ---------------------------------------------------------------------------

def _resolve_omega(problem, omega):
    if omega is None:
        omega = problem.omega
    if omega is None:
        raise ParameterError("omega must be supplied for the power-constrained problem")
    return float(omega)


def ode_residual(problem, profile, omega=None):
    """Residual u'' + u'/r - (n^2/r^2) u - 2 omega u - 2 psi(u) u at every
    interior node via three-point differences (zeros at the two ends)."""
    omega = _resolve_omega(problem, omega)
    g, u = profile.grid, profile.values
    r = g.nodes
    d1 = differentiate(g, u)
    d2 = second_derivative(g, u)
    res = np.zeros_like(u)
    i = slice(1, -1)
    res[i] = (d2[i] + d1[i] / r[i]
              - centrifugal(g, problem.n)[i] * u[i]
              - 2.0 * omega * u[i]
              - 2.0 * nonlinear_term(problem.nonlinearity, u[i]) * u[i])
    return res


def scaled_residual_norm(problem, profile, omega=None):
    """Sup over interior nodes of |residual| / (1 + sum of term magnitudes).

    The pointwise scale keeps the check meaningful near the core, where
    individual terms grow like n^2/r^2 and the raw residual of a smooth
    profile is dominated by the first-derivative stencil error.
    """
    omega = _resolve_omega(problem, omega)
    g, u = profile.grid, profile.values
    r = g.nodes
    d1 = differentiate(g, u)
    d2 = second_derivative(g, u)
    i = slice(1, -1)
    psi_u = nonlinear_term(problem.nonlinearity, u[i]) * u[i]
    res = (d2[i] + d1[i] / r[i]
           - centrifugal(g, problem.n)[i] * u[i]
           - 2.0 * omega * u[i]
           - 2.0 * psi_u)
    scale = (1.0 + np.abs(d2[i]) + np.abs(d1[i]) / r[i]
             + (centrifugal(g, problem.n)[i] + 2.0 * abs(omega)) * np.abs(u[i])
             + 2.0 * np.abs(psi_u))
    return float(np.max(np.abs(res) / scale))
