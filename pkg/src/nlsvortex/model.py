"""Physical models, problem variants, and their closed-form pointwise functions.

Two planar field models are covered, both reduced to a radial amplitude
u(r) of an n-vortex ansatz:

* a logarithmic Gross-Pitaevskii medium with response
  ``alpha * u**2 * log(u**2 / beta)``, and
* a saturable optical medium with response ``u**2 / (1 + s*u**2)**gamma``.

The amplitude solves  u'' + u'/r - (n^2/r^2) u - 2*omega*u - 2*psi(u)*u = 0
with a vortex core u(0) = 0 and one of three outer regimes: zero far-field,
a constant plateau, or a prescribed beam power with omega emerging as a
Lagrange multiplier.
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ParameterError

_TINY = 1e-300


@dataclass(frozen=True)
class Logarithmic:
    """Logarithmic condensate medium; alpha, beta > 0 depend on it alone."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ParameterError("alpha must be a positive finite real")
        if not (math.isfinite(self.beta) and self.beta > 0.0):
            raise ParameterError("beta must be a positive finite real")


@dataclass(frozen=True)
class Saturable:
    """Saturable optical medium with saturation scale s > 0, exponent gamma > 2."""

    s: float
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s > 0.0):
            raise ParameterError("s must be a positive finite real")
        if not (math.isfinite(self.gamma) and self.gamma > 2.0):
            raise ParameterError("gamma must be a finite real > 2")


Nonlinearity = Union[Logarithmic, Saturable]


@dataclass(frozen=True)
class ZeroZero:
    """Homogeneous boundary values u(0) = u(R) = 0.

    ``truncates_infinity`` records whether R stands in for an infinite
    domain (the logarithmic model) rather than a physical wall.
    """

    R: float
    truncates_infinity: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0.0):
            raise ParameterError("R must be a positive finite real")


@dataclass(frozen=True)
class ZeroPlateau:
    """u(0) = 0 with a far-field plateau u -> level > 0 (R truncates infinity)."""

    R: float
    level: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0.0):
            raise ParameterError("R must be a positive finite real")
        if not (math.isfinite(self.level) and self.level > 0.0):
            raise ParameterError("plateau level must be a positive finite real")


@dataclass(frozen=True)
class PowerConstrained:
    """Zero boundary values plus a prescribed beam power 2*pi*int u^2 r dr."""

    R: float
    power: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0.0):
            raise ParameterError("R must be a positive finite real")
        if not (math.isfinite(self.power) and self.power > 0.0):
            raise ParameterError("beam power P0 must be a positive finite real")


BoundaryRegime = Union[ZeroZero, ZeroPlateau, PowerConstrained]


def nonlinear_term(nl, u):
    """Pointwise nonlinear response psi(u) of the medium.

    Logarithmic: alpha*u^2*log(u^2/beta), continuously extended by 0 at
    u = 0 (the log argument is clamped below at 1e-300 so intermediates
    stay finite; the product still vanishes exactly at u = 0).
    Saturable: u^2 / (1 + s*u^2)**gamma.

    Accepts scalars or arrays; rejects non-finite input.
    """
    arr = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ParameterError("nonlinear_term: input amplitude must be finite")
    u2 = arr * arr
    if isinstance(nl, Logarithmic):
        out = nl.alpha * u2 * np.log(np.maximum(u2, _TINY) / nl.beta)
    elif isinstance(nl, Saturable):
        out = u2 / (1.0 + nl.s * u2) ** nl.gamma
    else:
        raise ParameterError(f"unknown nonlinearity {nl!r}")
    if np.isscalar(u) or arr.ndim == 0:
        return float(out)
    return out


def zero_zero_omega_ceiling(alpha, beta):
    """Upper endpoint (1/2) e^(-1/2) alpha beta of the homogeneous window."""
    return 0.5 * math.exp(-0.5) * alpha * beta


def plateau_omega_ceiling(alpha, beta):
    """Upper endpoint (3/4) e^(-1) alpha beta of the plateau window."""
    return 0.75 * math.exp(-1.0) * alpha * beta


def omega_window(nl, regime):
    """Open interval of admissible propagation constants omega.

    Only the logarithmic model has such a window; for the saturable
    model omega is an output (a Lagrange multiplier), so asking for a
    window is an error.  ``regime`` may be a BoundaryRegime instance or
    one of the classes ZeroZero / ZeroPlateau.  Endpoints are exclusive;
    the homogeneous problem additionally requires omega >= mu for a
    caller-chosen floor mu > 0 (see VortexProblem.mu).
    """
    if not isinstance(nl, Logarithmic):
        raise ParameterError("omega window exists only for the logarithmic model "
                             "(omega is an output of the power-constrained problem)")
    kind = regime if isinstance(regime, type) else type(regime)
    if kind is ZeroZero:
        return (0.0, zero_zero_omega_ceiling(nl.alpha, nl.beta))
    if kind is ZeroPlateau:
        return (0.0, plateau_omega_ceiling(nl.alpha, nl.beta))
    raise ParameterError("omega window is defined for ZeroZero and ZeroPlateau regimes only")


def plateau_level(alpha, beta, omega):
    """Largest k > 0 with omega + alpha k^2 log(k^2/beta) = 0.

    Substituting t = k^2, the map t -> t log(t/beta) falls to its minimum
    -beta/e at t = beta/e and rises back to 0 at t = beta, so for
    0 < omega < (3/4) e^-1 alpha beta the largest root lies in
    (beta/e, beta) and bisection on that bracket is monotone.  The
    returned level always satisfies k > sqrt(beta/e).
    """
    ceiling = plateau_omega_ceiling(alpha, beta)
    if not (math.isfinite(omega) and 0.0 < omega < ceiling):
        raise ParameterError(
            f"omega must satisfy 0 < omega < (3/4)e^(-1)*alpha*beta = {ceiling:.5f}")
    lo, hi = beta / math.e, beta

    def resid(t):
        return omega + alpha * t * math.log(t / beta)

    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if resid(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    k = math.sqrt(0.5 * (lo + hi))
    if not k > math.sqrt(beta / math.e):
        raise ParameterError("plateau level failed its lower bound k > sqrt(beta/e)")
    return k


def plateau_stiffness(alpha, beta, omega, k, tol=1e-8):
    """Slope of the plateau reaction at its zero: 4 alpha k^2 (log(k^2/beta) + 1).

    ``k`` must actually be a root of omega + alpha k^2 log(k^2/beta) = 0
    (checked to ``tol * alpha * beta``); the result is then strictly
    positive because k^2 > beta/e.
    """
    resid = omega + alpha * k * k * math.log(k * k / beta)
    if abs(resid) > tol * alpha * beta:
        raise ParameterError(
            f"k = {k!r} is not a root of the plateau condition (residual {resid:.3e})")
    return 4.0 * alpha * k * k * (math.log(k * k / beta) + 1.0)


@dataclass(frozen=True)
class VortexProblem:
    """A fully specified radial vortex problem.

    omega is required for the ZeroZero and ZeroPlateau regimes and must be
    absent for PowerConstrained, where it emerges as a multiplier.  ``mu``
    is an optional validation floor for the homogeneous logarithmic
    problem (defaults to 1e-6 * alpha * beta).
    """

    n: int
    nonlinearity: Nonlinearity
    regime: BoundaryRegime
    omega: Optional[float] = None
    mu: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ParameterError("winding number n must be an integer")
        if self.n == 0:
            raise ParameterError("winding number n must be nonzero")
        if isinstance(self.regime, PowerConstrained):
            if self.omega is not None:
                raise ParameterError("omega is an output of the power-constrained "
                                     "problem and must not be prescribed")
            if not isinstance(self.nonlinearity, Saturable):
                raise ParameterError("the power-constrained problem uses the saturable model")
            return
        if self.omega is None:
            raise ParameterError("omega is required for ZeroZero and ZeroPlateau regimes")
        if not math.isfinite(self.omega):
            raise ParameterError("omega must be finite")
        if self.mu is not None and not (math.isfinite(self.mu) and self.mu > 0.0):
            raise ParameterError("mu must be a positive finite real when given")
        nl = self.nonlinearity
        if isinstance(nl, Logarithmic):
            if isinstance(self.regime, ZeroZero):
                ceiling = zero_zero_omega_ceiling(nl.alpha, nl.beta)
                if not self.omega < ceiling or not self.omega > 0.0:
                    raise ParameterError(
                        "omega must satisfy 0 < omega < (1/2)e^(-1/2)*alpha*beta"
                        f" = {ceiling:.5f}")
                floor = self.mu if self.mu is not None else 1e-6 * nl.alpha * nl.beta
                if self.omega < floor:
                    raise ParameterError(
                        f"omega must satisfy mu <= omega with mu = {floor:.6g}")
            elif isinstance(self.regime, ZeroPlateau):
                ceiling = plateau_omega_ceiling(nl.alpha, nl.beta)
                if not (0.0 < self.omega < ceiling):
                    raise ParameterError(
                        "omega must satisfy 0 < omega < (3/4)e^(-1)*alpha*beta"
                        f" = {ceiling:.5f}")
                k = plateau_level(nl.alpha, nl.beta, self.omega)
                if abs(self.regime.level - k) > 1e-10 * max(1.0, k):
                    raise ParameterError(
                        f"plateau level {self.regime.level!r} does not match the largest "
                        f"root {k!r} of omega + alpha k^2 log(k^2/beta) = 0")
        elif isinstance(nl, Saturable) and isinstance(self.regime, ZeroPlateau):
            raise ParameterError("the plateau regime is defined for the logarithmic model")


def log_zero_problem(alpha, beta, n, omega, R, mu=None):
    """Homogeneous logarithmic problem on [0, R] (R truncating infinity)."""
    return VortexProblem(n=n, nonlinearity=Logarithmic(alpha, beta),
                         regime=ZeroZero(R), omega=omega, mu=mu)


def log_plateau_problem(alpha, beta, n, omega, R):
    """Plateau logarithmic problem; the level is derived from omega."""
    level = plateau_level(alpha, beta, omega)
    return VortexProblem(n=n, nonlinearity=Logarithmic(alpha, beta),
                         regime=ZeroPlateau(R, level), omega=omega)


def saturable_power_problem(s, gamma, n, power, R):
    """Beam-power-constrained saturable problem on [0, R]."""
    return VortexProblem(n=n, nonlinearity=Saturable(s, gamma),
                         regime=PowerConstrained(R, power))
