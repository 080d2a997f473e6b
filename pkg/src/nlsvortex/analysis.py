"""Post-hoc verification: decay fits, multiplier bounds, and trial certificates.

Everything here is pure verification over already-computed profiles or
closed forms; nothing mutates solver state, so all of it can run freely in
parallel or inside the CLI ``verify`` command.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .energy import (Profile, beam_power, flat_action_density, log_action,
                     make_homogenization, plateau_force, saturable_action,
                     saturable_potential_density, action_gradient, plateau_action)
from .errors import ParameterError
from .grid import _segment_weights, make_grid
from .model import (Logarithmic, ZeroPlateau, ZeroZero, log_plateau_problem,
                    log_zero_problem, plateau_stiffness, saturable_power_problem)

_EPS = np.finfo(np.float64).eps


# ---------------------------------------------------------------------------
# decay of homogeneous tails
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    """Log-linear fit of a profile tail: u ~ exp(-rate * r) on ``window``."""

    rate: float
    window: tuple
    rsquared: float
    predicted_rate: float


def fit_decay(profile, omega, max_fraction=0.1, floor_factor=100.0, boundary_cut=0.9):
    """Least-squares slope of log u on the far tail.

    The window keeps nodes where u has fallen below ``max_fraction`` of its
    peak but stays above ``floor_factor`` machine epsilons of it, and stops
    at ``boundary_cut * R``: past that the pinned endpoint drags u below
    its exponential envelope and would poison the fit.  The reference rate
    is the asymptotic sqrt(2 omega).
    """
    r = profile.grid.nodes
    u = profile.values
    umax = float(np.max(u))
    if not umax > 0.0:
        raise ParameterError("decay fit needs a nontrivial profile")
    ipeak = int(np.argmax(u))
    mask = ((u < max_fraction * umax)
            & (u > floor_factor * _EPS * umax)
            & (r <= boundary_cut * r[-1]))
    mask[:ipeak + 1] = False
    if int(mask.sum()) < 8:
        raise ParameterError("decay window is empty; enlarge the domain radius R")
    rw = r[mask]
    yw = np.log(u[mask])
    slope, intercept = np.polyfit(rw, yw, 1)
    fitted = slope * rw + intercept
    ss_res = float(np.sum((yw - fitted) ** 2))
    ss_tot = float(np.sum((yw - yw.mean()) ** 2))
    rsq = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    if not slope < 0.0:
        raise ParameterError("tail is not decaying; no exponential rate to fit")
    return DecayFit(rate=-float(slope), window=(float(rw[0]), float(rw[-1])),
                    rsquared=rsq, predicted_rate=math.sqrt(2.0 * omega))


# ---------------------------------------------------------------------------
# multiplier bound for the constrained problem
# ---------------------------------------------------------------------------

def saturable_peak_response(s, gamma):
    """max over u of u^2/(1+s u^2)^gamma = (gamma-1)^(gamma-1) / (s gamma^gamma),
    attained at u^2 = 1/(s (gamma-1))."""
    return (gamma - 1.0) ** (gamma - 1.0) / (s * gamma ** gamma)


@dataclass(frozen=True)
class OmegaBound:
    """Closed-form enclosure lower <= omega < 0 for the extracted multiplier."""

    lower: float
    upper: float
    s: float
    gamma: float
    n: int
    power: float


def omega_bound(s, gamma, n, power):
    """Lower bound -peak_response - sqrt(24 pi (1 + n^2(2 ln 2 - 1)) /
    (s^2 (gamma-1)(gamma-2) P0)); the upper bound is always 0 (exclusive)."""
    if not (s > 0.0 and gamma > 2.0 and power > 0.0):
        raise ParameterError("need s > 0, gamma > 2, P0 > 0")
    if n == 0:
        raise ParameterError("winding number n must be nonzero")
    kin = 1.0 + n * n * (2.0 * math.log(2.0) - 1.0)
    lower = -(saturable_peak_response(s, gamma)
              + math.sqrt(24.0 * math.pi * kin / (s * s * (gamma - 1.0) * (gamma - 2.0) * power)))
    return OmegaBound(lower=lower, upper=0.0, s=s, gamma=gamma, n=n, power=power)


def check_omega_in_bound(report, bound):
    """True iff the report's propagation constant lies in [lower, 0)."""
    return bool(bound.lower <= report.omega < 0.0)


# ---------------------------------------------------------------------------
# trial profiles and certificates
# ---------------------------------------------------------------------------

def tent_profile(grid, a, b):
    """Tent u = (b/a) r up to a, (b/a)(2a - r) up to 2a, zero beyond."""
    if not (a > 0.0 and b > 0.0):
        raise ParameterError("tent needs a, b > 0")
    if 2.0 * a > grid.R * (1.0 + 1e-12):
        raise ParameterError("tent support [0, 2a] exceeds the grid")
    r = grid.nodes
    vals = np.where(r <= a, (b / a) * r, np.where(r <= 2.0 * a, (b / a) * (2.0 * a - r), 0.0))
    vals[0] = 0.0
    vals[-1] = max(vals[-1], 0.0) if r[-1] < 2.0 * a else 0.0
    return Profile(grid, vals)


def trial_profile(grid, level, rate, plateau_radius):
    """Negative-action trial: level*r on [0,1), flat level on [1, plateau_radius),
    exponential tail level*exp(rate*(plateau_radius - r)) beyond, truncated
    (pinned to zero) at the grid end."""
    if not (level > 0.0 and rate > 0.0):
        raise ParameterError("trial needs level > 0 and rate > 0")
    if not 1.0 < plateau_radius < grid.R:
        raise ParameterError("trial plateau radius must lie in (1, R)")
    r = grid.nodes
    vals = np.where(r < 1.0, level * r,
                    np.where(r < plateau_radius, level,
                             level * np.exp(rate * (plateau_radius - r))))
    vals[0] = 0.0
    vals[-1] = 0.0
    return Profile(grid, vals)


def minimizing_flat_amplitude(alpha, beta, omega):
    """Amplitude minimizing the flat action density; its density is negative
    anywhere inside the existence window, which the trial construction needs."""
    scan = np.geomspace(0.05 * math.sqrt(beta), 2.0 * math.sqrt(beta), 801)
    dens = flat_action_density(scan, omega, alpha, beta)
    j = int(np.argmin(dens))
    if not dens[j] < 0.0:
        raise ParameterError("no amplitude with negative flat action density: "
                             "omega violates the existence window")
    return float(scan[j])


def trial_action_terms(alpha, beta, n, omega, plateau_radius, resolution=0.01):
    """Discrete action of the canonical trial and its predicted leading term.

    The prediction is flat_density(level) * plateau_radius^2 / 4: the flat
    segment contributes half its density integral, and the action carries
    another overall half.  Everything else (core ramp, centrifugal log,
    exponential tail) is O(plateau_radius).
    """
    level = minimizing_flat_amplitude(alpha, beta, omega)
    rate = math.sqrt(2.0 * omega)
    R = plateau_radius + max(20.0 / rate, 10.0)
    cells = max(2048, int(R / resolution))
    g = make_grid(R, cells)
    problem = log_zero_problem(alpha, beta, n, omega, R)
    v = trial_profile(g, level, rate, plateau_radius)
    value = log_action(problem, v)
    predicted = 0.25 * flat_action_density(level, omega, alpha, beta) * plateau_radius ** 2
    return value, predicted


@dataclass(frozen=True)
class NegativeActionCertificate:
    level: float
    rate: float
    plateau_radius: float
    action_value: float
    predicted_leading: float
    succeeded: bool
    doublings: int


def certify_negative_action(problem, start_radius=4.0, max_doublings=20, resolution=0.01):
    """Double the trial plateau radius until its action is negative.

    Succeeding certifies the minimizer is nontrivial: descent started from
    the trial can only lower the action further, so the solution's action
    is strictly negative.
    """
    if not (isinstance(problem.nonlinearity, Logarithmic)
            and isinstance(problem.regime, ZeroZero)):
        raise ParameterError("the negative-action certificate covers the "
                             "homogeneous logarithmic problem")
    nl = problem.nonlinearity
    level = minimizing_flat_amplitude(nl.alpha, nl.beta, problem.omega)
    rate = math.sqrt(2.0 * problem.omega)
    radius = start_radius
    for j in range(max_doublings + 1):
        value, predicted = trial_action_terms(nl.alpha, nl.beta, problem.n,
                                              problem.omega, radius, resolution)
        if value < 0.0:
            return NegativeActionCertificate(level=level, rate=rate, plateau_radius=radius,
                                             action_value=value, predicted_leading=predicted,
                                             succeeded=True, doublings=j)
        radius *= 2.0
    return NegativeActionCertificate(level=level, rate=rate, plateau_radius=radius / 2.0,
                                     action_value=value, predicted_leading=predicted,
                                     succeeded=False, doublings=max_doublings)


@dataclass(frozen=True)
class TentCertificate:
    power_quadrature: float
    power_exact: float
    action_value: float
    action_bound: float
    optimized_bound: float
    power_ok: bool
    action_ok: bool


def tent_certificate(s, gamma, n, a, b, grid):
    """Check the tent identities: exact beam power (4 pi / 3) a^2 b^2 and the
    closed-form action bound b^2(1 + n^2(2 ln 2 - 1)) + 2 a^2/(s^2(g-1)(g-2))."""
    if abs(grid.R - 2.0 * a) > 1e-12 * max(1.0, a):
        raise ParameterError("the tent certificate needs a grid with R = 2a")
    u0 = tent_profile(grid, a, b)
    power_quad = beam_power(u0)
    power_exact = (4.0 * math.pi / 3.0) * a * a * b * b
    problem = saturable_power_problem(s, gamma, n, power_exact, 2.0 * a)
    value = saturable_action(problem, u0)
    kin = 1.0 + n * n * (2.0 * math.log(2.0) - 1.0)
    bound = b * b * kin + 2.0 * a * a / (s * s * (gamma - 1.0) * (gamma - 2.0))
    optimized = math.sqrt(6.0 * kin * power_exact / (math.pi * s * s * (gamma - 1.0) * (gamma - 2.0)))
    power_ok = abs(power_quad - power_exact) <= 10.0 * power_exact / grid.ncells ** 2
    action_ok = value <= bound * (1.0 + 1e-12)
    return TentCertificate(power_quadrature=power_quad, power_exact=power_exact,
                           action_value=value, action_bound=bound,
                           optimized_bound=optimized, power_ok=power_ok,
                           action_ok=action_ok)


@dataclass(frozen=True)
class PlateauCertificate:
    core_ok: bool
    max_rel_deviation: float
    force_sup: float
    window: tuple
    ok: bool


def plateau_certificate(problem, report, rel_tol=1e-4, force_tol=1e-3):
    """Assert u(0) = 0 and |u - level| <= rel_tol * level on the outer
    quarter of the grid, plus smallness of the plateau reaction g(u) there.

    Mind the physics when choosing R: the approach to the plateau is
    algebraic, u - level ~ -n^2 level / (g'(level) r^2), so the achievable
    rel_tol on [3R/4, R] scales like 1/R^2.
    """
    if not isinstance(problem.regime, ZeroPlateau):
        raise ParameterError("the plateau certificate needs a ZeroPlateau problem")
    level = problem.regime.level
    nl = problem.nonlinearity
    prof = report.profile
    r = prof.grid.nodes
    u = prof.values
    quarter = r >= 0.75 * r[-1]
    dev = float(np.max(np.abs(u[quarter] - level))) / level
    force = float(np.max(np.abs(plateau_force(u[quarter], problem.omega,
                                              nl.alpha, nl.beta))))
    core_ok = u[0] == 0.0
    ok = core_ok and dev <= rel_tol and force <= force_tol
    return PlateauCertificate(core_ok=core_ok, max_rel_deviation=dev, force_sup=force,
                              window=(float(0.75 * r[-1]), float(r[-1])), ok=ok)


# ---------------------------------------------------------------------------
# pure-math verification suite (CLI `verify`, acceptance criterion bundle)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check_q_nonneg(rng):
    t = rng.uniform(-10.0, 10.0, size=100_000)
    s = 10.0 ** rng.uniform(-2.0, 2.0, size=100_000)
    gam = rng.uniform(2.05, 8.0, size=100_000)
    q = saturable_potential_density(t, s, gam)
    qmin = float(np.min(q))
    return CheckResult("saturable_potential_nonnegative", qmin >= -1e-14,
                       f"min q over 1e5 draws = {qmin:.3e}")


def _check_tent_power():
    g = make_grid(2.0, 2000)
    cert = tent_certificate(1.0, 3.0, 1, 1.0, 1.0, g)
    err = abs(cert.power_quadrature - cert.power_exact) / cert.power_exact
    return CheckResult("tent_beam_power_identity", cert.power_ok,
                       f"relative error {err:.3e} at 2000 cells")


def _check_tent_action():
    g = make_grid(2.0, 2000)
    cert = tent_certificate(1.0, 3.0, 1, 1.0, 1.0, g)
    return CheckResult("tent_action_bound", cert.action_ok,
                       f"J = {cert.action_value:.6f} <= bound {cert.action_bound:.6f}")


def _check_schwartz_bound():
    from scipy.optimize import minimize_scalar

    s, gamma, n = 1.0, 3.0, 1
    power = 4.0 * math.pi / 3.0
    kin = 1.0 + n * n * (2.0 * math.log(2.0) - 1.0)

    def rhs(bb):
        return (bb * kin + 3.0 * power / (2.0 * math.pi * bb * s * s * (gamma - 1.0) * (gamma - 2.0)))

    res = minimize_scalar(rhs, bounds=(1e-3, 1e3), method="bounded",
                          options={"xatol": 1e-13})
    closed = math.sqrt(6.0 * kin * power / (math.pi * s * s * (gamma - 1.0) * (gamma - 2.0)))
    err = abs(res.fun - closed) / closed
    return CheckResult("optimized_tent_bound_matches_closed_form", err <= 1e-10,
                       f"relative error {err:.3e}")


def _check_peak_response(rng):
    worst = 0.0
    for _ in range(20):
        s = 10.0 ** rng.uniform(-1.5, 1.5)
        gamma = rng.uniform(2.1, 7.0)
        ustar = 1.0 / math.sqrt(s * (gamma - 1.0))
        scan = np.linspace(0.8 * ustar, 1.2 * ustar, 20001)
        grid_max = float(np.max(scan ** 2 / (1.0 + s * scan ** 2) ** gamma))
        closed = saturable_peak_response(s, gamma)
        worst = max(worst, abs(grid_max - closed) / closed)
    return CheckResult("bound_first_term_grid_search", worst <= 1e-6,
                       f"worst relative mismatch {worst:.3e} over 20 draws")


def _check_plateau_segment_identity():
    # trapezoid-closed trial: level*r, flat level on [1, R-1], level*(R-r) on [R-1, R]
    R = 1000.0
    h = 0.01
    level, n = 0.9, 1
    nodes = np.linspace(0.0, R, int(R / h) + 1)
    i1 = int(round(1.0 / h))
    iR1 = int(round((R - 1.0) / h))
    v = np.where(nodes < 1.0, level * nodes,
                 np.where(nodes <= R - 1.0, level, level * (R - nodes)))
    # derivative part, exact for the piecewise-linear trial: only the end ramp
    mass = (nodes[1:] ** 2 - nodes[:-1] ** 2) / 2.0
    dir_part = float(np.sum(mass[iR1:] * level * level))
    wseg = _segment_weights(nodes[i1:])
    n2_part = float(np.dot(wseg, (n * n) * v[i1:] ** 2 / nodes[i1:] ** 2))
    lhs = dir_part + n2_part
    rhs = level * level * (2.0 * R - 1.0) / 2.0 + n * n * level * level * math.log(R)
    err = abs(lhs - rhs) / abs(rhs)
    return CheckResult("plateau_segment_identity", err <= 1e-6,
                       f"relative mismatch {err:.3e} at R = {R:g}")


def _check_stiffness_forms(rng):
    worst = 0.0
    for _ in range(20):
        alpha = 10.0 ** rng.uniform(-1.0, 1.0)
        beta = 10.0 ** rng.uniform(-1.0, 1.0)
        omega = rng.uniform(0.05, 0.95) * 0.75 * math.exp(-1.0) * alpha * beta
        from .model import plateau_level
        k = plateau_level(alpha, beta, omega)
        factored = plateau_stiffness(alpha, beta, omega, k)
        direct = 2.0 * omega + 6.0 * alpha * k * k * math.log(k * k / beta) + 4.0 * alpha * k * k
        worst = max(worst, abs(factored - direct) / abs(factored))
    return CheckResult("plateau_stiffness_two_forms", worst <= 1e-10,
                       f"worst relative mismatch {worst:.3e}")


def _check_force_potential(rng):
    from .energy import plateau_potential
    omega, alpha, beta = 0.2, 1.0, 1.0
    t = np.linspace(-2.0, 2.0, 4001)
    h = 1e-6
    fd = (plateau_potential(t + h, omega, alpha, beta)
          - plateau_potential(t - h, omega, alpha, beta)) / (2.0 * h)
    err = float(np.max(np.abs(fd - plateau_force(t, omega, alpha, beta))))
    return CheckResult("plateau_force_is_potential_derivative", err <= 1e-8,
                       f"max |FD - force| = {err:.3e}")


def _check_trial_ratio():
    ratios = []
    for radius in (64.0, 128.0, 256.0):
        value, predicted = trial_action_terms(1.0, 1.0, 1, 0.2, radius)
        ratios.append(value / predicted)
    ok = abs(ratios[-1] - 1.0) <= 0.15
    return CheckResult("trial_action_leading_term_ratio", ok,
                       "value/predicted at doubling radii: "
                       + ", ".join(f"{x:.4f}" for x in ratios))


def _check_gradient_fd(rng):
    from .energy import action_gradient as grad_of

    g = make_grid(8.0, 160)
    hom_prob = log_plateau_problem(1.0, 1.0, 1, 0.1, 8.0)
    hom = make_homogenization(hom_prob.regime.level, hom_prob.n, g)
    zz_prob = log_zero_problem(1.0, 1.0, 1, 0.2, 8.0)
    sat_prob = saturable_power_problem(1.0, 3.0, 1, 2.0, 8.0)

    cases = [
        ("log", lambda u: log_action(zz_prob, Profile(g, u)),
         lambda u: grad_of(zz_prob, Profile(g, u))),
        ("plateau", lambda u: plateau_action(hom_prob, Profile(g, u), hom),
         lambda u: grad_of(hom_prob, Profile(g, u), hom)),
        ("saturable", lambda u: saturable_action(sat_prob, Profile(g, u)),
         lambda u: grad_of(sat_prob, Profile(g, u))),
    ]
    worst = 0.0
    eps = 1e-5
    for _name, fn, gr in cases:
        for _ in range(20):
            u = rng.uniform(0.1, 1.0, size=g.nodes.shape[0])
            u[1:-1] = 0.25 * u[:-2] + 0.5 * u[1:-1] + 0.25 * u[2:]
            u[0] = 0.0
            u[-1] = 0.0
            hdir = rng.standard_normal(g.nodes.shape[0])
            hdir[0] = 0.0
            hdir[-1] = 0.0
            fd = (fn(u + eps * hdir) - fn(u - eps * hdir)) / (2.0 * eps)
            dg = float(np.dot(gr(u), hdir))
            worst = max(worst, abs(fd - dg) / max(1e-30, abs(dg)))
    return CheckResult("gradient_matches_finite_differences", worst <= 1e-5,
                       f"worst relative error {worst:.3e} over 3 x 20 profiles")


def verification_suite(seed=20240809):
    """Run every closed-form/pure-math check; returns a list of CheckResult."""
    rng = np.random.default_rng(seed)
    return [
        _check_q_nonneg(rng),
        _check_tent_power(),
        _check_tent_action(),
        _check_schwartz_bound(),
        _check_peak_response(rng),
        _check_plateau_segment_identity(),
        _check_stiffness_forms(rng),
        _check_force_potential(rng),
        _check_trial_ratio(),
        _check_gradient_fd(rng),
    ]
