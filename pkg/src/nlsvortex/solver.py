"""Minimization engines and the independent shooting oracle.

Descent uses the exact gradient of the discretized action with an Armijo
backtracking line search, so accepted steps strictly decrease the energy.
By default the raw gradient is preconditioned by the self-adjoint linear
part of the problem (a tridiagonal radial Helmholtz solve), which is what
makes desk-scale grids converge in tens of iterations instead of millions;
set ``preconditioned=False`` for the plain-gradient flow.

The power-constrained saturable problem runs projected descent: a descent
step followed by an exact rescale back onto the beam-power sphere.  At
convergence the propagation constant is extracted as the Lagrange
multiplier of the constraint through the weak form of the vortex equation.

``shoot``/``shoot_match`` integrate the radial ODE outward from a series
start u = c r^|n| with an adaptive Dormand-Prince 4(5) pair and bisect the
launch amplitude c between undershoot and overshoot; they share no
discretization with the variational route and serve as its oracle.
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels as _k
from .analysis import (fit_decay, minimizing_flat_amplitude, tent_profile,
                       trial_profile)
from .energy import (Profile, beam_power, centrifugal, make_homogenization,
                     plateau_potential, scaled_residual_norm)
from .errors import ParameterError, ShootBlowupError, SolverError
from .model import (Logarithmic, PowerConstrained, Saturable, VortexProblem,
                    ZeroPlateau, ZeroZero, nonlinear_term, plateau_stiffness)


@dataclass(frozen=True)
class TentInit:
    """Tent profile rising to b at r = a and back to zero at 2a."""

    a: float
    b: float = 1.0


@dataclass(frozen=True)
class TrialInit:
    """Ramp/plateau/exponential-tail trial; None fields are auto-chosen.

    ``level`` defaults to the minimizer of the flat action density,
    ``rate`` to sqrt(2 omega), and ``plateau_radius`` to the doubling
    radius with the most negative discrete action.
    """

    level: Optional[float] = None
    rate: Optional[float] = None
    plateau_radius: Optional[float] = None


@dataclass(frozen=True)
class RandomInit:
    """Seeded uniform noise on [0, amplitude], one diffusion pass, ends pinned."""

    seed: int = 0
    amplitude: float = 1.0


@dataclass(frozen=True)
class GivenInit:
    """Caller-supplied nodal values (v-values for the plateau problem)."""

    values: np.ndarray


InitSpec = Union[TentInit, TrialInit, RandomInit, GivenInit]


@dataclass
class SolverConfig:
    max_iters: int = 1500
    grad_tol: float = 1e-8
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    init: Optional[InitSpec] = None
    nonneg_projection: bool = True
    preconditioned: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ParameterError("max_iters must be at least 1")
        if not self.grad_tol > 0.0:
            raise ParameterError("grad_tol must be positive")
        if not 0.0 < self.armijo_c < 1.0:
            raise ParameterError("armijo sufficient-decrease constant must lie in (0,1)")
        if not 0.0 < self.backtrack < 1.0:
            raise ParameterError("backtrack ratio must lie in (0,1)")


@dataclass
class SolveReport:
    profile: Profile
    energy: float
    omega: float
    grad_norm: float
    el_residual_norm: float
    iterations: int
    converged: bool
    decay: Optional[object] = None
    power: Optional[float] = None


def _scaled_grad_norm(gvec, weights):
    return float(np.max(np.abs(gvec[1:-1]) / weights[1:-1]))


def _precond_solver(grid, coeff):
    """Factor-free tridiagonal solve with K = Dirichlet + diag(w * coeff)."""
    stiff = grid.stiffness
    w = grid.node_mass
    diag = stiff[:-1] + stiff[1:] + w[1:-1] * coeff[1:-1]
    lower = np.empty_like(diag)
    upper = np.empty_like(diag)
    lower[0] = 0.0
    lower[1:] = -stiff[1:-1]
    upper[-1] = 0.0
    upper[:-1] = -stiff[1:-1]

    def solve(g):
        d = np.zeros_like(g)
        d[1:-1] = _k.tridiag_solve(lower, diag, upper, np.ascontiguousarray(g[1:-1]))
        return d

    return solve


def _descend(x0, energy_fn, grad_fn, project_fn, precond, weights, cfg):
    x = project_fn(np.array(x0, dtype=np.float64))
    value = energy_fn(x)
    step = 1.0
    iterations = 0
    converged = False
    grad_norm = math.inf
    for _ in range(cfg.max_iters):
        g = grad_fn(x)
        grad_norm = _scaled_grad_norm(g, weights)
        if grad_norm <= cfg.grad_tol:
            converged = True
            break
        direction = precond(g) if precond is not None else g
        slope = float(np.dot(g, direction))
        if not slope > 0.0:
            direction = g
            slope = float(np.dot(g, g))
        t = min(1.0, 2.0 * step)
        accepted = False
        while t > 1e-16:
            cand = project_fn(x - t * direction)
            cand_value = energy_fn(cand)
            if cand_value <= value - cfg.armijo_c * t * slope:
                accepted = True
                break
            t *= cfg.backtrack
        if not accepted:
            break
        x, value, step = cand, cand_value, t
        iterations += 1
    else:
        g = grad_fn(x)
        grad_norm = _scaled_grad_norm(g, weights)
        converged = grad_norm <= cfg.grad_tol
    return x, value, grad_norm, iterations, converged


def _default_trial(problem, grid, spec):
    nl = problem.nonlinearity
    omega = problem.omega
    level = spec.level
    if level is None:
        level = minimizing_flat_amplitude(nl.alpha, nl.beta, omega)
    rate = spec.rate if spec.rate is not None else math.sqrt(2.0 * omega)
    radius = spec.plateau_radius
    if radius is None:
        best = None
        rp = grid.R / 16.0
        while rp <= 0.75 * grid.R:
            cand = trial_profile(grid, level, rate, rp)
            avec = centrifugal(grid, problem.n) + 2.0 * omega
            val = _k.log_action_sum(cand.values, grid.node_mass, avec, grid.stiffness,
                                    nl.alpha, nl.beta)
            if best is None or val < best[0]:
                best = (val, rp)
            rp *= 2.0
        radius = best[1]
    return trial_profile(grid, level, rate, radius).values


def build_init(problem, grid, init):
    """Materialize an InitSpec into nodal values for the stored unknown."""
    plateau = isinstance(problem.regime, ZeroPlateau)
    if init is None:
        if plateau:
            return np.zeros_like(grid.nodes)
        if isinstance(problem.regime, PowerConstrained):
            init = TentInit(a=grid.R / 4.0, b=1.0)
        else:
            init = TrialInit()
    if isinstance(init, GivenInit):
        vals = np.array(init.values, dtype=np.float64)
        if vals.shape != grid.nodes.shape:
            raise ParameterError("given init length does not match the grid")
        return vals
    if isinstance(init, RandomInit):
        rng = np.random.default_rng(init.seed)
        vals = rng.uniform(0.0, init.amplitude, size=grid.nodes.shape[0])
        vals[1:-1] = 0.25 * vals[:-2] + 0.5 * vals[1:-1] + 0.25 * vals[2:]
        vals[0] = 0.0
        vals[-1] = 0.0
        return vals
    if plateau:
        raise ParameterError("tent/trial inits are not defined for the plateau unknown; "
                             "use zeros (default), RandomInit, or GivenInit")
    if isinstance(init, TentInit):
        return tent_profile(grid, init.a, init.b).values
    if isinstance(init, TrialInit):
        return _default_trial(problem, grid, init)
    raise ParameterError(f"unknown init spec {init!r}")


def minimize_unconstrained(problem, grid, config=None):
    """Armijo descent for the two logarithmic problems.

    ZeroZero descends the action in u directly (with optional nodal
    absolute-value projection, justified by F(|u|) <= F(u)); ZeroPlateau
    descends the homogenized action in v = u - ramp, where the sign
    projection does not apply.  Returns a SolveReport; non-convergence
    within max_iters is reported, not raised.
    """
    if not isinstance(problem.nonlinearity, Logarithmic):
        raise ParameterError("unconstrained minimization covers the logarithmic model")
    cfg = config if config is not None else SolverConfig()
    nl = problem.nonlinearity
    w, stiff = grid.node_mass, grid.stiffness
    if isinstance(problem.regime, ZeroZero):
        avec = centrifugal(grid, problem.n) + 2.0 * problem.omega

        def energy_fn(u):
            return _k.log_action_sum(u, w, avec, stiff, nl.alpha, nl.beta)

        def grad_fn(u):
            return _k.log_action_grad(u, w, avec, stiff, nl.alpha, nl.beta)

        def project_fn(u):
            if cfg.nonneg_projection:
                u = np.abs(u)
            u[0] = 0.0
            u[-1] = 0.0
            return u

        precond = _precond_solver(grid, avec) if cfg.preconditioned else None
        x0 = build_init(problem, grid, cfg.init)
        x, value, grad_norm, iterations, converged = _descend(
            x0, energy_fn, grad_fn, project_fn, precond, w, cfg)
        profile = Profile(grid, x)
        decay = None
        if converged:
            try:
                decay = fit_decay(profile, problem.omega)
            except ParameterError:
                decay = None
        return SolveReport(profile=profile, energy=value, omega=problem.omega,
                           grad_norm=grad_norm,
                           el_residual_norm=scaled_residual_norm(problem, profile),
                           iterations=iterations, converged=converged, decay=decay)

    if isinstance(problem.regime, ZeroPlateau):
        hom = make_homogenization(problem.regime.level, problem.n, grid)
        nr2 = centrifugal(grid, problem.n)
        level_pot = plateau_potential(hom.level, problem.omega, nl.alpha, nl.beta)
        stiffness_at_level = plateau_stiffness(nl.alpha, nl.beta, problem.omega, hom.level)

        def energy_fn(v):
            return _k.plateau_action_sum(v, w, nr2, stiff, hom.ramp, hom.source,
                                         problem.omega, nl.alpha, nl.beta, level_pot)

        def grad_fn(v):
            return _k.plateau_action_grad(v, w, nr2, stiff, hom.ramp, hom.source,
                                          problem.omega, nl.alpha, nl.beta)

        def project_fn(v):
            v[0] = 0.0
            v[-1] = 0.0
            return v

        precond = (_precond_solver(grid, nr2 + stiffness_at_level)
                   if cfg.preconditioned else None)
        v0 = build_init(problem, grid, cfg.init)
        v, value, grad_norm, iterations, converged = _descend(
            v0, energy_fn, grad_fn, project_fn, precond, w, cfg)
        profile = Profile(grid, v + hom.ramp)
        return SolveReport(profile=profile, energy=value, omega=problem.omega,
                           grad_norm=grad_norm,
                           el_residual_norm=scaled_residual_norm(problem, profile),
                           iterations=iterations, converged=converged)

    raise ParameterError("use minimize_constrained for the power-constrained problem")


def extract_multiplier(problem, profile):
    """Propagation constant from the weak form of the vortex equation:
    omega = -[int (u'^2 + (n^2/r^2) u^2 + 2 u^4/(1+s u^2)^gamma) r dr]
            / (2 int u^2 r dr)."""
    nl = problem.nonlinearity
    if not isinstance(nl, Saturable):
        raise ParameterError("multiplier extraction applies to the saturable model")
    g, u = profile.grid, profile.values
    u2 = u * u
    apow = (1.0 + nl.s * u2) ** (-nl.gamma)
    numer = (_k.dirichlet_sum(u, g.stiffness)
             + float(np.dot(g.node_mass, centrifugal(g, problem.n) * u2))
             + float(np.dot(g.node_mass, 2.0 * u2 * u2 * apow)))
    denom = 2.0 * float(np.dot(g.node_mass, u2))
    if denom <= 0.0:
        raise SolverError("multiplier extraction on a vanishing profile")
    return -numer / denom


def minimize_constrained(problem, grid, config=None):
    """Projected descent on the beam-power sphere for the saturable problem.

    Each accepted step is a preconditioned descent step on J followed by
    an exact rescale u <- u sqrt(P0 / P(u)).  Convergence is measured on
    the first-order condition grad J + 2 omega (w u) = 0 with omega the
    extracted multiplier, so the reported profile satisfies the vortex
    equation with its own omega.
    """
    if not isinstance(problem.regime, PowerConstrained):
        raise ParameterError("minimize_constrained needs a PowerConstrained problem")
    cfg = config if config is not None else SolverConfig()
    nl = problem.nonlinearity
    target = problem.regime.power
    w, stiff = grid.node_mass, grid.stiffness
    nr2 = centrifugal(grid, problem.n)

    def project_fn(u):
        if cfg.nonneg_projection:
            u = np.abs(u)
        u[0] = 0.0
        u[-1] = 0.0
        p = 2.0 * math.pi * float(np.dot(w, u * u))
        if not p > 1e-20 * target:
            raise SolverError("constraint projection degenerate")
        u *= math.sqrt(target / p)
        return u

    def energy_fn(u):
        return _k.sat_action_sum(u, w, nr2, stiff, nl.s, nl.gamma)

    def multiplier(u):
        u2 = u * u
        apow = (1.0 + nl.s * u2) ** (-nl.gamma)
        numer = (_k.dirichlet_sum(u, stiff) + float(np.dot(w, nr2 * u2))
                 + 2.0 * float(np.dot(w, u2 * u2 * apow)))
        return -numer / (2.0 * float(np.dot(w, u2)))

    def kkt_fn(u):
        g = _k.sat_action_grad(u, w, nr2, stiff, nl.s, nl.gamma)
        res = g + 2.0 * multiplier(u) * (w * u)
        res[0] = 0.0
        res[-1] = 0.0
        return res

    precond = _precond_solver(grid, nr2) if cfg.preconditioned else None
    u = project_fn(build_init(problem, grid, cfg.init))
    value = energy_fn(u)
    step = 1.0
    iterations = 0
    converged = False
    grad_norm = math.inf
    for _ in range(cfg.max_iters):
        res = kkt_fn(u)
        grad_norm = _scaled_grad_norm(res, w)
        if grad_norm <= cfg.grad_tol:
            converged = True
            break
        direction = precond(res) if precond is not None else res
        slope = float(np.dot(res, direction))
        if not slope > 0.0:
            direction = res
            slope = float(np.dot(res, res))
        t = min(1.0, 2.0 * step)
        accepted = False
        while t > 1e-16:
            cand = project_fn(u - t * direction)
            cand_value = energy_fn(cand)
            if cand_value <= value - cfg.armijo_c * t * slope:
                accepted = True
                break
            t *= cfg.backtrack
        if not accepted:
            break
        u, value, step = cand, cand_value, t
        iterations += 1

    profile = Profile(grid, u)
    omega = extract_multiplier(problem, profile)
    power = beam_power(profile)
    return SolveReport(profile=profile, energy=value, omega=omega,
                       grad_norm=grad_norm,
                       el_residual_norm=scaled_residual_norm(problem, profile, omega),
                       iterations=iterations, converged=converged, power=power)


# ---------------------------------------------------------------------------
# shooting oracle
# ---------------------------------------------------------------------------

def _shoot_setup(problem, omega):
    nl = problem.nonlinearity
    if isinstance(nl, Logarithmic):
        if not isinstance(problem.regime, ZeroZero):
            raise ParameterError("shooting covers the homogeneous logarithmic problem")
        omega = problem.omega if omega is None else float(omega)
        scale = math.sqrt(nl.beta)
    elif isinstance(nl, Saturable):
        if omega is None:
            omega = problem.omega
        if omega is None or not omega < 0.0:
            raise ParameterError("shooting the saturable model needs a fixed omega < 0")
        omega = float(omega)
        scale = 1.0 / math.sqrt(nl.s * (nl.gamma - 1.0))
    else:
        raise ParameterError(f"unknown nonlinearity {nl!r}")
    return omega, scale


def _integrate(problem, grid, omega, amplitude, cap, stop_on_zero, stop_on_upturn=False):
    n2 = problem.n * problem.n
    nl = problem.nonlinearity
    omega2 = 2.0 * omega
    R = grid.R
    r0 = 1e-6 * R
    m = abs(problem.n)
    y0 = np.array([amplitude * r0 ** m, amplitude * m * r0 ** (m - 1)])

    if isinstance(nl, Logarithmic):
        alpha, beta = nl.alpha, nl.beta

        def rhs(r, y):
            u, p = y
            u2 = u * u
            psi = alpha * u2 * math.log(max(u2, 1e-300) / beta)
            return (p, -p / r + (n2 / (r * r) + omega2 + 2.0 * psi) * u)
    else:
        s, gamma = nl.s, nl.gamma

        def rhs(r, y):
            u, p = y
            u2 = u * u
            psi = u2 / (1.0 + s * u2) ** gamma
            return (p, -p / r + (n2 / (r * r) + omega2 + 2.0 * psi) * u)

    def hit_cap(r, y):
        return y[0] * y[0] - cap * cap

    hit_cap.terminal = True
    hit_cap.direction = 1.0

    events = [hit_cap]
    if stop_on_zero:
        def hit_zero(r, y):
            return y[0]

        hit_zero.terminal = True
        hit_zero.direction = -1.0
        events.append(hit_zero)
    if stop_on_upturn:
        def hit_upturn(r, y):
            return y[1]

        hit_upturn.terminal = True
        hit_upturn.direction = 1.0
        events.append(hit_upturn)

    sol = solve_ivp(rhs, (r0, R), y0, method="RK45", rtol=1e-10,
                    atol=1e-14 * max(1.0, cap), dense_output=True, events=events)
    if sol.status == 1:
        if sol.t_events[0].size:
            return "over", sol, float(sol.t_events[0][0])
        if stop_on_zero and sol.t_events[1].size:
            return "under", sol, float(sol.t_events[1][0])
        return "upturn", sol, float(sol.t_events[-1][0])
    if not sol.success:
        raise SolverError(f"shooting integration failed: {sol.message}")
    return "through", sol, R


def _sample(grid, sol, amplitude, n, r_end):
    vals = np.zeros_like(grid.nodes)
    r = grid.nodes
    inside = (r > 0.0) & (r <= r_end)
    small = inside & (r < sol.t[0])
    vals[small] = amplitude * r[small] ** abs(n)
    rest = inside & ~small
    if np.any(rest):
        vals[rest] = sol.sol(r[rest])[0]
    return vals


def shoot(problem, grid, omega=None, amplitude=1.0, cap=None):
    """Integrate the radial vortex ODE outward from u = c r^|n| at c = amplitude.

    Returns the trajectory sampled onto the grid; raises ShootBlowupError
    with the blow-up radius if |u| exceeds ``cap`` before R.
    """
    omega, scale = _shoot_setup(problem, omega)
    if amplitude == 0.0:
        return Profile(grid, np.zeros_like(grid.nodes))
    if cap is None:
        cap = 50.0 * scale
    kind, sol, r_end = _integrate(problem, grid, omega, amplitude, cap, stop_on_zero=False)
    if kind == "over":
        raise ShootBlowupError(r_end)
    return Profile(grid, _sample(grid, sol, amplitude, problem.n, r_end))


def _find_undershoot(problem, grid, omega, scale, cap, max_doublings):
    """Any amplitude whose trajectory crosses zero before R, by doubling."""
    def crosses(c):
        kind, _, _ = _integrate(problem, grid, omega, c, cap, stop_on_zero=True)
        return kind == "under"

    c = scale
    for _ in range(max_doublings):
        if crosses(c):
            return c
        c *= 0.5
    c = scale * 2.0
    for _ in range(max_doublings):
        if crosses(c):
            return c
        c *= 2.0
    raise SolverError(f"no undershoot found within {max_doublings} doublings")


def shoot_match(problem, grid, omega=None, tail_target=1e-8, max_doublings=60,
                branch="boundary"):
    """Bisect the launch amplitude between undershoot and overshoot.

    Undershoot means u crossed zero before R; overshoot that it diverged
    or reached R still positive (the growing-mode side near the match).

    ``branch`` selects which matched solution of the logarithmic model the
    bisection targets:

    * "boundary": the largest matched amplitude -- the u(R) = 0 solution
      of the truncated problem, the one unconstrained descent converges to.
      On wide domains this trajectory hugs the unstable plateau level for a
      long stretch, which amplifies the last-bit amplitude uncertainty; the
      tail check therefore allows the measured bisection floor when that
      floor exceeds ``tail_target``.
    * "decaying": the exponentially decaying solution, bracketed between
      trajectories that cross zero and trajectories that turn back upward
      (toward the smaller root of the flat reaction).  This is a saddle of
      the truncated action, reachable only through this oracle.

    The saturable model has a single matched branch; ``branch`` is ignored.
    """
    omega, scale = _shoot_setup(problem, omega)
    cap = 50.0 * scale
    if branch not in ("boundary", "decaying"):
        raise ParameterError(f"unknown shooting branch {branch!r}")
    decaying = branch == "decaying" and isinstance(problem.nonlinearity, Logarithmic)

    c_under = _find_undershoot(problem, grid, omega, scale, cap, max_doublings)

    if decaying:
        # walk down from the undershoot until the trajectory turns back up
        def kind_of(c):
            kind, _, _ = _integrate(problem, grid, omega, c, cap,
                                    stop_on_zero=True, stop_on_upturn=True)
            return kind

        c_hi = c_under          # crosses zero
        c_lo = None             # turns upward
        c = c_under * 0.5
        for _ in range(max_doublings):
            if kind_of(c) != "under":
                c_lo = c
                break
            c_hi = c
            c *= 0.5
        if c_lo is None:
            raise SolverError("no upturn amplitude found below the undershoot within "
                              f"{max_doublings} doublings")
        for _ in range(200):
            if (c_hi - c_lo) <= 1e-15 * c_hi:
                break
            mid = 0.5 * (c_lo + c_hi)
            if kind_of(mid) == "under":
                c_hi = mid
            else:
                c_lo = mid
        # the zero-crossing side tracks the decaying manifold all the way to R
        kind, sol, r_end = _integrate(problem, grid, omega, c_hi, cap, stop_on_zero=False)
        vals = _sample(grid, sol, c_hi, problem.n, r_end)
        umax = float(np.max(np.abs(vals)))
        if umax <= 0.0 or abs(vals[-1]) > tail_target * umax:
            raise SolverError("bisection did not reach the requested tail accuracy")
        return Profile(grid, vals)

    def classify(c):
        kind, _, _ = _integrate(problem, grid, omega, c, cap, stop_on_zero=True)
        return "under" if kind == "under" else "over"

    c_lo = c_under
    c_hi = c_under * 2.0
    for _ in range(max_doublings):
        if classify(c_hi) == "over":
            break
        c_lo = c_hi
        c_hi *= 2.0
    else:
        raise SolverError(f"no overshoot found within {max_doublings} doublings")
    for _ in range(200):
        if (c_hi - c_lo) <= 1e-15 * c_hi:
            break
        mid = 0.5 * (c_lo + c_hi)
        if classify(mid) == "under":
            c_lo = mid
        else:
            c_hi = mid
    kind, sol, r_end = _integrate(problem, grid, omega, c_hi, cap, stop_on_zero=False)
    if kind == "over":
        kind, sol, r_end = _integrate(problem, grid, omega, c_lo, cap, stop_on_zero=False)
        if kind == "over":
            raise SolverError("matched trajectory still diverges; bracket collapsed badly")
        c_used = c_lo
    else:
        c_used = c_hi
    vals = _sample(grid, sol, c_used, problem.n, r_end)
    umax = float(np.max(np.abs(vals)))
    # measured bisection floor: endpoint sensitivity times the bracket width
    _, sol_lo, _ = _integrate(problem, grid, omega, c_lo, cap, stop_on_zero=False)
    _, sol_hi, _ = _integrate(problem, grid, omega, c_hi, cap, stop_on_zero=False)
    floor = abs(float(sol_hi.sol(grid.R)[0]) - float(sol_lo.sol(grid.R)[0]))
    allowance = max(tail_target * umax, 4.0 * floor)
    if umax <= 0.0 or abs(vals[-1]) > allowance:
        raise SolverError("bisection did not reach the requested tail accuracy")
    return Profile(grid, vals)
