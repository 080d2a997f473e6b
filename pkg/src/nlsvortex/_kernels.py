"""Hot numeric kernels with two interchangeable backends.

Every kernel exists twice: a vectorized pure-numpy implementation and a
numba ``@njit`` loop version.  The active backend is chosen once at import
time: numba is used when it imports cleanly and the environment variable
``NLSVORTEX_JIT`` is not set to ``0``/``off``/``false``.  Both backends
implement the same formulas; ``benchmarks/bench_kernels.py`` times them
against each other and the test suite cross-checks their values.

Array conventions: ``u`` holds nodal amplitudes on a radial grid with
``n + 1`` nodes, ``w`` the quadrature weights for the measure r dr
(``w[0] == 0``), ``stiff[j] = m_j / h_j**2`` the per-cell stiffness of the
piecewise-linear Dirichlet term (``m_j`` the cell mass ``(r_{j+1}^2 -
r_j^2)/2``), and ``avec``/``nr2`` pointwise coefficient samples with the
origin entry zeroed.
"""

import math
import os

import numpy as np

_TINY = 1e-300


def _flag_enabled():
    raw = os.environ.get("NLSVORTEX_JIT", "").strip().lower()
    if raw in {"0", "off", "false", "no"}:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


JIT_ENABLED = _flag_enabled()


# ---------------------------------------------------------------------------
# pure-numpy backend
# ---------------------------------------------------------------------------

def dirichlet_sum_numpy(u, stiff):
    d = u[1:] - u[:-1]
    return float(np.dot(stiff, d * d))


def _dirichlet_grad_numpy(u, stiff, out):
    flux = stiff * (u[1:] - u[:-1])
    out[1:-1] += flux[:-1] - flux[1:]


def log_action_sum_numpy(u, w, avec, stiff, alpha, beta):
    u2 = u * u
    lnterm = np.log(np.maximum(u2, _TINY) / beta)
    dens = 0.5 * avec * u2 + 0.5 * alpha * u2 * u2 * lnterm - 0.25 * alpha * u2 * u2
    return 0.5 * dirichlet_sum_numpy(u, stiff) + float(np.dot(w, dens))


def log_action_grad_numpy(u, w, avec, stiff, alpha, beta):
    u2 = u * u
    lnterm = np.log(np.maximum(u2, _TINY) / beta)
    g = np.zeros_like(u)
    _dirichlet_grad_numpy(u, stiff, g)
    g[1:-1] += (w * (avec * u + 2.0 * alpha * u2 * u * lnterm))[1:-1]
    g[0] = 0.0
    g[-1] = 0.0
    return g


def plateau_force_numpy(t, omega, alpha, beta):
    t = np.asarray(t, dtype=np.float64)
    t2 = t * t
    pos = 2.0 * omega * t + 2.0 * alpha * t2 * t * np.log(np.maximum(t2, _TINY) / beta)
    return np.where(t >= 0.0, pos, 2.0 * omega * t)


def plateau_potential_numpy(t, omega, alpha, beta):
    t = np.asarray(t, dtype=np.float64)
    t2 = t * t
    lnterm = np.log(np.maximum(t2, _TINY) / beta)
    pos = omega * t2 + 0.5 * alpha * t2 * t2 * lnterm - 0.25 * alpha * t2 * t2
    return np.where(t >= 0.0, pos, omega * t2)


def plateau_action_sum_numpy(v, w, nr2, stiff, ramp, source, omega, alpha, beta, level_pot):
    u = v + ramp
    dens = (0.5 * nr2 * v * v
            + plateau_potential_numpy(u, omega, alpha, beta) - level_pot
            - source * v)
    return 0.5 * dirichlet_sum_numpy(v, stiff) + float(np.dot(w, dens))


def plateau_action_grad_numpy(v, w, nr2, stiff, ramp, source, omega, alpha, beta):
    u = v + ramp
    g = np.zeros_like(v)
    _dirichlet_grad_numpy(v, stiff, g)
    g[1:-1] += (w * (nr2 * v + plateau_force_numpy(u, omega, alpha, beta) - source))[1:-1]
    g[0] = 0.0
    g[-1] = 0.0
    return g


def sat_potential_numpy(t, s, gamma):
    t = np.asarray(t, dtype=np.float64)
    t2 = t * t
    a = 1.0 + s * t2
    apow = a ** (-gamma)
    cq = 1.0 / (s * s * (gamma - 1.0) * (gamma - 2.0))
    return cq * (1.0 - (1.0 + gamma * s * t2) * apow) - t2 * t2 * apow / (gamma - 2.0)


def sat_action_sum_numpy(u, w, nr2, stiff, s, gamma):
    dens = 0.5 * nr2 * u * u + sat_potential_numpy(u, s, gamma)
    return 0.5 * dirichlet_sum_numpy(u, stiff) + float(np.dot(w, dens))


def sat_action_grad_numpy(u, w, nr2, stiff, s, gamma):
    u2 = u * u
    apow = (1.0 + s * u2) ** (-gamma)
    g = np.zeros_like(u)
    _dirichlet_grad_numpy(u, stiff, g)
    g[1:-1] += (w * (nr2 * u + 2.0 * u2 * u * apow))[1:-1]
    g[0] = 0.0
    g[-1] = 0.0
    return g


def tridiag_solve_numpy(lower, diag, upper, rhs):
    from scipy.linalg import solve_banded

    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


NUMPY_IMPLS = {
    "dirichlet_sum": dirichlet_sum_numpy,
    "log_action_sum": log_action_sum_numpy,
    "log_action_grad": log_action_grad_numpy,
    "plateau_action_sum": plateau_action_sum_numpy,
    "plateau_action_grad": plateau_action_grad_numpy,
    "sat_action_sum": sat_action_sum_numpy,
    "sat_action_grad": sat_action_grad_numpy,
    "tridiag_solve": tridiag_solve_numpy,
}


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if JIT_ENABLED:
    from numba import njit

    @njit(cache=True)
    def dirichlet_sum_njit(u, stiff):
        acc = 0.0
        for j in range(stiff.shape[0]):
            d = u[j + 1] - u[j]
            acc += stiff[j] * d * d
        return acc

    @njit(cache=True)
    def log_action_sum_njit(u, w, avec, stiff, alpha, beta):
        acc = 0.5 * dirichlet_sum_njit(u, stiff)
        for i in range(u.shape[0]):
            u2 = u[i] * u[i]
            u4 = u2 * u2
            lnterm = math.log(max(u2, _TINY) / beta)
            acc += w[i] * (0.5 * avec[i] * u2 + 0.5 * alpha * u4 * lnterm - 0.25 * alpha * u4)
        return acc

    @njit(cache=True)
    def log_action_grad_njit(u, w, avec, stiff, alpha, beta):
        n = u.shape[0]
        g = np.zeros(n)
        for i in range(1, n - 1):
            u2 = u[i] * u[i]
            lnterm = math.log(max(u2, _TINY) / beta)
            g[i] = (stiff[i - 1] * (u[i] - u[i - 1]) - stiff[i] * (u[i + 1] - u[i])
                    + w[i] * (avec[i] * u[i] + 2.0 * alpha * u2 * u[i] * lnterm))
        return g

    @njit(cache=True, inline="always")
    def _plateau_force_scalar(t, omega, alpha, beta):
        if t >= 0.0:
            t2 = t * t
            return 2.0 * omega * t + 2.0 * alpha * t2 * t * math.log(max(t2, _TINY) / beta)
        return 2.0 * omega * t

    @njit(cache=True, inline="always")
    def _plateau_potential_scalar(t, omega, alpha, beta):
        t2 = t * t
        if t >= 0.0:
            lnterm = math.log(max(t2, _TINY) / beta)
            return omega * t2 + 0.5 * alpha * t2 * t2 * lnterm - 0.25 * alpha * t2 * t2
        return omega * t2

    @njit(cache=True)
    def plateau_action_sum_njit(v, w, nr2, stiff, ramp, source, omega, alpha, beta, level_pot):
        acc = 0.5 * dirichlet_sum_njit(v, stiff)
        for i in range(v.shape[0]):
            u = v[i] + ramp[i]
            acc += w[i] * (0.5 * nr2[i] * v[i] * v[i]
                           + _plateau_potential_scalar(u, omega, alpha, beta) - level_pot
                           - source[i] * v[i])
        return acc

    @njit(cache=True)
    def plateau_action_grad_njit(v, w, nr2, stiff, ramp, source, omega, alpha, beta):
        n = v.shape[0]
        g = np.zeros(n)
        for i in range(1, n - 1):
            u = v[i] + ramp[i]
            g[i] = (stiff[i - 1] * (v[i] - v[i - 1]) - stiff[i] * (v[i + 1] - v[i])
                    + w[i] * (nr2[i] * v[i]
                              + _plateau_force_scalar(u, omega, alpha, beta)
                              - source[i]))
        return g

    @njit(cache=True, inline="always")
    def _sat_potential_scalar(t, s, gamma):
        t2 = t * t
        apow = (1.0 + s * t2) ** (-gamma)
        cq = 1.0 / (s * s * (gamma - 1.0) * (gamma - 2.0))
        return cq * (1.0 - (1.0 + gamma * s * t2) * apow) - t2 * t2 * apow / (gamma - 2.0)

    @njit(cache=True)
    def sat_action_sum_njit(u, w, nr2, stiff, s, gamma):
        acc = 0.5 * dirichlet_sum_njit(u, stiff)
        for i in range(u.shape[0]):
            acc += w[i] * (0.5 * nr2[i] * u[i] * u[i] + _sat_potential_scalar(u[i], s, gamma))
        return acc

    @njit(cache=True)
    def sat_action_grad_njit(u, w, nr2, stiff, s, gamma):
        n = u.shape[0]
        g = np.zeros(n)
        for i in range(1, n - 1):
            u2 = u[i] * u[i]
            apow = (1.0 + s * u2) ** (-gamma)
            g[i] = (stiff[i - 1] * (u[i] - u[i - 1]) - stiff[i] * (u[i + 1] - u[i])
                    + w[i] * (nr2[i] * u[i] + 2.0 * u2 * u[i] * apow))
        return g

    @njit(cache=True)
    def tridiag_solve_njit(lower, diag, upper, rhs):
        n = diag.shape[0]
        cp = np.empty(n)
        dp = np.empty(n)
        x = np.empty(n)
        cp[0] = upper[0] / diag[0]
        dp[0] = rhs[0] / diag[0]
        for i in range(1, n):
            den = diag[i] - lower[i] * cp[i - 1]
            cp[i] = upper[i] / den
            dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / den
        x[n - 1] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = dp[i] - cp[i] * x[i + 1]
        return x

    JIT_IMPLS = {
        "dirichlet_sum": dirichlet_sum_njit,
        "log_action_sum": log_action_sum_njit,
        "log_action_grad": log_action_grad_njit,
        "plateau_action_sum": plateau_action_sum_njit,
        "plateau_action_grad": plateau_action_grad_njit,
        "sat_action_sum": sat_action_sum_njit,
        "sat_action_grad": sat_action_grad_njit,
        "tridiag_solve": tridiag_solve_njit,
    }
else:
    JIT_IMPLS = {}

_ACTIVE = JIT_IMPLS if JIT_ENABLED else NUMPY_IMPLS

dirichlet_sum = _ACTIVE["dirichlet_sum"]
log_action_sum = _ACTIVE["log_action_sum"]
log_action_grad = _ACTIVE["log_action_grad"]
plateau_action_sum = _ACTIVE["plateau_action_sum"]
plateau_action_grad = _ACTIVE["plateau_action_grad"]
sat_action_sum = _ACTIVE["sat_action_sum"]
sat_action_grad = _ACTIVE["sat_action_grad"]
tridiag_solve = _ACTIVE["tridiag_solve"]
