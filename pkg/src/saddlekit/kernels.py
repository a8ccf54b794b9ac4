"""Hot evaluation kernels for the chain instance, plus the full-run GDA driver.

Everything here exists in two forms: numba-jitted scalar loops (``_jit``
suffix, compiled when the numba backend is active) and vectorized numpy
twins (``_np`` suffix). Public dispatchers pick per the active backend.
The two paths compute the same quantities but may differ in the last few
ulps because reduction order differs; exact-zero propagation (the property
the activation tests rely on) holds in both: inactive coordinates only ever
see ``0.0 - 0.0``, ``c * 0.0`` and ``0.0 / eta`` terms, and the curvature
primitive has ``g(0) = 0`` exactly in floating point.

Scaled-instance parameter convention: the five scalars ``(d, eta, l1, l2,
alpha)`` describe f(x, y) = eta^2 F_d(x/eta, y/eta) on R^{d+1} x R^{d+2},
where F_d is the unscaled chain coupling. ``eta = 1`` gives the unscaled
instance.
"""
import math

import numpy as np

from .backends import njit, use_numba

# fourth root via exp(log/4) so alpha**0.25 rounding is pinned down in one place
def quarter_root(alpha):
    return math.exp(0.25 * math.log(alpha))


# ---------------------------------------------------------------------------
# curvature primitive
# ---------------------------------------------------------------------------

_GAMMA_C = -0.5 - 0.5 * math.log(2.0) + math.pi / 4.0


def gamma_np(x):
    """Antiderivative of 120 t^2 (t-1)/(1+t^2) from 1 to x, closed form.

    gamma(1) = 0, gamma(0) = 60 + 60 ln 2 - 30 pi, stationary at 0 and 1.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    return 120.0 * (0.5 * x * x - x - 0.5 * np.log1p(x * x) + np.arctan(x) - _GAMMA_C)


def gamma_prime_np(x):
    """Derivative 120 x^2 (x-1)/(1+x^2); exactly 0.0 at x = 0 and x = 1."""
    x = np.asarray(x, dtype=float)
    return 120.0 * x * x * (x - 1.0) / (1.0 + x * x)


@njit(cache=True)
def _gamma_jit(x):
    return 120.0 * (0.5 * x * x - x - 0.5 * math.log1p(x * x) + math.atan(x) - _GAMMA_C)


@njit(cache=True)
def _gamma_prime_jit(x):
    return 120.0 * x * x * (x - 1.0) / (1.0 + x * x)


# ---------------------------------------------------------------------------
# chain operator  B: R^{d+1} -> R^{d+2}
# ---------------------------------------------------------------------------
# Row structure (1-based rows): row 1 reads u_{d+1}; rows k = 2..d+1 read
# u_{d+2-k} - u_{d+3-k}; row d+2 reads alpha^{1/4} u_1.  The transpose maps
# accordingly.  Implemented index-wise, never as a dense matrix.

def chain_apply_np(u, alpha):
    d = u.shape[0] - 1
    out = np.empty(d + 2)
    out[0] = u[d]
    if d >= 1:
        out[1:d + 1] = u[d - 1::-1] - u[d:0:-1]
    out[d + 1] = quarter_root(alpha) * u[0]
    return out


def chain_apply_t_np(v, alpha):
    d = v.shape[0] - 2
    out = np.empty(d + 1)
    out[0] = v[d] + quarter_root(alpha) * v[d + 1]
    if d >= 2:
        out[1:d] = v[d - 1:0:-1] - v[d:1:-1]
    out[d] = v[0] - v[1]
    return out


# ---------------------------------------------------------------------------
# scaled instance: value, saddle gradient, primal value/gradient
# ---------------------------------------------------------------------------

def det_value_np(x, y, d, eta, l1, l2, alpha):
    u = x / eta
    v = y / eta
    ra = math.sqrt(alpha)
    c1 = l1 * l1 * ra / (2.0 * l2)
    c2 = l1 * l1 * alpha / (2.0 * l2)
    f = (l1 * np.dot(chain_apply_np(u, alpha), v) - l2 * np.dot(v, v)
         - c1 * u[0] + c2 * float(np.sum(gamma_np(u[:d])))
         - 0.5 * c2 * u[d] * u[d] + l1 * l1 * ra / (4.0 * l2))
    return eta * eta * f


def det_grad_np(x, y, d, eta, l1, l2, alpha):
    u = x / eta
    v = y / eta
    ra = math.sqrt(alpha)
    c1 = l1 * l1 * ra / (2.0 * l2)
    c2 = l1 * l1 * alpha / (2.0 * l2)
    gx = l1 * chain_apply_t_np(v, alpha)
    gx[0] -= c1
    gx[:d] += c2 * gamma_prime_np(u[:d])
    gx[d] -= c2 * u[d]
    gy = l1 * chain_apply_np(u, alpha) - 2.0 * l2 * v
    return eta * gx, eta * gy


def _tridiag_apply_np(u, ra):
    """A u for the tridiagonal primal curvature A = B^T B - e_{d+1} e_{d+1}^T:
    diagonal (1+sqrt(alpha), 2, ..., 2, 1), off-diagonals -1."""
    d = u.shape[0] - 1
    out = np.empty(d + 1)
    out[0] = (1.0 + ra) * u[0] - u[1]
    if d >= 2:
        out[1:d] = -u[0:d - 1] + 2.0 * u[1:d] - u[2:d + 1]
    out[d] = -u[d - 1] + u[d]
    return out


def det_primal_value_np(x, d, eta, l1, l2, alpha):
    u = x / eta
    ra = math.sqrt(alpha)
    s = l1 * l1 / (2.0 * l2)
    val = (0.5 * np.dot(u, _tridiag_apply_np(u, ra)) - ra * u[0] + 0.5 * ra
           + alpha * float(np.sum(gamma_np(u[:d]))) + 0.5 * (1.0 - alpha) * u[d] * u[d])
    return eta * eta * s * val


def det_primal_grad_np(x, d, eta, l1, l2, alpha):
    u = x / eta
    ra = math.sqrt(alpha)
    s = l1 * l1 / (2.0 * l2)
    g = _tridiag_apply_np(u, ra)
    g[0] -= ra
    g[:d] += alpha * gamma_prime_np(u[:d])
    g[d] += (1.0 - alpha) * u[d]
    return eta * s * g


def det_ystar_np(x, d, eta, l1, l2, alpha):
    """Best response y*(x) = (l1 / 2 l2) B (x); scale-invariant in eta."""
    return (l1 / (2.0 * l2)) * chain_apply_np(x, alpha)


# --- jitted twins ---

@njit(cache=True)
def _det_grad_jit(x, y, d, eta, l1, l2, alpha):
    ra = math.sqrt(alpha)
    qa = math.exp(0.25 * math.log(alpha))
    c1 = l1 * l1 * ra / (2.0 * l2)
    c2 = l1 * l1 * alpha / (2.0 * l2)
    gx = np.empty(d + 1)
    gy = np.empty(d + 2)
    # gx = l1 B^T v - c1 e1 + c2 gamma'(u_{1..d}) - c2 u_{d+1} e_{d+1}, times eta
    gx[0] = l1 * (y[d] / eta + qa * y[d + 1] / eta) - c1
    for j in range(2, d + 1):
        gx[j - 1] = l1 * (y[d + 1 - j] - y[d + 2 - j]) / eta
    gx[d] = l1 * (y[0] - y[1]) / eta
    for i in range(d):
        ui = x[i] / eta
        gx[i] += c2 * (120.0 * ui * ui * (ui - 1.0) / (1.0 + ui * ui))
    gx[d] -= c2 * x[d] / eta
    # gy = l1 B u - 2 l2 v, times eta
    gy[0] = l1 * x[d] / eta - 2.0 * l2 * y[0] / eta
    for k in range(2, d + 2):
        gy[k - 1] = (l1 * (x[d + 1 - k] - x[d + 2 - k]) - 2.0 * l2 * y[k - 1]) / eta
    gy[d + 1] = (l1 * qa * x[0] - 2.0 * l2 * y[d + 1]) / eta
    for i in range(d + 1):
        gx[i] *= eta
    for i in range(d + 2):
        gy[i] *= eta
    return gx, gy


@njit(cache=True)
def _det_value_jit(x, y, d, eta, l1, l2, alpha):
    ra = math.sqrt(alpha)
    qa = math.exp(0.25 * math.log(alpha))
    c1 = l1 * l1 * ra / (2.0 * l2)
    c2 = l1 * l1 * alpha / (2.0 * l2)
    bil = (x[d] / eta) * (y[0] / eta)
    for k in range(2, d + 2):
        bil += ((x[d + 1 - k] - x[d + 2 - k]) / eta) * (y[k - 1] / eta)
    bil += qa * (x[0] / eta) * (y[d + 1] / eta)
    vv = 0.0
    for i in range(d + 2):
        vi = y[i] / eta
        vv += vi * vi
    gam = 0.0
    for i in range(d):
        gam += _gamma_jit(x[i] / eta)
    u0 = x[0] / eta
    ud = x[d] / eta
    f = (l1 * bil - l2 * vv - c1 * u0 + c2 * gam - 0.5 * c2 * ud * ud
         + l1 * l1 * ra / (4.0 * l2))
    return eta * eta * f


@njit(cache=True)
def _det_primal_grad_sq_jit(x, d, eta, l1, l2, alpha):
    ra = math.sqrt(alpha)
    s = l1 * l1 / (2.0 * l2)
    acc = 0.0
    for i in range(d + 1):
        ui = x[i] / eta
        if i == 0:
            au = (1.0 + ra) * ui - x[1] / eta
        elif i < d:
            au = -x[i - 1] / eta + 2.0 * ui - x[i + 1] / eta
        else:
            au = -x[d - 1] / eta + ui
        g = au
        if i == 0:
            g -= ra
        if i < d:
            g += alpha * (120.0 * ui * ui * (ui - 1.0) / (1.0 + ui * ui))
        else:
            g += (1.0 - alpha) * ui
        g *= s * eta
        acc += g * g
    return acc


@njit(cache=True)
def _gda_run_jit(d, eta, l1, l2, alpha, step_x, step_y, eps, budget):
    """Simultaneous GDA from the origin, stopping at the first iterate with
    ||grad Phi|| <= eps (measured against the closed-form primal, not
    charged). Returns (status, calls, x, y); status 0 = target hit,
    1 = budget exhausted, 2 = diverged."""
    x = np.zeros(d + 1)
    y = np.zeros(d + 2)
    eps2 = eps * eps
    calls = 0
    while calls < budget:
        if _det_primal_grad_sq_jit(x, d, eta, l1, l2, alpha) <= eps2:
            return 0, calls, x, y
        gx, gy = _det_grad_jit(x, y, d, eta, l1, l2, alpha)
        calls += 1
        nrm = 0.0
        for i in range(d + 1):
            x[i] -= step_x * gx[i]
            nrm += x[i] * x[i]
        for i in range(d + 2):
            y[i] += step_y * gy[i]
            nrm += y[i] * y[i]
        if not np.isfinite(nrm) or nrm > 1e18:
            return 2, calls, x, y
    if _det_primal_grad_sq_jit(x, d, eta, l1, l2, alpha) <= eps2:
        return 0, calls, x, y
    return 1, calls, x, y


def _gda_run_numpy(d, eta, l1, l2, alpha, step_x, step_y, eps, budget):
    x = np.zeros(d + 1)
    y = np.zeros(d + 2)
    eps2 = eps * eps
    calls = 0
    while calls < budget:
        g = det_primal_grad_np(x, d, eta, l1, l2, alpha)
        if np.dot(g, g) <= eps2:
            return 0, calls, x, y
        gx, gy = det_grad_np(x, y, d, eta, l1, l2, alpha)
        calls += 1
        x -= step_x * gx
        y += step_y * gy
        nrm = np.dot(x, x) + np.dot(y, y)
        if not np.isfinite(nrm) or nrm > 1e18:
            return 2, calls, x, y
    g = det_primal_grad_np(x, d, eta, l1, l2, alpha)
    if np.dot(g, g) <= eps2:
        return 0, calls, x, y
    return 1, calls, x, y


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def det_value(x, y, d, eta, l1, l2, alpha):
    if use_numba():
        return _det_value_jit(x, y, d, eta, l1, l2, alpha)
    return det_value_np(x, y, d, eta, l1, l2, alpha)


def det_grad(x, y, d, eta, l1, l2, alpha):
    if use_numba():
        return _det_grad_jit(x, y, d, eta, l1, l2, alpha)
    return det_grad_np(x, y, d, eta, l1, l2, alpha)


def gda_run_det(d, eta, l1, l2, alpha, step_x, step_y, eps, budget):
    """Full GDA run on the scaled chain instance; jitted when the numba
    backend is on, numpy twin otherwise. Used by the sweep bench; the
    lower-bound suite instead drives the generic solver through the logged
    oracle."""
    if use_numba():
        return _gda_run_jit(d, eta, l1, l2, alpha, step_x, step_y, eps, int(budget))
    return _gda_run_numpy(d, eta, l1, l2, alpha, step_x, step_y, eps, int(budget))


def warm_up():
    """Trigger jit compilation of the kernels on a tiny instance (no-op on
    the numpy backend). Keeps compile time out of timed sections."""
    if not use_numba():
        return
    x = np.zeros(2)
    y = np.zeros(3)
    _det_value_jit(x, y, 1, 1.0, 0.5, 0.25, 0.001)
    _det_grad_jit(x, y, 1, 1.0, 0.5, 0.25, 0.001)
    _det_primal_grad_sq_jit(x, 1, 1.0, 0.5, 0.25, 0.001)
    _gda_run_jit(1, 1.0, 0.5, 0.25, 0.001, 0.01, 0.5, 1e-3, 3)
    _gamma_jit(0.5)
    _gamma_prime_jit(0.5)
