"""Hard-instance constructions and analysis utilities.

Three families, all built around a banded chain coupling whose gradients
reveal one new coordinate per oracle call:

* ``deterministic`` — single-component chain on R^{d+1} x R^{d+2}, scaled so
  that any point with the last two x coordinates untouched has primal
  gradient norm >= epsilon (so no algorithm can stop early without walking
  the whole chain);
* ``finite_sum`` — n disjoint copies of the chain glued by a shared
  curvature term, with per-component gradients that touch only their own
  dual block;
* ``case1`` — a bilinear block family whose difficulty is purely the number
  of components touched, used for the Omega(n) floor.

Plus small closed-form quadratic/bilinear test problems and a sampling
estimator for smoothness constants.
"""
import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from . import kernels
from .core import SaddleProblem


def gamma(x):
    """Scalar curvature primitive; stationary at 0 and 1, gamma(1) = 0."""
    return kernels.gamma_np(x)


def gamma_prime(x):
    return kernels.gamma_prime_np(x)


class ChainMatrix:
    """Implicit chain coupling B: R^{d+1} -> R^{d+2}, applied in O(d).

    Row reads (1-based): row 1 is x_{d+1}; rows 2..d+1 are successive
    differences x_{d+2-k} - x_{d+3-k}; row d+2 is alpha^{1/4} x_1. The
    spectral norm is at most 2 for alpha <= 1. Never materialized densely.
    """

    def __init__(self, d, alpha):
        if d < 1:
            raise ValueError("chain length d must be >= 1")
        if not (0.0 < alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        self.d = int(d)
        self.alpha = float(alpha)

    @property
    def shape(self):
        return (self.d + 2, self.d + 1)

    @property
    def norm_bound(self):
        return 2.0

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d + 1,):
            raise ValueError(f"expected x of shape ({self.d + 1},), got {x.shape}")
        return kernels.chain_apply_np(x, self.alpha)

    def apply_t(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.d + 2,):
            raise ValueError(f"expected y of shape ({self.d + 2},), got {y.shape}")
        return kernels.chain_apply_t_np(y, self.alpha)


class BlockEmbedding:
    """Index bookkeeping for n stacked chain blocks: x blocks of size d+1,
    y blocks of size d+2."""

    def __init__(self, n, d):
        if n < 1 or d < 1:
            raise ValueError("need n >= 1 and d >= 1")
        self.n = int(n)
        self.d = int(d)
        self.block_x = d + 1
        self.block_y = d + 2
        self.dim_x = n * self.block_x
        self.dim_y = n * self.block_y

    def x_slice(self, i):
        return slice(i * self.block_x, (i + 1) * self.block_x)

    def y_slice(self, i):
        return slice(i * self.block_y, (i + 1) * self.block_y)

    def x_block(self, x, i):
        return x[self.x_slice(i)]

    def y_block(self, y, i):
        return y[self.y_slice(i)]


# ---------------------------------------------------------------------------
# instance specification
# ---------------------------------------------------------------------------

_MODES = ("deterministic", "finite_sum", "case1")


@dataclass
class HardInstanceSpec:
    """Resolved parameters of one hard instance.

    ``derive`` fills the scale factors from the target constants
    (L, mu, Delta, epsilon); the result round-trips through the key=value
    text format emitted by ``gen`` and consumed by ``run``/``verify``.
    """
    mode: str
    L: float
    mu: float
    Delta: float
    epsilon: float
    n: int = 1
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    alpha: Optional[float] = None
    eta: Optional[float] = None
    d: Optional[int] = None
    theta: Optional[float] = None
    d_total: Optional[int] = None
    d_clamped: bool = False

    @classmethod
    def derive(cls, mode, L, mu, Delta, epsilon, n=1, d_override=None,
               d_total=None):
        """Compute the derived scale factors for one instance family.

        The dimension formulas give d < 1 for friendly desk-scale targets;
        in that case d is clamped to 1 and flagged. ``d_override`` replaces
        the formula value outright (used to pin experiment sizes).
        """
        L, mu, Delta, epsilon = map(float, (L, mu, Delta, epsilon))
        n = int(n)
        if mode not in _MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if not (0 < mu <= L):
            raise ValueError("need 0 < mu <= L")
        if Delta <= 0 or epsilon <= 0:
            raise ValueError("Delta and epsilon must be positive")
        if mode == "deterministic":
            if n != 1:
                raise ValueError("deterministic instance has n = 1")
            l1, l2 = L / 2.0, mu / 2.0
            alpha = mu / (100.0 * L)
            eta = (16.0 * mu / L ** 2) * alpha ** -0.75 * epsilon
            d_raw = Delta * L * math.sqrt(L / mu) / (12800.0 * epsilon ** 2)
            return cls._with_d(mode, L, mu, Delta, epsilon, n, l1, l2, alpha,
                               eta, d_raw, d_override)
        if mode == "finite_sum":
            if n < 2:
                raise ValueError("finite-sum instance needs n >= 2")
            if L < 2.0 * n * mu:
                raise ValueError(f"finite-sum scaling needs L >= 2 n mu "
                                 f"(= {2 * n * mu}), got L = {L}")
            l1 = math.sqrt(n / 40.0) * L
            l2 = n * mu / 2.0
            alpha = n * mu / (50.0 * L)
            eta = (160.0 * math.sqrt(2.0 * n) * mu / L ** 2) * alpha ** -0.75 * epsilon
            d_raw = math.sqrt(alpha) * L ** 2 * Delta / (25600.0 * n * mu * epsilon ** 2)
            return cls._with_d(mode, L, mu, Delta, epsilon, n, l1, l2, alpha,
                               eta, d_raw, d_override)
        # case1
        if n < 2:
            raise ValueError("case1 instance needs n >= 2")
        if d_total is None:
            d_total = n
        d_total = int(d_total)
        if d_total % n != 0:
            raise ValueError(f"d_total ({d_total}) must be a multiple of n ({n})")
        theta = math.sqrt(2.0 * L ** 2 * n ** 2 * Delta / (mu * d_total))
        return cls(mode=mode, L=L, mu=mu, Delta=Delta, epsilon=epsilon, n=n,
                   theta=theta, d_total=d_total)

    @classmethod
    def _with_d(cls, mode, L, mu, Delta, epsilon, n, l1, l2, alpha, eta,
                d_raw, d_override):
        clamped = False
        if d_override is not None:
            d = int(d_override)
            if d < 1:
                raise ValueError("d_override must be >= 1")
        else:
            d = int(math.floor(d_raw))
            if d < 1:
                d = 1
                clamped = True
        return cls(mode=mode, L=L, mu=mu, Delta=Delta, epsilon=epsilon, n=n,
                   lambda1=l1, lambda2=l2, alpha=alpha, eta=eta, d=d,
                   d_clamped=clamped)

    @staticmethod
    def epsilon_for_dimension(mode, L, mu, Delta, d, n=1):
        """Invert the dimension formula: the epsilon whose formula value is
        exactly d (pair with d_override to sidestep floor boundaries)."""
        if mode == "deterministic":
            return math.sqrt(Delta * L * math.sqrt(L / mu) / (12800.0 * d))
        if mode == "finite_sum":
            alpha = n * mu / (50.0 * L)
            return math.sqrt(math.sqrt(alpha) * L ** 2 * Delta / (25600.0 * n * mu * d))
        raise ValueError(f"no dimension formula for mode {mode!r}")

    def validate(self):
        """Consistency of the derived fields; raises ValueError on junk."""
        if self.mode not in _MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not (0 < self.mu <= self.L):
            raise ValueError("need 0 < mu <= L")
        if self.Delta <= 0 or self.epsilon <= 0:
            raise ValueError("Delta and epsilon must be positive")
        if self.mode == "case1":
            if self.theta is None or self.d_total is None:
                raise ValueError("case1 spec needs theta and d_total")
            if self.d_total % self.n != 0:
                raise ValueError("d_total must be a multiple of n")
            return self
        for name in ("lambda1", "lambda2", "alpha", "eta"):
            if getattr(self, name) is None:
                raise ValueError(f"{self.mode} spec is missing {name}")
        if self.d is None or self.d < 1:
            raise ValueError("chain length d must be >= 1")
        if self.mode == "deterministic":
            if not (0.0 < self.alpha <= self.mu / (100.0 * self.L) * (1 + 1e-12)):
                raise ValueError(f"alpha = {self.alpha} outside "
                                 f"(0, mu/(100 L) = {self.mu / (100 * self.L)}]")
        else:
            if self.L < 2.0 * self.n * self.mu:
                raise ValueError("finite-sum scaling needs L >= 2 n mu")
        return self

    # -- text round trip ----------------------------------------------------

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        known = {f.name: f for f in fields(cls)}
        kv = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in known:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            if key == "mode":
                kv[key] = val
            elif key in ("n", "d", "d_total"):
                kv[key] = int(val)
            elif key == "d_clamped":
                kv[key] = val.lower() in ("true", "1", "yes")
            else:
                kv[key] = float(val)
        for required in ("mode", "L", "mu", "Delta", "epsilon"):
            if required not in kv:
                raise ValueError(f"instance file is missing {required!r}")
        return cls(**kv).validate()

    def instance_id(self):
        bits = [self.mode, f"L{self.L:g}", f"mu{self.mu:g}", f"eps{self.epsilon:g}"]
        if self.mode == "case1":
            bits.append(f"n{self.n}-dt{self.d_total}")
        else:
            bits.append(f"d{self.d}")
            if self.n > 1:
                bits.append(f"n{self.n}")
        return "-".join(bits)

    def make(self):
        if self.mode == "deterministic":
            return make_deterministic_instance(self)
        if self.mode == "finite_sum":
            return make_finite_sum_instance(self)
        return make_case1_instance(self)


# ---------------------------------------------------------------------------
# deterministic chain instance
# ---------------------------------------------------------------------------

def make_deterministic_instance(spec):
    """Scaled single-chain instance f(x, y) = eta^2 F_d(x/eta, y/eta)."""
    spec.validate()
    if spec.mode != "deterministic":
        raise ValueError("spec is not a deterministic-mode spec")
    d, eta = spec.d, spec.eta
    l1, l2, alpha = spec.lambda1, spec.lambda2, spec.alpha

    def value(x, y):
        return kernels.det_value(np.asarray(x, float), np.asarray(y, float),
                                 d, eta, l1, l2, alpha)

    def grad(x, y):
        return kernels.det_grad(np.ascontiguousarray(x, float),
                                np.ascontiguousarray(y, float),
                                d, eta, l1, l2, alpha)

    def primal_value(x):
        return kernels.det_primal_value_np(np.asarray(x, float), d, eta, l1, l2, alpha)

    def primal_grad(x):
        return kernels.det_primal_grad_np(np.asarray(x, float), d, eta, l1, l2, alpha)

    floor = eta * (l1 ** 2 / (8.0 * l2)) * alpha ** 0.75
    meta = {
        "family": "chain", "mode": "deterministic",
        "params": {"d": d, "eta": eta, "lambda1": l1, "lambda2": l2,
                   "alpha": alpha},
        "floor_grad_norm": floor,
        "oracle_floor_calls": 2 * d - 1,
        "watch_x_coord": d,
        "spec": spec,
    }
    return SaddleProblem(d1=d + 1, d2=d + 2, L=spec.L, mu=spec.mu,
                         value=value, grad=grad,
                         primal_value=primal_value, primal_grad=primal_grad,
                         meta=meta)


def deterministic_ystar(spec, x):
    """Best response of the scaled deterministic instance (scale-free)."""
    return kernels.det_ystar_np(np.asarray(x, float), spec.d, spec.eta,
                                spec.lambda1, spec.lambda2, spec.alpha)


# ---------------------------------------------------------------------------
# finite-sum instance
# ---------------------------------------------------------------------------

def make_finite_sum_instance(spec):
    """n chain blocks with a shared curvature term.

    The objective is the block average of the deterministic chain applied to
    each (x, y) block pair; the per-component gradients assign the whole
    bilinear/dual part to component i's blocks but split the curvature term
    across all blocks (scaled by 1/n), so that the component average equals
    the full gradient while component i's dual gradient touches only dual
    block i.
    """
    spec.validate()
    if spec.mode != "finite_sum":
        raise ValueError("spec is not a finite_sum-mode spec")
    n, d, eta = spec.n, spec.d, spec.eta
    l1, l2, alpha = spec.lambda1, spec.lambda2, spec.alpha
    emb = BlockEmbedding(n, d)
    ra = math.sqrt(alpha)
    c1 = l1 * l1 * ra / (2.0 * l2)
    c2 = l1 * l1 * alpha / (2.0 * l2)

    def _check(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if x.shape != (emb.dim_x,) or y.shape != (emb.dim_y,):
            raise ValueError(f"expected shapes ({emb.dim_x},), ({emb.dim_y},); "
                             f"got {x.shape}, {y.shape}")
        return x, y

    def value(x, y):
        x, y = _check(x, y)
        tot = 0.0
        for i in range(n):
            tot += kernels.det_value_np(emb.x_block(x, i), emb.y_block(y, i),
                                        d, eta, l1, l2, alpha)
        return tot / n

    def grad(x, y):
        x, y = _check(x, y)
        gx = np.empty(emb.dim_x)
        gy = np.empty(emb.dim_y)
        for i in range(n):
            bx, by = kernels.det_grad_np(emb.x_block(x, i), emb.y_block(y, i),
                                         d, eta, l1, l2, alpha)
            gx[emb.x_slice(i)] = bx / n
            gy[emb.y_slice(i)] = by / n
        return gx, gy

    def component_grad(i, x, y):
        if not (0 <= i < n):
            raise IndexError(f"component index {i} outside [0, {n})")
        x, y = _check(x, y)
        u = emb.x_block(x, i) / eta
        v = emb.y_block(y, i) / eta
        gx = np.zeros(emb.dim_x)
        gy = np.zeros(emb.dim_y)
        bx = l1 * kernels.chain_apply_t_np(v, alpha)
        bx[0] -= c1
        bx[d] -= c2 * u[d]
        gx[emb.x_slice(i)] = eta * bx
        # shared curvature term: every block's leading d coordinates, weight 1/n
        for b in range(n):
            ub = emb.x_block(x, b)[:d] / eta
            gx[b * emb.block_x:b * emb.block_x + d] += \
                eta * (c2 / n) * kernels.gamma_prime_np(ub)
        gy[emb.y_slice(i)] = eta * (l1 * kernels.chain_apply_np(u, alpha) - 2.0 * l2 * v)
        return gx, gy

    def primal_value(x):
        x = np.asarray(x, float)
        return sum(kernels.det_primal_value_np(emb.x_block(x, i), d, eta,
                                               l1, l2, alpha)
                   for i in range(n)) / n

    def primal_grad(x):
        x = np.asarray(x, float)
        g = np.empty(emb.dim_x)
        for i in range(n):
            g[emb.x_slice(i)] = kernels.det_primal_grad_np(
                emb.x_block(x, i), d, eta, l1, l2, alpha) / n
        return g

    floor = eta * math.sqrt(l1 ** 4 * alpha ** 1.5 / (128.0 * n * l2 ** 2))
    meta = {
        "family": "chain", "mode": "finite_sum",
        "params": {"n": n, "d": d, "eta": eta, "lambda1": l1, "lambda2": l2,
                   "alpha": alpha},
        "floor_grad_norm": floor,
        "oracle_floor_calls": n * (2 * d - 1) // 2,
        "watch_x_coords": [b * emb.block_x + d for b in range(n)],  # 1-based
        "embedding": emb,
        "smoothness_as": spec.L,
        "spec": spec,
    }
    return SaddleProblem(d1=emb.dim_x, d2=emb.dim_y, L=spec.L, mu=spec.mu,
                         value=value, grad=grad,
                         n_components=n, component_grad=component_grad,
                         primal_value=primal_value, primal_grad=primal_grad,
                         meta=meta)


# ---------------------------------------------------------------------------
# case-1 block instance
# ---------------------------------------------------------------------------

def make_case1_instance(spec):
    """Bilinear block family: component i adds a linear pull on its own
    x block; the shared coupling L<x, y> - (mu/2)||y||^2 makes the primal an
    exactly solvable quadratic. Difficulty is purely how many distinct
    components have been queried."""
    spec.validate()
    if spec.mode != "case1":
        raise ValueError("spec is not a case1-mode spec")
    n, dt = spec.n, spec.d_total
    L, mu, theta = spec.L, spec.mu, spec.theta
    m = dt // n

    def _check(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if x.shape != (dt,) or y.shape != (dt,):
            raise ValueError(f"expected shapes ({dt},), got {x.shape}, {y.shape}")
        return x, y

    def value(x, y):
        x, y = _check(x, y)
        return (theta / n) * float(np.sum(x)) + L * float(np.dot(x, y)) \
            - 0.5 * mu * float(np.dot(y, y))

    def grad(x, y):
        x, y = _check(x, y)
        return (theta / n) * np.ones(dt) + L * y, L * x - mu * y

    def component_grad(i, x, y):
        if not (0 <= i < n):
            raise IndexError(f"component index {i} outside [0, {n})")
        x, y = _check(x, y)
        gx = L * y.copy()
        gx[i * m:(i + 1) * m] += theta
        return gx, L * x - mu * y

    def primal_value(x):
        x = np.asarray(x, float)
        return (theta / n) * float(np.sum(x)) + (L ** 2 / (2.0 * mu)) * float(np.dot(x, x))

    def primal_grad(x):
        x = np.asarray(x, float)
        return (theta / n) * np.ones(dt) + (L ** 2 / mu) * x

    meta = {
        "family": "case1", "mode": "case1",
        "params": {"n": n, "d_total": dt, "theta": theta},
        "floor_grad_norm": (theta / n) * math.sqrt(dt / 2.0),
        "oracle_floor_calls": n // 2,
        "spec": spec,
    }
    return SaddleProblem(d1=dt, d2=dt, L=L, mu=mu, value=value, grad=grad,
                         n_components=n, component_grad=component_grad,
                         primal_value=primal_value, primal_grad=primal_grad,
                         meta=meta)


# ---------------------------------------------------------------------------
# closed-form test problems
# ---------------------------------------------------------------------------

def make_quadratic_saddle(dim=2, a=1.0, b=1.0, couplings=(1.0,)):
    """f_i(x, y) = (a/2)||x||^2 + c_i <x, y> - (b/2)||y||^2, averaged.

    Strongly-convex-strongly-concave with saddle at the origin and
    closed-form primal Phi(x) = (a/2 + cbar^2/(2b)) ||x||^2. Smoothness is
    the spectral norm of [[a, cbar], [cbar, b]] (componentwise with c_i).
    """
    couplings = tuple(float(c) for c in couplings)
    n = len(couplings)
    cbar = sum(couplings) / n
    smo = max(np.linalg.norm(np.array([[a, abs(c)], [abs(c), b]]), 2)
              for c in couplings)

    def value(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return 0.5 * a * float(np.dot(x, x)) + cbar * float(np.dot(x, y)) \
            - 0.5 * b * float(np.dot(y, y))

    def grad(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return a * x + cbar * y, cbar * x - b * y

    def component_grad(i, x, y):
        if not (0 <= i < n):
            raise IndexError(f"component index {i} outside [0, {n})")
        c = couplings[i]
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return a * x + c * y, c * x - b * y

    def primal_value(x):
        x = np.asarray(x, float)
        return (0.5 * a + cbar ** 2 / (2.0 * b)) * float(np.dot(x, x))

    def primal_grad(x):
        return (a + cbar ** 2 / b) * np.asarray(x, float)

    return SaddleProblem(d1=dim, d2=dim, L=float(smo), mu=float(b),
                         value=value, grad=grad,
                         n_components=n,
                         component_grad=component_grad if n > 1 else None,
                         primal_value=primal_value, primal_grad=primal_grad,
                         mu_x=float(a),
                         meta={"family": "quadratic", "couplings": couplings,
                               "a": a, "b": b})


def make_bilinear(coupling=1.0, mu_reg=1e-9, dim=1):
    """Nearly pure rotation f = c <x, y> - (mu_reg/2)||y||^2; the classic
    GDA-divergence control."""

    def value(x, y):
        return coupling * float(np.dot(x, y)) - 0.5 * mu_reg * float(np.dot(y, y))

    def grad(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return coupling * y, coupling * x - mu_reg * y

    return SaddleProblem(d1=dim, d2=dim, L=float(coupling), mu=float(mu_reg),
                         value=value, grad=grad,
                         meta={"family": "bilinear", "coupling": coupling,
                               "mu_reg": mu_reg})


# ---------------------------------------------------------------------------
# smoothness estimation and the inf oracle
# ---------------------------------------------------------------------------

def estimate_smoothness(problem, sample_count=1000, seed=0):
    """Sampled (Lipschitz, averaged-smoothness) estimates.

    Draws pairs of nearby points at mixed scales; the first return is the
    max ratio max(||dgx||, ||dgy||) / (||dx|| + ||dy||) of the full
    gradient, the second is sqrt of the max over pairs of the mean squared
    per-component gradient change over the squared joint distance. For
    single-component problems the two coincide up to the denominator
    convention.
    """
    rng = np.random.default_rng(seed)
    scales = np.array([0.03, 0.3, 1.0, 3.0])
    lip = 0.0
    avg_sq = 0.0
    for _ in range(sample_count):
        s = float(rng.choice(scales))
        x1 = rng.standard_normal(problem.d1) * s
        y1 = rng.standard_normal(problem.d2) * s
        x2 = x1 + rng.standard_normal(problem.d1) * (0.3 * s)
        y2 = y1 + rng.standard_normal(problem.d2) * (0.3 * s)
        dx = float(np.linalg.norm(x1 - x2))
        dy = float(np.linalg.norm(y1 - y2))
        if dx + dy == 0.0:
            continue
        g1 = problem.grad(x1, y1)
        g2 = problem.grad(x2, y2)
        lip = max(lip, max(np.linalg.norm(g1[0] - g2[0]),
                           np.linalg.norm(g1[1] - g2[1])) / (dx + dy))
        dist_sq = dx * dx + dy * dy
        if problem.n_components > 1:
            acc = 0.0
            for i in range(problem.n_components):
                c1 = problem.component_grad(i, x1, y1)
                c2 = problem.component_grad(i, x2, y2)
                acc += float(np.dot(c1[0] - c2[0], c1[0] - c2[0])
                             + np.dot(c1[1] - c2[1], c1[1] - c2[1]))
            avg_sq = max(avg_sq, acc / problem.n_components / dist_sq)
        else:
            acc = float(np.dot(g1[0] - g2[0], g1[0] - g2[0])
                        + np.dot(g1[1] - g2[1], g1[1] - g2[1]))
            avg_sq = max(avg_sq, acc / dist_sq)
    return lip, math.sqrt(avg_sq)


def estimate_primal_infimum(problem, n_starts=6, seed=0, gtol=1e-12):
    """Numerical inf_x Phi(x) for problems exposing the closed-form primal.

    Multi-start quasi-Newton; returns the best value found. Used to compute
    Delta = Phi(x0) - inf Phi when checking descent-style bounds.
    """
    from scipy.optimize import minimize
    if problem.primal_value is None or problem.primal_grad is None:
        raise ValueError("problem has no closed-form primal to minimize")
    rng = np.random.default_rng(seed)
    starts = [np.zeros(problem.d1), np.ones(problem.d1)]
    scale = problem.meta.get("params", {}).get("eta", 1.0)
    starts.append(np.full(problem.d1, scale))
    while len(starts) < n_starts:
        starts.append(rng.standard_normal(problem.d1) * scale)
    best = math.inf
    for s in starts:
        res = minimize(problem.primal_value, s, jac=problem.primal_grad,
                       method="L-BFGS-B",
                       options={"gtol": gtol, "ftol": 0.0, "maxiter": 10000})
        if res.fun < best:
            best = float(res.fun)
    return best
