"""Problem containers and the instrumented oracle layer.

A ``SaddleProblem`` bundles the evaluators for one min-max problem
min_x max_y f(x, y): the scalar value, the first-order oracle returning the
pair (grad_x f, grad_y f) for one query point, optionally per-component
gradients for finite sums, and optionally the closed-form primal
Phi(x) = max_y f(x, y) with its gradient.

``wrap_with_logging`` interposes a counter on the oracles. It records, per
query point (not per returned gradient), the first call index at which each
coordinate became nonzero — the activation record that the lower-bound
experiments read off — using exact ``!= 0.0`` comparisons, which is the
right notion here because the chain instances propagate support exactly.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np


class OracleError(RuntimeError):
    """Raised when an oracle is queried with, or produces, junk."""


class SpanProtocolError(RuntimeError):
    """A query point used coordinates that no previous oracle answer (or the
    start point) could have introduced."""


def _as_finite_vector(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr.copy()


@dataclass
class SaddlePoint:
    """A primal-dual pair. Construction copies and checks finiteness."""
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = _as_finite_vector(self.x, "x")
        self.y = _as_finite_vector(self.y, "y")

    def copy(self):
        return SaddlePoint(self.x, self.y)


@dataclass(eq=False)
class SaddleProblem:
    """Oracle bundle for min_x max_y f(x, y).

    Parameters
    ----------
    d1, d2 : int
        Dimensions of the x and y blocks.
    L : float
        Smoothness constant advertised for f (joint, Lipschitz gradients).
    mu : float
        Strong-concavity modulus in y; must satisfy 0 < mu <= L.
    value : callable (x, y) -> float
    grad : callable (x, y) -> (grad_x, grad_y)
        The first-order oracle; one invocation is one oracle call.
    n_components : int
        Finite-sum size; 1 for monolithic objectives.
    component_grad : callable (i, x, y) -> (grad_x, grad_y), optional
        Gradient of component i (0-based); required when n_components > 1.
        The caller supplies i — this layer owns no randomness.
    primal_value, primal_grad : callables on x, optional
        Closed-form Phi(x) = max_y f(x, y) and its gradient, when available.
    mu_x : float
        Strong-convexity modulus in x (0 for nonconvex); nonzero on the
        regularized problems the proximal outer loop builds.
    meta : dict
        Free-form annotations (instance parameters, provenance of derived
        problems, etc.).
    """
    d1: int
    d2: int
    L: float
    mu: float
    value: Callable[[np.ndarray, np.ndarray], float]
    grad: Callable[[np.ndarray, np.ndarray], tuple]
    n_components: int = 1
    component_grad: Optional[Callable[[int, np.ndarray, np.ndarray], tuple]] = None
    primal_value: Optional[Callable[[np.ndarray], float]] = None
    primal_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    mu_x: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("dimensions must be positive")
        if not (self.mu > 0.0):
            raise ValueError("mu must be positive")
        if self.L < self.mu:
            raise ValueError(f"need L >= mu, got L={self.L}, mu={self.mu}")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        if self.n_components > 1 and self.component_grad is None:
            raise ValueError("finite-sum problem needs component_grad")

    @property
    def kappa(self):
        return self.L / self.mu

    def origin(self):
        return SaddlePoint(np.zeros(self.d1), np.zeros(self.d2))


@dataclass
class OracleLog:
    """Call counters and coordinate-activation record for one wrapped problem.

    ``x_activation`` / ``y_activation`` hold (coordinate, call_index) pairs,
    both 1-based, in discovery order: the coordinate was nonzero in the query
    point of that oracle call and zero in every earlier query. Full-gradient
    and component calls share one query index sequence.
    """
    fo_calls: int = 0
    ifo_calls: int = 0
    x_activation: list = field(default_factory=list)
    y_activation: list = field(default_factory=list)
    first_call_with_xd_nonzero: Optional[int] = None
    watch_x_coord: Optional[int] = None
    queries: Optional[list] = None
    _seen_x: set = field(default_factory=set)
    _seen_y: set = field(default_factory=set)
    _span_x: Optional[set] = None
    _span_y: Optional[set] = None

    @property
    def query_count(self):
        return self.fo_calls + self.ifo_calls

    def ifo_equivalent(self, n_components):
        """Incremental-oracle cost: a full-gradient call on an n-component
        problem reveals every component, so it is charged n component calls."""
        return n_components * self.fo_calls + self.ifo_calls

    def reset(self):
        self.fo_calls = 0
        self.ifo_calls = 0
        self.x_activation = []
        self.y_activation = []
        self.first_call_with_xd_nonzero = None
        self._seen_x = set()
        self._seen_y = set()
        if self.queries is not None:
            self.queries = []
        if self._span_x is not None:
            self._span_x = set()
            self._span_y = set()


@dataclass
class TraceRow:
    """One checkpoint of a run: cumulative oracle calls at an outer index,
    with whatever stationarity measures were available there."""
    calls: int
    outer_index: int = 0
    grad_phi_norm: float = math.nan
    aux_grad_sq: float = math.nan
    moreau_norm: float = math.nan
    inner_count: int = 0
    wall_ms: float = math.nan


@dataclass
class RunTrace:
    """Checkpoint rows for one solver run plus the row-level metadata the
    CSV format wants repeated on every line. Rows must arrive with strictly
    increasing cumulative call counts."""
    suite: str = ""
    instance_id: str = ""
    solver: str = ""
    seed: int = 0
    kappa: float = math.nan
    n: int = 1
    epsilon: float = math.nan
    rows: list = field(default_factory=list)

    def append(self, row):
        if self.rows and row.calls <= self.rows[-1].calls:
            raise ValueError(f"cumulative calls must increase: "
                             f"{row.calls} after {self.rows[-1].calls}")
        self.rows.append(row)

    def maybe_append(self, row):
        """append, silently skipping a row that does not advance calls."""
        if not self.rows or row.calls > self.rows[-1].calls:
            self.rows.append(row)

    @property
    def final(self):
        return self.rows[-1] if self.rows else None


def wrap_with_logging(problem, watch_x_coord=None, record_queries=False,
                      track_spans=False):
    """Return (logged_problem, log): a clone of ``problem`` whose oracles
    count calls and record activations on the *query* points.

    Parameters
    ----------
    watch_x_coord : int, optional
        1-based x coordinate whose first nonzero query populates
        ``log.first_call_with_xd_nonzero``.
    record_queries : bool
        Keep copies of every query point in ``log.queries`` (for post-hoc
        examiner scans; memory scales with the call budget).
    track_spans : bool
        Enforce the linear-span query protocol for runs started at the
        origin: every query's support must lie inside the union of supports
        of previously returned gradients. Violations raise
        ``SpanProtocolError``.
    """
    log = OracleLog(watch_x_coord=watch_x_coord)
    if record_queries:
        log.queries = []
    if track_spans:
        log._span_x = set()
        log._span_y = set()

    def observe(x, y):
        idx = log.fo_calls + log.ifo_calls  # already incremented by caller
        x = np.asarray(x)
        y = np.asarray(y)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise OracleError(f"non-finite query at call {idx}")
        for coord in np.nonzero(x)[0]:
            c = int(coord) + 1
            if c not in log._seen_x:
                log._seen_x.add(c)
                log.x_activation.append((c, idx))
                if c == log.watch_x_coord and log.first_call_with_xd_nonzero is None:
                    log.first_call_with_xd_nonzero = idx
        for coord in np.nonzero(y)[0]:
            c = int(coord) + 1
            if c not in log._seen_y:
                log._seen_y.add(c)
                log.y_activation.append((c, idx))
        if log.queries is not None:
            log.queries.append((x.copy(), y.copy()))
        if log._span_x is not None:
            qx = {int(i) for i in np.nonzero(x)[0]}
            qy = {int(i) for i in np.nonzero(y)[0]}
            if not qx <= log._span_x or not qy <= log._span_y:
                raise SpanProtocolError(
                    f"call {idx} queried coordinates outside the span of "
                    f"returned gradients: x extra {sorted(qx - log._span_x)}, "
                    f"y extra {sorted(qy - log._span_y)}")

    def absorb(gx, gy):
        if log._span_x is not None:
            log._span_x |= {int(i) for i in np.nonzero(gx)[0]}
            log._span_y |= {int(i) for i in np.nonzero(gy)[0]}

    def grad(x, y):
        log.fo_calls += 1
        observe(x, y)
        gx, gy = problem.grad(x, y)
        absorb(gx, gy)
        return gx, gy

    component_grad = None
    if problem.component_grad is not None:
        def component_grad(i, x, y):
            log.ifo_calls += 1
            observe(x, y)
            gx, gy = problem.component_grad(i, x, y)
            absorb(gx, gy)
            return gx, gy

    logged = SaddleProblem(
        d1=problem.d1, d2=problem.d2, L=problem.L, mu=problem.mu,
        value=problem.value, grad=grad,
        n_components=problem.n_components, component_grad=component_grad,
        primal_value=problem.primal_value, primal_grad=problem.primal_grad,
        mu_x=problem.mu_x, meta=dict(problem.meta))
    return logged, log


def finite_difference_check(problem, point, step=1e-6):
    """Max relative error of the analytic gradient pair against central
    differences of ``problem.value`` at ``point``.

    Returns max_i |fd_i - g_i| / (1 + |g_i|) over both blocks. Raises if the
    objective evaluates non-finite anywhere on the stencil.
    """
    x, y = point.x, point.y
    gx, gy = problem.grad(x, y)
    worst = 0.0

    def central(f_plus, f_minus):
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise OracleError("objective evaluated non-finite during the "
                              "finite-difference stencil")
        return (f_plus - f_minus) / (2.0 * step)

    for i in range(problem.d1):
        e = np.zeros_like(x)
        e[i] = step
        fd = central(problem.value(x + e, y), problem.value(x - e, y))
        worst = max(worst, abs(fd - gx[i]) / (1.0 + abs(gx[i])))
    for j in range(problem.d2):
        e = np.zeros_like(y)
        e[j] = step
        fd = central(problem.value(x, y + e), problem.value(x, y - e))
        worst = max(worst, abs(fd - gy[j]) / (1.0 + abs(gy[j])))
    return worst
