"""First-order saddle solvers with exact oracle accounting.

Every solver queries the problem's gradient oracle through ordinary calls,
so wrapping the problem with :func:`saddlekit.core.wrap_with_logging` counts
exactly what each method consumes:

* ``gda``            — simultaneous descent/ascent, 1 full gradient/iter;
* ``alt_gda``        — Gauss-Seidel variant, 2 full gradients/iter;
* ``extragradient``  — midpoint step, 2 full gradients/iter;
* ``ogda``           — optimistic step reusing the previous gradient, 1/iter;
* ``svrg_saddle``    — one full gradient per snapshot plus 2 component
                       gradients per inner step.

Stop predicates run at the start of an iteration on the gradient that the
iteration was going to use anyway, so checking costs no extra oracle calls;
an exit on iteration k of extragradient has spent 2k + 1 calls, not 2k + 2.
Each result carries its own exact call count and an optional checkpoint
trace; checkpoint rows never include wall-clock times, keeping traces
bit-identical across reruns.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np

from .core import RunTrace, SaddlePoint, TraceRow


class DivergenceError(RuntimeError):
    """Iterate left the trust region or went non-finite."""

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration


class BudgetExceededError(RuntimeError):
    """solve_until ran out of iterations before meeting its target."""

    def __init__(self, budget, best_sq, point=None):
        super().__init__(f"no iterate met the target within {budget} "
                         f"iterations (best squared measure {best_sq:.6e})")
        self.budget = budget
        self.best_sq = best_sq
        self.point = point


@dataclass
class SolverConfig:
    """Knobs shared by all solvers; unset steps fall back to safe defaults
    derived from the problem's advertised constants.

    ``stop_predicate(point, (gx, gy))`` is consulted at the start of each
    iteration (each epoch snapshot for svrg) with the gradient the iteration
    was about to use, so stopping decisions are oracle-free. ``trace_every``
    > 0 appends a checkpoint row every that-many criterion checks.
    """
    step_x: Optional[float] = None
    step_y: Optional[float] = None
    max_iters: int = 1_000_000
    seed: int = 0
    epoch_length: Optional[int] = None
    stop_predicate: Optional[Callable[[SaddlePoint, Tuple[np.ndarray, np.ndarray]], bool]] = None
    divergence_radius_sq: float = 1e18
    trace_every: int = 0


@dataclass
class SolveResult:
    point: SaddlePoint
    iterations: int
    status: str  # "predicate" | "max_iters"
    oracle_calls: int = 0
    last_grads: Optional[Tuple[np.ndarray, np.ndarray]] = None
    trace: Optional[RunTrace] = None
    #: squared stop measure at the exit point (solve_until only)
    measure_sq: Optional[float] = None


def _start(problem, x0, y0):
    x = np.zeros(problem.d1) if x0 is None else np.array(x0, dtype=float)
    y = np.zeros(problem.d2) if y0 is None else np.array(y0, dtype=float)
    if x.shape != (problem.d1,) or y.shape != (problem.d2,):
        raise ValueError(f"start point has shapes {x.shape}/{y.shape}, "
                         f"problem is ({problem.d1},)/({problem.d2},)")
    return x, y


def _guard(x, y, k, radius_sq):
    s = float(np.dot(x, x) + np.dot(y, y))
    if not math.isfinite(s) or s > radius_sq:
        raise DivergenceError(f"iterate diverged at iteration {k} "
                              f"(squared norm {s:.3e})", iteration=k)


def _check_pred(config, x, y, gx, gy):
    if config.stop_predicate is None:
        return False
    return bool(config.stop_predicate(SaddlePoint(x, y), (gx, gy)))


def _make_tracer(problem, config, solver_name):
    """Checkpoint recorder: returns (trace, note, finish)."""
    trace = RunTrace(solver=solver_name, n=problem.n_components)
    examiner = problem.primal_grad

    def row(k, calls, x, gsq):
        gp = math.nan
        if examiner is not None:
            gp = float(np.linalg.norm(examiner(x)))
        return TraceRow(calls=calls, outer_index=k, grad_phi_norm=gp,
                        aux_grad_sq=gsq)

    def note(k, calls, x, gsq):
        if config.trace_every and k % config.trace_every == 0:
            trace.maybe_append(row(k, calls, x, gsq))

    def finish(k, calls, x, gsq=math.nan):
        if calls > 0:
            trace.maybe_append(row(k, calls, x, gsq))

    return trace, note, finish


def _gda_steps(problem, config):
    sx = config.step_x
    sy = config.step_y
    if sx is None:
        sx = 1.0 / (16.0 * problem.L * (problem.kappa + 1.0) ** 2)
    if sy is None:
        sy = 1.0 / (2.0 * problem.L)
    return sx, sy


def gda(problem, x0=None, y0=None, config=None):
    """Simultaneous gradient descent-ascent. One oracle call per iteration.

    Default steps (1/(16 L (kappa+1)^2), 1/(2 L)) are the standard safe
    tuning for smooth problems that are only strongly concave in y.
    """
    config = config or SolverConfig()
    sx, sy = _gda_steps(problem, config)
    x, y = _start(problem, x0, y0)
    trace, note, finish = _make_tracer(problem, config, "gda")
    calls = 0
    gsq = math.nan
    for k in range(config.max_iters):
        _guard(x, y, k, config.divergence_radius_sq)
        gx, gy = problem.grad(x, y)
        calls += 1
        gsq = float(np.dot(gx, gx) + np.dot(gy, gy))
        if _check_pred(config, x, y, gx, gy):
            finish(k, calls, x, gsq)
            return SolveResult(SaddlePoint(x, y), k, "predicate", calls,
                               (gx, gy), trace)
        note(k, calls, x, gsq)
        x = x - sx * gx
        y = y + sy * gy
    _guard(x, y, config.max_iters, config.divergence_radius_sq)
    finish(config.max_iters, calls, x, gsq)
    return SolveResult(SaddlePoint(x, y), config.max_iters, "max_iters",
                       calls, None, trace)


def alt_gda(problem, x0=None, y0=None, config=None):
    """Alternating descent-ascent: x moves first, then y sees the new x.
    Two oracle calls per iteration."""
    config = config or SolverConfig()
    sx, sy = _gda_steps(problem, config)
    x, y = _start(problem, x0, y0)
    trace, note, finish = _make_tracer(problem, config, "alt_gda")
    calls = 0
    gsq = math.nan
    for k in range(config.max_iters):
        _guard(x, y, k, config.divergence_radius_sq)
        gx, gy = problem.grad(x, y)
        calls += 1
        gsq = float(np.dot(gx, gx) + np.dot(gy, gy))
        if _check_pred(config, x, y, gx, gy):
            finish(k, calls, x, gsq)
            return SolveResult(SaddlePoint(x, y), k, "predicate", calls,
                               (gx, gy), trace)
        note(k, calls, x, gsq)
        x = x - sx * gx
        _, gy2 = problem.grad(x, y)
        calls += 1
        y = y + sy * gy2
    _guard(x, y, config.max_iters, config.divergence_radius_sq)
    finish(config.max_iters, calls, x, gsq)
    return SolveResult(SaddlePoint(x, y), config.max_iters, "max_iters",
                       calls, None, trace)


def extragradient(problem, x0=None, y0=None, config=None):
    """Midpoint (extra-gradient) method, two oracle calls per iteration;
    default step 1/(4 L) on both blocks."""
    config = config or SolverConfig()
    sx = config.step_x if config.step_x is not None else 1.0 / (4.0 * problem.L)
    sy = config.step_y if config.step_y is not None else sx
    x, y = _start(problem, x0, y0)
    trace, note, finish = _make_tracer(problem, config, "eg")
    calls = 0
    gsq = math.nan
    for k in range(config.max_iters):
        _guard(x, y, k, config.divergence_radius_sq)
        gx, gy = problem.grad(x, y)
        calls += 1
        gsq = float(np.dot(gx, gx) + np.dot(gy, gy))
        if _check_pred(config, x, y, gx, gy):
            finish(k, calls, x, gsq)
            return SolveResult(SaddlePoint(x, y), k, "predicate", calls,
                               (gx, gy), trace)
        note(k, calls, x, gsq)
        xm = x - sx * gx
        ym = y + sy * gy
        gx2, gy2 = problem.grad(xm, ym)
        calls += 1
        x = x - sx * gx2
        y = y + sy * gy2
    _guard(x, y, config.max_iters, config.divergence_radius_sq)
    finish(config.max_iters, calls, x, gsq)
    return SolveResult(SaddlePoint(x, y), config.max_iters, "max_iters",
                       calls, None, trace)


def ogda(problem, x0=None, y0=None, config=None):
    """Optimistic descent-ascent z+ = z -/+ step (2 g_k - g_{k-1}).

    Reuses the previous gradient, so only one oracle call per iteration;
    the first step, with no history, is a plain descent-ascent step.
    Default step 1/(4 L), shared with extragradient.
    """
    config = config or SolverConfig()
    sx = config.step_x if config.step_x is not None else 1.0 / (4.0 * problem.L)
    sy = config.step_y if config.step_y is not None else sx
    x, y = _start(problem, x0, y0)
    trace, note, finish = _make_tracer(problem, config, "ogda")
    calls = 0
    gsq = math.nan
    pgx = pgy = None
    for k in range(config.max_iters):
        _guard(x, y, k, config.divergence_radius_sq)
        gx, gy = problem.grad(x, y)
        calls += 1
        gsq = float(np.dot(gx, gx) + np.dot(gy, gy))
        if _check_pred(config, x, y, gx, gy):
            finish(k, calls, x, gsq)
            return SolveResult(SaddlePoint(x, y), k, "predicate", calls,
                               (gx, gy), trace)
        note(k, calls, x, gsq)
        if pgx is None:
            pgx, pgy = gx, gy
        x = x - sx * (2.0 * gx - pgx)
        y = y + sy * (2.0 * gy - pgy)
        pgx, pgy = gx, gy
    _guard(x, y, config.max_iters, config.divergence_radius_sq)
    finish(config.max_iters, calls, x, gsq)
    return SolveResult(SaddlePoint(x, y), config.max_iters, "max_iters",
                       calls, None, trace)


def svrg_saddle(problem, x0=None, y0=None, config=None):
    """Variance-reduced descent-ascent over a finite-sum problem.

    Each epoch takes one full-gradient snapshot, then ``epoch_length``
    corrected component steps (two component calls each). The stop
    predicate is evaluated only at snapshots, where a full gradient is in
    hand; ``iterations`` counts inner steps. Defaults: step 1/(8 L) on both
    blocks, epoch length 2 n — deliberately conservative for the
    well-balanced subproblems this is aimed at.
    """
    config = config or SolverConfig()
    n = problem.n_components
    if n < 2:
        raise ValueError("svrg_saddle needs a finite-sum problem with n >= 2 "
                         "components; use extragradient for single-component "
                         "problems")
    sx = config.step_x if config.step_x is not None else 1.0 / (8.0 * problem.L)
    sy = config.step_y if config.step_y is not None else sx
    m = config.epoch_length or 2 * n
    rng = np.random.default_rng(config.seed)
    xs, ys = _start(problem, x0, y0)
    trace, note, finish = _make_tracer(problem, config, "svrg")
    calls = 0
    it = 0
    epoch = 0
    while True:
        _guard(xs, ys, it, config.divergence_radius_sq)
        Gx, Gy = problem.grad(xs, ys)
        calls += 1
        gsq = float(np.dot(Gx, Gx) + np.dot(Gy, Gy))
        if _check_pred(config, xs, ys, Gx, Gy):
            finish(it, calls, xs, gsq)
            return SolveResult(SaddlePoint(xs, ys), it, "predicate", calls,
                               (Gx, Gy), trace)
        if it >= config.max_iters:
            finish(it, calls, xs, gsq)
            return SolveResult(SaddlePoint(xs, ys), it, "max_iters", calls,
                               None, trace)
        note(epoch, calls, xs, gsq)
        epoch += 1
        x, y = xs.copy(), ys.copy()
        for _ in range(m):
            i = int(rng.integers(n))
            cgx, cgy = problem.component_grad(i, x, y)
            sgx, sgy = problem.component_grad(i, xs, ys)
            calls += 2
            x = x - sx * (cgx - sgx + Gx)
            y = y + sy * (cgy - sgy + Gy)
            it += 1
            if it >= config.max_iters:
                break
        _guard(x, y, it, config.divergence_radius_sq)
        xs, ys = x, y


_METHODS = {
    "gda": gda,
    "alt_gda": alt_gda,
    "eg": extragradient,
    "extragradient": extragradient,
    "ogda": ogda,
    "svrg": svrg_saddle,
}


def get_method(name):
    if name not in _METHODS:
        raise ValueError(f"unknown method {name!r}; "
                         f"choose from {sorted(set(_METHODS))}")
    return _METHODS[name]


def solve_until(problem, x0=None, y0=None, *, target_sq, method="eg",
                config=None, budget=1_000_000, measure=None):
    """Run a solver until a squared stationarity measure drops to target_sq.

    ``measure(point, (gx, gy))`` defaults to the squared gradient norm
    ||gx||^2 + ||gy||^2 and is evaluated on each iteration's own gradient
    (each snapshot's, for svrg), costing no extra oracle calls. Returns a
    SolveResult whose ``measure_sq`` satisfies the target — possibly after
    zero iterations when the start point already qualifies — or raises
    BudgetExceededError carrying the best value seen.
    """
    runner = get_method(method)
    if target_sq < 0:
        raise ValueError("target_sq must be >= 0")
    if measure is None:
        def measure(point, grads):
            return float(np.dot(grads[0], grads[0]) + np.dot(grads[1], grads[1]))
    state = {"best": math.inf, "exit": None}

    def pred(point, grads):
        val = measure(point, grads)
        if val < state["best"]:
            state["best"] = val
        if val <= target_sq:
            state["exit"] = val
            return True
        return False

    cfg = replace(config or SolverConfig(), stop_predicate=pred,
                  max_iters=budget)
    result = runner(problem, x0, y0, cfg)
    if result.status != "predicate":
        raise BudgetExceededError(budget, state["best"], point=result.point)
    result.measure_sq = state["exit"]
    return result


def accelerated_ascent(problem, x, y0=None, tol=1e-10, max_iters=200_000):
    """Nesterov ascent on the strongly concave y-problem at fixed x.

    Returns (y, oracle_calls); stops when ||grad_y|| <= tol at the
    extrapolated point or when the iteration budget runs out. Oracle calls
    are full-gradient calls (the oracle returns the pair; only the y half
    is used here, but the call is still charged).
    """
    kap = problem.kappa
    beta = (math.sqrt(kap) - 1.0) / (math.sqrt(kap) + 1.0)
    step = 1.0 / problem.L
    y = np.zeros(problem.d2) if y0 is None else np.array(y0, dtype=float)
    yp = y.copy()
    calls = 0
    for k in range(max_iters):
        v = y + beta * (y - yp)
        _, gy = problem.grad(x, v)
        calls += 1
        if float(np.linalg.norm(gy)) <= tol:
            return v, calls
        yp = y
        y = v + step * gy
        s = float(np.dot(y, y))
        if not math.isfinite(s) or s > 1e18:
            raise DivergenceError(f"ascent diverged at iteration {k} "
                                  f"(squared norm {s:.3e})", iteration=k)
    return y, calls


@dataclass(frozen=True)
class RateModel:
    """Contraction base of a linearly converging subsolver: the modeled
    squared-distance decay is (1 - 1/Lambda)^N after N iterations.

    The printed extragradient constant evaluates below 1 at tau = L - mu,
    which cannot serve as a contraction base, so ``effective`` clamps to
    >= 2 before any iteration-count arithmetic; treat predictions as fit
    anchors rather than ground truth.
    """
    lambda_M: float

    @property
    def effective(self):
        return max(2.0, self.lambda_M)

    @classmethod
    def for_eg(cls, L, mu, tau):
        return cls((L + max(2.0 * L, tau)) / (4.0 * min(L, mu + tau)))

    @classmethod
    def for_svrg(cls, L, mu, tau, n):
        ratio = (L + math.sqrt(2.0) * max(2.0 * L, tau)) / min(L, mu + tau)
        return cls(n + ratio ** 2)

    def iterations(self, decrease_factor):
        """Modeled N with (1 - 1/Lambda)^N <= decrease_factor."""
        if not (0.0 < decrease_factor < 1.0):
            raise ValueError("decrease_factor must lie in (0, 1)")
        per = -math.log1p(-1.0 / self.effective)
        return int(math.ceil(math.log(1.0 / decrease_factor) / per))
