"""Inexact accelerated proximal-point wrapper for smooth saddle problems.

Each outer round t recenters a strongly-convex-strongly-concave auxiliary
problem

    f_hat_t(x, y) = f(x, y) + L ||x - x_t||^2

and drives its gradient norm down by a fixed factor using an inner
accelerated sequence: inner step k solves the further-regularized
subproblem

    f_tilde_k(x, y) = f_hat_t(x, y) - (tau/2) ||y - z_k||^2

to squared-gradient tolerance eps_k = (sqrt(2)/4) (1 - rho)^k n0 (a
geometric schedule hung off n0, the squared auxiliary gradient norm at the
round start), then moves the dual prox center z by momentum. The round
exits when ||grad f_hat_t||^2 has dropped below alpha_t n0.

Oracle accounting is exact: subproblems evaluate their gradients through
one call to the wrapped problem's oracle plus free affine corrections, the
inner stop criterion reuses the gradient the subsolver just computed, and
each inner step pays one extra call for the round-exit check. Examiner
quantities (the primal gradient used for the outer stopping rule and the
per-round stationarity record) go through the closed-form primal and are
never charged.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .core import SaddlePoint, SaddleProblem
from .solvers import SolverConfig, accelerated_ascent, solve_until


class InnerLoopError(RuntimeError):
    """The inner accelerated sequence hit its step cap before contracting."""

    def __init__(self, round_index, max_inner, best_ratio):
        super().__init__(
            f"round {round_index}: inner loop did not contract within "
            f"{max_inner} accelerated steps (best achieved ratio "
            f"{best_ratio:.6e})")
        self.round_index = round_index
        self.max_inner = max_inner
        self.best_ratio = best_ratio


@dataclass
class CatalystConfig:
    """Outer-loop knobs. Defaults follow the analysis constants; epsilon
    feeds both the outer stopping rule and the warm-start tolerance.

    ``alpha_0``/``alpha_t`` override the per-round contraction targets
    (round 0 and rounds >= 1 respectively); the analysis values are tiny in
    L and exist to be overridden in experiments that can afford looser
    rounds.
    """
    epsilon: float
    subsolver: str = "eg"  # "eg" | "ogda" | "svrg"
    tau: Optional[float] = None
    max_rounds: int = 100_000
    max_inner: int = 100_000
    sub_budget: int = 10 ** 8
    total_budget: Optional[int] = None
    seed: int = 0
    warm_start_tol: Optional[float] = None
    step: Optional[float] = None
    rho_factor: float = 0.9
    stop_on_stationarity: bool = True
    alpha_0: Optional[float] = None
    alpha_t: Optional[float] = None


@dataclass
class RoundRecord:
    """One outer round: how hard the inner loop worked and what it achieved."""
    index: int
    inner_iterations: int
    oracle_calls: int
    n0: float
    exit_sq: float
    eps_last: float
    grad_phi_norm: Optional[float] = None
    alpha_target: float = math.nan
    budget_hit: bool = False
    #: per inner step: (eps_k target, subsolver iterations spent)
    inner_history: list = field(default_factory=list)


@dataclass
class CatalystTrace:
    rounds: list = field(default_factory=list)
    warmup_calls: int = 0
    round_xs: list = field(default_factory=list)
    round_ys: list = field(default_factory=list)
    q: float = 0.0
    tau: float = 0.0
    rho: float = 0.0
    momentum: float = 0.0
    #: the inner tolerances are hung off gradient norms, not primal gaps
    tolerance_rule: str = "grad-norm-surrogate"

    @property
    def total_oracle_calls(self):
        return self.warmup_calls + sum(r.oracle_calls for r in self.rounds)


@dataclass
class CatalystResult:
    point: SaddlePoint
    point_sampled: SaddlePoint
    sampled_index: int
    status: str  # "stationary" | "max_rounds" | "budget"
    trace: CatalystTrace


def default_tau(problem, subsolver):
    """Dual prox weight: L - mu for the deterministic subsolvers, the
    variance-reduced budget max(L/sqrt(n) - mu, 0) for svrg."""
    if subsolver == "svrg":
        return max(problem.L / math.sqrt(problem.n_components) - problem.mu, 0.0)
    return problem.L - problem.mu


def _schedule(base_L, mu, n, config):
    """(tau, q, rho, momentum, step) for a base problem with the given
    constants; config.tau/step override the derived values."""
    tau = config.tau
    if tau is None:
        if config.subsolver == "svrg":
            tau = max(base_L / math.sqrt(n) - mu, 0.0)
        else:
            tau = base_L - mu
    if tau < 0:
        raise ValueError("tau must be >= 0")
    q = mu / (mu + tau)
    rho = config.rho_factor * math.sqrt(q)
    momentum = (math.sqrt(q) - q) / (math.sqrt(q) + q)
    step = config.step if config.step is not None \
        else 1.0 / (4.0 * (base_L + max(2.0 * base_L, tau)))
    return tau, q, rho, momentum, step


def _alpha_target(t, base_L, mu, config=None):
    """Per-round contraction target alpha_t for ||grad f_hat||^2 / n0."""
    if config is not None:
        if t == 0 and config.alpha_0 is not None:
            return config.alpha_0
        if t >= 1 and config.alpha_t is not None:
            return config.alpha_t
    if t == 0:
        return mu ** 5 / (576.0 * max(1.0, base_L ** 7))
    return mu ** 5 / (504.0 * base_L ** 5)


def build_aux_problem(problem, center_x):
    """f_hat = f + L ||x - c||^2: strongly convex-concave, 3L-smooth.

    Gradients cost exactly one call to the wrapped problem's oracle; the
    quadratic correction is free examiner-side arithmetic. The closed-form
    primal (when the base problem has one) shifts the same way. The base
    smoothness constant is kept in meta["base_L"] so downstream
    regularizers can be sized off the original problem.
    """
    c = np.array(center_x, dtype=float)
    L = problem.L

    def value(x, y):
        dx = np.asarray(x, float) - c
        return problem.value(x, y) + L * float(np.dot(dx, dx))

    def grad(x, y):
        gx, gy = problem.grad(x, y)
        return gx + 2.0 * L * (np.asarray(x, float) - c), gy

    component_grad = None
    if problem.n_components > 1:
        def component_grad(i, x, y):
            gx, gy = problem.component_grad(i, x, y)
            return gx + 2.0 * L * (np.asarray(x, float) - c), gy

    primal_value = primal_grad = None
    if problem.primal_value is not None:
        def primal_value(x):
            dx = np.asarray(x, float) - c
            return problem.primal_value(x) + L * float(np.dot(dx, dx))
    if problem.primal_grad is not None:
        def primal_grad(x):
            return problem.primal_grad(x) + 2.0 * L * (np.asarray(x, float) - c)

    meta = dict(problem.meta)
    meta["smoothness_as"] = float(meta.get("smoothness_as", problem.L)) + 2.0 * L
    meta["base_L"] = float(L)
    return SaddleProblem(d1=problem.d1, d2=problem.d2,
                         L=3.0 * L, mu=problem.mu,
                         value=value, grad=grad,
                         n_components=problem.n_components,
                         component_grad=component_grad,
                         primal_value=primal_value, primal_grad=primal_grad,
                         mu_x=L, meta=meta)


def build_subproblem(aux_problem, tau, z_center):
    """f_tilde = f_hat - (tau/2) ||y - z||^2 over an auxiliary problem.

    With L the base smoothness (recovered from the auxiliary problem's
    meta), the result is (L, mu + tau)-strongly convex-concave and
    (L + max(2L, tau))-smooth. Each gradient costs one auxiliary call,
    which is itself one base-oracle call.
    """
    cz = np.array(z_center, dtype=float)
    tau = float(tau)
    base_L = float(aux_problem.meta.get("base_L", aux_problem.mu_x))

    def value(x, y):
        dy = np.asarray(y, float) - cz
        return aux_problem.value(x, y) - 0.5 * tau * float(np.dot(dy, dy))

    def grad(x, y):
        gx, gy = aux_problem.grad(x, y)
        return gx, gy - tau * (np.asarray(y, float) - cz)

    component_grad = None
    if aux_problem.n_components > 1:
        def component_grad(i, x, y):
            gx, gy = aux_problem.component_grad(i, x, y)
            return gx, gy - tau * (np.asarray(y, float) - cz)

    meta = dict(aux_problem.meta)
    meta["smoothness_as"] = float(meta.get("smoothness_as",
                                           aux_problem.L)) + tau
    return SaddleProblem(d1=aux_problem.d1, d2=aux_problem.d2,
                         L=base_L + max(2.0 * base_L, tau),
                         mu=aux_problem.mu + tau,
                         value=value, grad=grad,
                         n_components=aux_problem.n_components,
                         component_grad=component_grad,
                         mu_x=base_L, meta=meta)


def _counting_clone(problem):
    """Clone whose oracle calls bump a local counter before delegating, so
    the run can budget itself without touching the caller's logging."""
    counter = {"calls": 0}

    def grad(x, y):
        counter["calls"] += 1
        return problem.grad(x, y)

    component_grad = None
    if problem.n_components > 1:
        def component_grad(i, x, y):
            counter["calls"] += 1
            return problem.component_grad(i, x, y)

    clone = replace(problem, grad=grad, component_grad=component_grad)
    return clone, counter


def inner_loop(aux_problem, start, config, *, round_index=0,
               alpha_target=None, call_counter=None, total_budget=None):
    """Drive the auxiliary gradient norm down by the round's target factor.

    Runs the accelerated inner sequence from ``start``: each step k solves
    the tau-regularized subproblem around the momentum center z_k to the
    geometric tolerance eps_k, warm-starting from the previous solution,
    then updates z. Returns (exit point, RoundRecord). A zero auxiliary
    gradient at the start exits immediately — the single criterion check is
    the round's only oracle work. Raises InnerLoopError (carrying the best
    achieved ratio ||grad f_hat||^2 / n0) if ``config.max_inner`` steps do
    not reach the target.
    """
    base_L = float(aux_problem.meta.get("base_L", aux_problem.mu_x))
    mu = aux_problem.mu
    tau, _, rho, momentum, step = _schedule(base_L, mu,
                                            aux_problem.n_components, config)
    at = alpha_target if alpha_target is not None \
        else _alpha_target(round_index, base_L, mu, config)
    if call_counter is None:
        aux_problem, call_counter = _counting_clone(aux_problem)
    calls0 = call_counter["calls"]

    g0x, g0y = aux_problem.grad(start.x, start.y)
    n0 = float(np.dot(g0x, g0x) + np.dot(g0y, g0y))
    record = RoundRecord(round_index, 0, 0, n0, math.nan, math.nan,
                         alpha_target=at)
    if n0 == 0.0:
        record.exit_sq = 0.0
        record.eps_last = 0.0
        record.oracle_calls = call_counter["calls"] - calls0
        return start.copy(), record

    xk, yk = start.x.copy(), start.y.copy()
    yprev = start.y.copy()
    z = start.y.copy()
    best_ratio = math.inf
    for k in range(1, config.max_inner + 1):
        eps_k = (math.sqrt(2.0) / 4.0) * (1.0 - rho) ** k * n0
        sub = build_subproblem(aux_problem, tau, z)
        sub_cfg = SolverConfig(step_x=step, step_y=step,
                               seed=config.seed * 1_000_003
                               + round_index * 1009 + k)
        res = solve_until(sub, xk, yk, target_sq=eps_k,
                          method=config.subsolver, config=sub_cfg,
                          budget=config.sub_budget)
        xk, yk = res.point.x, res.point.y
        record.inner_history.append((eps_k, res.iterations))
        ghx, ghy = aux_problem.grad(xk, yk)
        nhat = float(np.dot(ghx, ghx) + np.dot(ghy, ghy))
        z = yk + momentum * (yk - yprev)
        yprev = yk.copy()
        best_ratio = min(best_ratio, nhat / n0)
        if nhat <= at * n0:
            record.inner_iterations = k
            record.exit_sq = nhat
            record.eps_last = eps_k
            break
        if total_budget is not None and call_counter["calls"] >= total_budget:
            record.inner_iterations = k
            record.exit_sq = nhat
            record.eps_last = eps_k
            record.budget_hit = True
            break
    else:
        record.oracle_calls = call_counter["calls"] - calls0
        raise InnerLoopError(round_index, config.max_inner, best_ratio)
    record.oracle_calls = call_counter["calls"] - calls0
    return SaddlePoint(xk, yk), record


def catalyst_run(problem, x0=None, y0=None, config=None):
    """Run the accelerated wrapper; see the module docstring for the loop.

    When y0 is omitted the dual block is warmed up by accelerated ascent to
    ||grad_y f(x0, .)|| <= mu epsilon / (160 L) — warm-up calls are charged.
    The result carries both the final/best iterate and the uniformly sampled
    round start that the averaged analysis argues about; the best iterate is
    chosen by the uncharged examiner and does not depend on the seed.
    """
    if config is None:
        raise ValueError("catalyst_run needs a CatalystConfig (epsilon at least)")
    if config.subsolver not in ("eg", "ogda", "svrg"):
        raise ValueError(f"unknown subsolver {config.subsolver!r}")
    if config.subsolver == "svrg" and problem.n_components < 2:
        raise ValueError("svrg subsolver needs a finite-sum problem")
    L, mu = problem.L, problem.mu
    tau, q, rho, momentum, _ = _schedule(L, mu, problem.n_components, config)
    eps_sq = config.epsilon ** 2

    base, counter = _counting_clone(problem)
    trace = CatalystTrace(q=q, tau=tau, rho=rho, momentum=momentum)

    x0 = np.zeros(problem.d1) if x0 is None else np.array(x0, dtype=float)
    if y0 is None:
        tol = config.warm_start_tol if config.warm_start_tol is not None \
            else mu * config.epsilon / (160.0 * L)
        y0, wcalls = accelerated_ascent(base, x0, None, tol=tol)
        trace.warmup_calls = wcalls
    else:
        y0 = np.array(y0, dtype=float)

    examiner = problem.primal_grad  # uncharged, may be None
    status = "max_rounds"

    for t in range(config.max_rounds):
        gp_norm = None
        if examiner is not None:
            gp_norm = float(np.linalg.norm(examiner(x0)))
            if config.stop_on_stationarity and gp_norm ** 2 <= eps_sq:
                status = "stationary"
                break
        if config.total_budget is not None and counter["calls"] >= config.total_budget:
            status = "budget"
            break
        trace.round_xs.append(x0.copy())
        trace.round_ys.append(y0.copy())
        aux = build_aux_problem(base, x0)
        point, record = inner_loop(aux, SaddlePoint(x0, y0), config,
                                   round_index=t, call_counter=counter,
                                   total_budget=config.total_budget)
        record.grad_phi_norm = gp_norm
        trace.rounds.append(record)
        x0, y0 = point.x.copy(), point.y.copy()
        if record.budget_hit:
            status = "budget"
            break

    final = SaddlePoint(x0, y0)
    if trace.round_xs:
        rng = np.random.default_rng(config.seed)
        idx = int(rng.integers(len(trace.round_xs)))
        sampled = SaddlePoint(trace.round_xs[idx], trace.round_ys[idx])
    else:
        idx = 0
        sampled = final.copy()

    if examiner is not None and trace.round_xs:
        norms = [r.grad_phi_norm for r in trace.rounds]
        norms.append(float(np.linalg.norm(examiner(x0))))
        best = int(np.argmin(norms))
        if best < len(trace.round_xs):
            ybest = trace.round_ys[best]
            final = SaddlePoint(trace.round_xs[best], ybest)
    return CatalystResult(point=final, point_sampled=sampled,
                          sampled_index=idx, status=status, trace=trace)


def moreau_stationarity(problem, x, accuracy=1e-8):
    """2L ||x - prox(x)|| for the envelope of Phi at parameter 1/(2L).

    The proximal point minimizes Phi(u) + L ||u - x||^2, which is L-strongly
    convex even when Phi has curvature as low as -L. With a closed-form
    primal the prox is found directly; otherwise the same point is dug out
    of the saddle oracle by driving the auxiliary problem's gradient below
    accuracy * min(L, mu) / (2L), which pins the returned measure to within
    ``accuracy`` of the true one either way.
    """
    x = np.asarray(x, dtype=float)
    L = problem.L
    if problem.primal_grad is not None and problem.primal_value is not None:
        from .metrics import proximal_point
        prox = proximal_point(problem, x, lam=1.0 / (2.0 * L),
                              gtol=accuracy / 2.0)
        return 2.0 * L * float(np.linalg.norm(x - prox))
    aux = build_aux_problem(problem, x)
    target = accuracy * min(L, problem.mu) / (2.0 * L)
    res = solve_until(aux, x, None, target_sq=target ** 2, method="eg",
                      budget=10 ** 8)
    return 2.0 * L * float(np.linalg.norm(x - res.point.x))
