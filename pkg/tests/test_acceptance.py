"""Acceptance gate: ten end-to-end checks, one test (and one pass/fail
line under ``pytest -v``) per criterion.

The checks are property-based plus desk-scale scaling runs: gradient and
primal closed forms against finite differences, zero-chain support growth
bit-exactly, gradient-norm floors, oracle-floor audits of the solver
roster, averaged-smoothness sampling, the accelerated wrapper's averaged
stationarity and Moreau-sum bounds, the condition-number separation fit,
subsolver linear rates, and bench determinism.
"""

import math
import time

import numpy as np
import pytest

from saddlekit.catalyst import (
    CatalystConfig,
    build_aux_problem,
    build_subproblem,
    catalyst_run,
    default_tau,
    moreau_stationarity,
)
from saddlekit.core import SaddlePoint, finite_difference_check
from saddlekit.harness import bench_kappa, kappa_sweep, lower_bound_suite
from saddlekit.instances import (
    HardInstanceSpec,
    deterministic_ystar,
    estimate_primal_infimum,
)
from saddlekit.metrics import (
    averaged_stationarity_bound,
    first_passage_iterations,
    fit_linear_convergence,
    moreau_sum_bound,
)


def _det_spec(d):
    return HardInstanceSpec.derive("deterministic", L=1.0, mu=0.25,
                                   Delta=1.0, epsilon=0.05, d_override=d)


def _fs_spec(n, d, mu=0.05):
    return HardInstanceSpec.derive("finite_sum", L=1.0, mu=mu, Delta=1.0,
                                   epsilon=0.05, n=n, d_override=d)


def _points(rng, dim, scale):
    return rng.normal(size=dim) * scale


# ---------------------------------------------------------------------------
# 1. gradient correctness
# ---------------------------------------------------------------------------


def test_c01_gradients_match_finite_differences():
    """Max relative error <= 1e-5 over 50 random points per instance:
    chain depths {1, 5, 20}, finite sums for n in {2, 4} x d in {3, 6},
    and the quadratic block family. Under 5 seconds."""
    t0 = time.perf_counter()
    specs = [_det_spec(d) for d in (1, 5, 20)]
    specs += [_fs_spec(n, d) for n in (2, 4) for d in (3, 6)]
    specs.append(HardInstanceSpec.derive("case1", L=1.0, mu=0.5, Delta=1.0,
                                         epsilon=0.5, n=4))
    worst = 0.0
    for spec in specs:
        problem = spec.make()
        scale = 0.5 * (spec.eta if spec.mode != "case1" else 1.0)
        rng = np.random.default_rng(101)
        for _ in range(50):
            pt = SaddlePoint(_points(rng, problem.d1, scale),
                             _points(rng, problem.d2, scale))
            worst = max(worst, finite_difference_check(problem, pt))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-5, f"max relative FD error {worst:.3e}"
    assert elapsed < 5.0, f"took {elapsed:.1f}s"
    print(f"criterion 1: max FD rel err {worst:.2e} over {len(specs)} "
          f"instances in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 2. primal identity
# ---------------------------------------------------------------------------


def test_c02_primal_equals_value_at_best_response():
    """|Phi(x) - f(x, y*(x))| <= 1e-10 (1 + |Phi|) at 200 random points per
    family, with the closed-form maximizer. Under 5 seconds."""
    t0 = time.perf_counter()

    def check(problem, x, ystar):
        phi = problem.primal_value(x)
        gap = abs(phi - problem.value(x, ystar))
        assert gap <= 1e-10 * (1.0 + abs(phi)), gap

    det = _det_spec(8)
    det_problem = det.make()
    rng = np.random.default_rng(202)
    for _ in range(200):
        x = _points(rng, det_problem.d1, 0.6 * det.eta)
        check(det_problem, x, deterministic_ystar(det, x))

    fs = _fs_spec(3, 4)
    fs_problem = fs.make()
    emb = fs_problem.meta["embedding"]
    for _ in range(200):
        x = _points(rng, fs_problem.d1, 0.6 * fs.eta)
        ystar = np.zeros(fs_problem.d2)
        for b in range(fs.n):
            ystar[emb.y_slice(b)] = deterministic_ystar(fs, emb.x_block(x, b))
        check(fs_problem, x, ystar)

    case1 = HardInstanceSpec.derive("case1", L=1.0, mu=0.5, Delta=1.0,
                                    epsilon=0.5, n=4)
    c1_problem = case1.make()
    ratio = c1_problem.L / c1_problem.mu
    for _ in range(200):
        x = _points(rng, c1_problem.d1, 1.0)
        check(c1_problem, x, ratio * x)

    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0, f"took {elapsed:.1f}s"
    print(f"criterion 2: primal identity at 600 points in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 3. zero-chain exactness
# ---------------------------------------------------------------------------


def test_c03_zero_chain_supports_bit_exact():
    """Depth-20 chain, 100 points per case, zero tolerance: (a) the origin
    activates only the first primal coordinate; (b) balanced spans extend
    the primal side by at most one; (c) a one-ahead primal span extends the
    dual side by at most one."""
    spec = _det_spec(20)
    problem = spec.make()
    d, d1, d2 = spec.d, problem.d1, problem.d2
    rng = np.random.default_rng(303)

    def supports(x, y):
        gx, gy = problem.grad(x, y)
        return set(np.nonzero(gx)[0]), set(np.nonzero(gy)[0])

    # (a) x = y = 0
    for _ in range(100):
        sx, sy = supports(np.zeros(d1), np.zeros(d2))
        assert sx == {0}
        assert sy == set()

    # (b) x on its first k coordinates, y on dual level k
    for _ in range(100):
        k = int(rng.integers(1, d))
        x = np.zeros(d1)
        x[:k] = rng.normal(size=k) * spec.eta
        y = np.zeros(d2)
        y[d - k + 1:d + 2] = rng.normal(size=k + 1) * spec.eta
        sx, sy = supports(x, y)
        assert sx <= set(range(k + 1)), (k, sorted(sx))
        assert sy <= set(range(d - k + 1, d + 2)), (k, sorted(sy))

    # (c) x one level ahead of y
    for _ in range(100):
        k = int(rng.integers(1, d - 1))
        x = np.zeros(d1)
        x[:k + 1] = rng.normal(size=k + 1) * spec.eta
        y = np.zeros(d2)
        y[d - k + 1:d + 2] = rng.normal(size=k + 1) * spec.eta
        sx, sy = supports(x, y)
        assert sx <= set(range(k + 1)), (k, sorted(sx))
        assert sy <= set(range(d - k, d + 2)), (k, sorted(sy))

    print("criterion 3: 300 span-supported queries, supports bit-exact")


# ---------------------------------------------------------------------------
# 4. gradient-norm floor
# ---------------------------------------------------------------------------


def test_c04_gradient_norm_floor_on_dormant_subspace():
    """1000 random x with the last two primal coordinates zero never fall
    below the floor (lambda1^2 / 8 lambda2) alpha^{3/4} on the instance
    scale, and that floor equals the configured epsilon to 1e-12 relative."""
    spec = _det_spec(6)
    problem = spec.make()
    floor = (spec.lambda1 ** 2 / (8.0 * spec.lambda2)) \
        * spec.alpha ** 0.75 * spec.eta
    assert abs(floor - spec.epsilon) <= 1e-12 * spec.epsilon

    rng = np.random.default_rng(404)
    violations = 0
    for _ in range(1000):
        x = _points(rng, problem.d1, spec.eta)
        x[spec.d - 1] = 0.0
        x[spec.d] = 0.0
        norm = float(np.linalg.norm(problem.primal_grad(x)))
        if norm < floor * (1.0 - 1e-12):
            violations += 1
    assert violations == 0
    print(f"criterion 4: floor {floor:.6e} == epsilon, 0/1000 violations")


# ---------------------------------------------------------------------------
# 5. lower-bound oracle floor
# ---------------------------------------------------------------------------


def test_c05_solver_roster_respects_oracle_floors():
    """Deterministic depth-10 chain: descent-ascent (simultaneous and
    alternating), extragradient, optimistic, and the wrapped extragradient
    each spend at least 2d-1 = 19 full-gradient calls before any query is
    epsilon-stationary. Finite-sum chain (n=4, d=6): the component-oracle
    solvers average at least n(2d-1)/2 = 22 component-equivalents over 20
    seeds. Hard assertion."""
    out = lower_bound_suite()

    det = out["deterministic"]
    assert det.floor_calls == 19
    assert det.epsilon_floor_applies
    assert set(det.audits) == {"gda", "alt_gda", "eg", "ogda", "catalyst-eg"}
    for name, audit in det.audits.items():
        assert audit.satisfied, name
        work = audit.work_at_first_stationary
        assert work is None or work >= 19, (name, work)

    fs_reports = out["finite_sum"]
    assert len(fs_reports) == 20
    assert fs_reports[0].floor_calls == 22
    works = []
    for rep in fs_reports:
        for name, audit in rep.audits.items():
            assert audit.satisfied, name
        w = rep.audits["svrg"].work_at_first_stationary
        if w is not None:
            works.append(w)
    assert works, "component solver never certified stationarity"
    mean_work = float(np.mean(works))
    assert mean_work >= 22.0, mean_work

    assert out["case1"].satisfied
    print(f"criterion 5: det floor 19 respected by 5 solvers; finite-sum "
          f"mean component work {mean_work:.0f} >= 22 over "
          f"{len(works)} seeds")


# ---------------------------------------------------------------------------
# 6. averaged smoothness
# ---------------------------------------------------------------------------


def _max_as_ratio(problem, pairs, scale, seed):
    """Max over sampled pairs of the mean squared component-gradient
    difference over squared distance — the squared averaged-smoothness
    ratio."""
    rng = np.random.default_rng(seed)
    n = problem.n_components
    worst = 0.0
    for _ in range(pairs):
        x1 = _points(rng, problem.d1, scale)
        y1 = _points(rng, problem.d2, scale)
        x2 = _points(rng, problem.d1, scale)
        y2 = _points(rng, problem.d2, scale)
        den = float(np.dot(x1 - x2, x1 - x2) + np.dot(y1 - y2, y1 - y2))
        num = 0.0
        for i in range(n):
            ax, ay = problem.component_grad(i, x1, y1)
            bx, by = problem.component_grad(i, x2, y2)
            num += float(np.dot(ax - bx, ax - bx) + np.dot(ay - by, ay - by))
        worst = max(worst, num / (n * den))
    return worst


def test_c06_averaged_smoothness_within_advertised_bounds():
    """Sampled squared AS ratios on the finite-sum chain stay below
    L^2 (1 + 1e-6) over 10^4 pairs; on the doubly regularized subproblem
    (primal weight 2L, dual weight tau) below 2 (L + max{2L, tau})^2."""
    spec = _fs_spec(2, 3)
    problem = spec.make()
    L = problem.L
    ratio = _max_as_ratio(problem, 10_000, spec.eta, seed=606)
    assert ratio <= L ** 2 * (1.0 + 1e-6), ratio

    tau = default_tau(problem, "svrg")
    rng = np.random.default_rng(607)
    aux = build_aux_problem(problem, _points(rng, problem.d1, spec.eta))
    sub = build_subproblem(aux, tau, _points(rng, problem.d2, spec.eta))
    sub_bound = 2.0 * (L + max(2.0 * L, tau)) ** 2 * (1.0 + 1e-6)
    sub_ratio = _max_as_ratio(sub, 10_000, spec.eta, seed=608)
    assert sub_ratio <= sub_bound, (sub_ratio, sub_bound)
    print(f"criterion 6: AS ratio {ratio:.4f} <= {L**2:.4f}; subproblem "
          f"{sub_ratio:.4f} <= {sub_bound:.4f}")


# ---------------------------------------------------------------------------
# 7. accelerated wrapper outer bounds
# ---------------------------------------------------------------------------


def test_c07_catalyst_outer_bounds_along_trace():
    """Condition number 16 at desk scale, dual block started at the exact
    best response (so the dual-distance term vanishes): every prefix of the
    round-exit trace satisfies the averaged squared-stationarity bound
    (268 L / 5T) Delta, and the squared Moreau-envelope norms sum below
    (87 L / 5) Delta within the prox-solver accuracy. Under 60 seconds."""
    t0 = time.perf_counter()
    spec = HardInstanceSpec.derive("deterministic", L=1.0, mu=1.0 / 16.0,
                                   Delta=1.0, epsilon=0.0122)
    problem = spec.make()
    L = problem.L
    x0 = np.zeros(problem.d1)
    y0 = deterministic_ystar(spec, x0)  # D_y^0 = 0

    cfg = CatalystConfig(epsilon=spec.epsilon, subsolver="eg", seed=0)
    res = catalyst_run(problem, x0, y0, cfg)
    assert res.status == "stationary"
    assert len(res.trace.rounds) >= 2

    delta = problem.primal_value(x0) - estimate_primal_infimum(problem)
    assert delta > 0.0

    # round-start norms; entries 1.. are the exits x_0^{t+1} of rounds t
    norms = [r.grad_phi_norm for r in res.trace.rounds]
    exits_sq = [g * g for g in norms[1:]]
    for T in range(1, len(exits_sq) + 1):
        avg = sum(exits_sq[:T]) / T
        bound = averaged_stationarity_bound(L, delta, 0.0, T)
        assert avg <= bound, (T, avg, bound)

    msum = sum(moreau_stationarity(problem, x, accuracy=1e-8) ** 2
               for x in res.trace.round_xs[1:])
    mbound = moreau_sum_bound(L, delta, 0.0)
    assert msum <= mbound + 1e-5, (msum, mbound)

    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    print(f"criterion 7: {len(exits_sq)} round exits, avg bound ok, "
          f"Moreau sum {msum:.4e} <= {mbound:.4e}, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 8. condition-number separation
# ---------------------------------------------------------------------------


def test_c08_kappa_scaling_separation():
    """Over condition numbers {4, 16, 64, 256} at fixed epsilon, the fitted
    log-log slope of oracle calls is <= 0.8 for the wrapped extragradient
    and >= 1.2 for plain descent-ascent, averaged over 5 seeds. Under 10
    minutes."""
    t0 = time.perf_counter()
    result = kappa_sweep(seeds=(0, 1, 2, 3, 4))
    elapsed = time.perf_counter() - t0
    cat = result.fits["catalyst-eg"].slope
    gda = result.fits["gda"].slope
    assert cat <= 0.8, cat
    assert gda >= 1.2, gda
    assert elapsed < 600.0, f"took {elapsed:.1f}s"
    print(f"criterion 8: slopes catalyst-eg {cat:.3f} <= 0.8, "
          f"gda {gda:.3f} >= 1.2, {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 9. subsolver linear rates
# ---------------------------------------------------------------------------


def test_c09_subsolvers_converge_linearly_on_regularized_subproblems():
    """Extragradient, optimistic, and the variance-reduced solver on a
    tau-regularized subproblem: first-passage counts against log(1/threshold)
    fit a line with R^2 >= 0.95 across thresholds spanning six decades."""
    spec = _fs_spec(4, 3)
    problem = spec.make()
    rng = np.random.default_rng(909)
    aux = build_aux_problem(problem, _points(rng, problem.d1, spec.eta))
    sub = build_subproblem(aux, default_tau(problem, "svrg"),
                           _points(rng, problem.d2, spec.eta))

    x0 = _points(rng, sub.d1, 0.5 * spec.eta)
    y0 = _points(rng, sub.d2, 0.5 * spec.eta)
    gx, gy = sub.grad(x0, y0)
    m0 = float(np.dot(gx, gx) + np.dot(gy, gy))
    thresholds = [m0 * 10.0 ** (-k) for k in range(2, 9)]

    for method in ("eg", "ogda", "svrg"):
        records = first_passage_iterations(sub, method, thresholds,
                                           x0=x0, y0=y0)
        fit = fit_linear_convergence(records)
        assert fit.r_squared >= 0.95, (method, fit.r_squared)
        print(f"criterion 9: {method} R^2 {fit.r_squared:.4f} "
              f"slope {fit.slope:.1f} checks/decade-ish")


# ---------------------------------------------------------------------------
# 10. bench determinism
# ---------------------------------------------------------------------------


def test_c10_bench_rerun_is_byte_identical(tmp_path):
    """Two bench runs with identical configuration write byte-identical
    sweep CSVs."""
    a = tmp_path / "a"
    b = tmp_path / "b"
    bench_kappa(outdir=str(a), seeds=(0, 1))
    bench_kappa(outdir=str(b), seeds=(0, 1))
    first = (a / "kappa_sweep.csv").read_bytes()
    second = (b / "kappa_sweep.csv").read_bytes()
    assert first == second
    assert len(first) > 100
    print(f"criterion 10: {len(first)} CSV bytes, reruns identical")
