"""Experiment harness: CSV io, named suites, and the verification battery.

Suites
------
* ``kappa_sweep``  — the desk-scale separation experiment: oracle calls to
  reach stationarity vs condition number for plain descent-ascent (jitted
  driver) against the accelerated wrapper (generic path), plus log-log fits.
* ``n_sweep``      — accelerated wrapper with the variance-reduced
  subsolver across component counts (budget-capped, exploratory).
* ``lower_bound``  — oracle-floor audits of the solver roster against the
  three hard-instance families.
* ``verify``       — the property battery: every closed form, floor,
  accounting rule, and io contract in the package checked independently.

CSV rows are written in full-precision scientific notation so re-reading
loses nothing; bench outputs carry no wall-clock numbers, which keeps a
re-run byte-identical (timings are printed, and recorded only by
``run_single``).
"""
import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import backends, kernels, svgplot
from .catalyst import (CatalystConfig, build_aux_problem, build_subproblem,
                       catalyst_run, inner_loop, moreau_stationarity,
                       _alpha_target)
from .core import (RunTrace, SaddlePoint, SpanProtocolError, TraceRow,
                   finite_difference_check, wrap_with_logging)
from .instances import (ChainMatrix, HardInstanceSpec, gamma, gamma_prime,
                        estimate_smoothness, make_bilinear,
                        make_quadratic_saddle)
from .metrics import (averaged_stationarity_bound, fit_linear_convergence,
                      first_passage_iterations, fit_scaling, moreau_sum_bound,
                      primal_grad_norm, proximal_point, verify_lower_bound)
from .solvers import (DivergenceError, RateModel, SolverConfig,
                      BudgetExceededError, extragradient, gda, get_method,
                      ogda, solve_until, svrg_saddle)

CSV_COLUMNS = ("suite", "instance_id", "solver", "seed", "kappa", "n",
               "epsilon", "oracle_calls", "grad_phi_norm", "moreau_norm",
               "wall_ms")
_INT_COLUMNS = {"seed", "n", "oracle_calls"}
_STR_COLUMNS = {"suite", "instance_id", "solver"}


def default_outdir():
    return os.environ.get("SADDLEKIT_OUTDIR", ".")


@dataclass
class ExperimentConfig:
    """Bag of suite parameters assembled by the command line."""
    suite: str = "kappa_sweep"
    seeds: tuple = (0, 1, 2, 3, 4)
    jobs: int = 1
    budget: int = 10 ** 7
    outdir: str = field(default_factory=default_outdir)


# ---------------------------------------------------------------------------
# CSV io
# ---------------------------------------------------------------------------

def _fmt_field(col, value):
    if col in _STR_COLUMNS:
        s = str(value)
        if "," in s or "\n" in s:
            raise ValueError(f"CSV field {col}={s!r} may not contain "
                             "commas or newlines")
        return s
    if col in _INT_COLUMNS:
        return str(int(value))
    return "%.17e" % float(value)


def write_csv(path, traces):
    """Write run traces as rows under the fixed 11-column header.

    One line per trace row, with the run-level metadata repeated; floats in
    full-precision scientific notation (%.17e), so a read/write round trip
    is byte-identical. ``oracle_calls`` is the row's cumulative work: plain
    oracle calls for single-component problems, component-equivalents for
    finite sums. An empty trace contributes nothing beyond the header.
    """
    if isinstance(traces, RunTrace):
        traces = [traces]
    lines = [",".join(CSV_COLUMNS)]
    for tr in traces:
        for row in tr.rows:
            rec = {
                "suite": tr.suite, "instance_id": tr.instance_id,
                "solver": tr.solver, "seed": tr.seed, "kappa": tr.kappa,
                "n": tr.n, "epsilon": tr.epsilon, "oracle_calls": row.calls,
                "grad_phi_norm": row.grad_phi_norm,
                "moreau_norm": row.moreau_norm, "wall_ms": row.wall_ms,
            }
            lines.append(",".join(_fmt_field(c, rec[c]) for c in CSV_COLUMNS))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Read a file written by :func:`write_csv` back into RunTrace objects.

    Rows are grouped into traces while their metadata columns repeat
    verbatim and their call counts keep increasing; per-row fields not in
    the CSV (outer index, auxiliary gradient) come back defaulted.
    """
    with open(path) as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"{path} does not start with the expected header")
    traces = []
    prev_key = None
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"malformed CSV line: {ln!r}")
        rec = dict(zip(CSV_COLUMNS, parts))
        key = tuple(rec[c] for c in ("suite", "instance_id", "solver", "seed",
                                     "kappa", "n", "epsilon"))
        row = TraceRow(calls=int(rec["oracle_calls"]),
                       grad_phi_norm=float(rec["grad_phi_norm"]),
                       moreau_norm=float(rec["moreau_norm"]),
                       wall_ms=float(rec["wall_ms"]))
        if key != prev_key or (traces and traces[-1].rows
                               and row.calls <= traces[-1].rows[-1].calls):
            traces.append(RunTrace(
                suite=rec["suite"], instance_id=rec["instance_id"],
                solver=rec["solver"], seed=int(rec["seed"]),
                kappa=float(rec["kappa"]), n=int(rec["n"]),
                epsilon=float(rec["epsilon"])))
            prev_key = key
        traces[-1].append(row)
    return traces


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------

def _catalyst_rows(result, warmup, examiner):
    """Per-round trace rows from a wrapper run: the examiner norm at each
    round start against the cumulative charged work, then the final point."""
    rows = []
    c = warmup
    for rec in result.trace.rounds:
        gp = rec.grad_phi_norm if rec.grad_phi_norm is not None else math.nan
        rows.append(TraceRow(calls=c, outer_index=rec.index,
                             grad_phi_norm=gp, aux_grad_sq=rec.exit_sq,
                             inner_count=rec.inner_iterations))
        c += rec.oracle_calls
    gp = math.nan
    if examiner is not None:
        gp = float(np.linalg.norm(examiner(result.point.x)))
    rows.append(TraceRow(calls=c, outer_index=len(result.trace.rounds),
                         grad_phi_norm=gp))
    return rows


def run_single(spec, solver="eg", seed=0, budget=10 ** 7, epsilon=None,
               tau=None, rho_factor=0.9, step_x=None, step_y=None,
               trace_every=0, suite="single", with_moreau=False):
    """Run one solver on one instance spec; returns (RunTrace, info dict).

    ``solver`` is a plain method name or ``catalyst-<subsolver>``. The run
    stops when the uncharged examiner sees epsilon-stationarity (default
    epsilon: the spec's). Oracle work is counted through the logging
    wrapper; wall time is measured for the whole solve and recorded on the
    final row only.
    """
    problem = spec.make() if isinstance(spec, HardInstanceSpec) else spec
    eps = float(epsilon if epsilon is not None
                else getattr(spec, "epsilon", 1e-6))
    logged, log = wrap_with_logging(problem)
    examiner = problem.primal_grad
    trace = RunTrace(suite=suite,
                     instance_id=spec.instance_id()
                     if isinstance(spec, HardInstanceSpec)
                     else problem.meta.get("family", "custom"),
                     solver=solver, seed=seed, kappa=problem.kappa,
                     n=problem.n_components, epsilon=eps)
    t0 = time.perf_counter()
    if solver.startswith("catalyst"):
        sub = solver.split("-", 1)[1] if "-" in solver else "eg"
        cfg = CatalystConfig(epsilon=eps, subsolver=sub, tau=tau,
                             rho_factor=rho_factor, total_budget=budget,
                             seed=seed, step=step_x)
        res = catalyst_run(logged, config=cfg)
        rows = _catalyst_rows(res, res.trace.warmup_calls, examiner)
        point, status = res.point, res.status
    else:
        if examiner is not None:
            def pred(pt, grads):
                return float(np.linalg.norm(examiner(pt.x))) <= eps
        else:
            def pred(pt, grads):
                gsq = float(np.dot(grads[0], grads[0])
                            + np.dot(grads[1], grads[1]))
                return gsq <= eps * eps
        cfg = SolverConfig(step_x=step_x, step_y=step_y, max_iters=budget,
                           seed=seed, stop_predicate=pred,
                           trace_every=trace_every)
        res = get_method(solver)(logged, None, None, cfg)
        rows = list(res.trace.rows) if res.trace is not None else []
        point, status = res.point, res.status
    wall = (time.perf_counter() - t0) * 1e3
    n = problem.n_components
    work = log.ifo_equivalent(n) if n > 1 else log.fo_calls
    gp = math.nan
    if examiner is not None:
        gp = float(np.linalg.norm(examiner(point.x)))
    final = TraceRow(calls=work, grad_phi_norm=gp, wall_ms=wall)
    if with_moreau and problem.primal_value is not None:
        final.moreau_norm = moreau_stationarity(problem, point.x)
    for row in rows:
        if row.calls < work:
            trace.maybe_append(row)
    trace.maybe_append(final)
    info = {"status": status, "fo_calls": log.fo_calls,
            "ifo_calls": log.ifo_calls, "work": work, "grad_phi_norm": gp,
            "wall_ms": wall, "point": point}
    return trace, info


# ---------------------------------------------------------------------------
# kappa sweep (the separation experiment)
# ---------------------------------------------------------------------------

SWEEP_KAPPAS = (4, 16, 64, 256)
SWEEP_EPSILON = 0.0122
SWEEP_L = 1.0
SWEEP_DELTA = 1.0


def _sweep_spec(kappa):
    return HardInstanceSpec.derive("deterministic", L=SWEEP_L,
                                   mu=SWEEP_L / kappa, Delta=SWEEP_DELTA,
                                   epsilon=SWEEP_EPSILON)


def _sweep_run(idx, solver, kappa, seed):
    spec = _sweep_spec(kappa)
    if solver == "gda":
        sx = 1.0 / (16.0 * SWEEP_L * (kappa + 1.0) ** 2)
        sy = 1.0 / (2.0 * SWEEP_L)
        status, calls, x, _ = kernels.gda_run_det(
            spec.d, spec.eta, spec.lambda1, spec.lambda2, spec.alpha,
            sx, sy, SWEEP_EPSILON, 10 ** 9)
        if status != 0:
            raise RuntimeError(f"sweep gda at kappa={kappa} ended with "
                               f"status {status} after {calls} calls")
        g = kernels.det_primal_grad_np(x, spec.d, spec.eta, spec.lambda1,
                                       spec.lambda2, spec.alpha)
        gp = float(np.linalg.norm(g))
    else:
        problem = spec.make()
        cfg = CatalystConfig(epsilon=SWEEP_EPSILON, subsolver="eg", seed=seed)
        res = catalyst_run(problem, config=cfg)
        if res.status != "stationary":
            raise RuntimeError(f"sweep catalyst at kappa={kappa} ended "
                               f"with status {res.status}")
        calls = res.trace.total_oracle_calls
        gp = float(np.linalg.norm(problem.primal_grad(res.point.x)))
    trace = RunTrace(suite="kappa_sweep", instance_id=spec.instance_id(),
                     solver=solver, seed=seed, kappa=float(kappa), n=1,
                     epsilon=SWEEP_EPSILON)
    trace.append(TraceRow(calls=int(calls), grad_phi_norm=gp))
    return idx, trace


def _sweep_worker(task):
    return _sweep_run(*task)


@dataclass
class SweepResult:
    traces: list
    #: solver -> fit over per-kappa mean oracle calls
    fits: dict
    #: solver -> {seed -> fit over that seed's counts}
    per_seed_fits: dict
    #: (solver, kappa, seed) -> oracle calls
    counts: dict


def kappa_sweep(seeds=(0, 1, 2, 3, 4), jobs=1,
                solvers=("gda", "catalyst-eg")):
    """Oracle calls to epsilon-stationarity vs condition number.

    Runs each (solver, kappa, seed) cell — plain descent-ascent through the
    backend-dispatched driver, the accelerated wrapper through the generic
    path — and fits log(calls) against log(kappa) per solver. Tasks are
    independent; ``jobs > 1`` fans them over processes and merges in grid
    order, so the output does not depend on scheduling.
    """
    kernels.warm_up()
    tasks = []
    for solver in solvers:
        for kappa in SWEEP_KAPPAS:
            for seed in seeds:
                tasks.append((len(tasks), solver, kappa, seed))
    if jobs > 1:
        with multiprocessing.get_context("spawn").Pool(jobs) as pool:
            results = pool.map(_sweep_worker, tasks)
    else:
        results = [_sweep_run(*t) for t in tasks]
    results.sort(key=lambda pair: pair[0])
    traces = [tr for _, tr in results]

    counts = {}
    for (_, solver, kappa, seed), (_, tr) in zip(tasks, results):
        counts[(solver, kappa, seed)] = tr.rows[-1].calls
    fits, per_seed = {}, {}
    for solver in solvers:
        means = [float(np.mean([counts[(solver, k, s)] for s in seeds]))
                 for k in SWEEP_KAPPAS]
        fits[solver] = fit_scaling(np.array(SWEEP_KAPPAS, float),
                                   np.array(means))
        per_seed[solver] = {
            s: fit_scaling(np.array(SWEEP_KAPPAS, float),
                           np.array([float(counts[(solver, k, s)])
                                     for k in SWEEP_KAPPAS]))
            for s in seeds}
    return SweepResult(traces, fits, per_seed, counts)


def bench_kappa(outdir=None, seeds=(0, 1, 2, 3, 4), jobs=1):
    """Run the sweep and write kappa_sweep.csv / kappa_sweep.svg."""
    outdir = outdir or default_outdir()
    os.makedirs(outdir, exist_ok=True)
    t0 = time.perf_counter()
    result = kappa_sweep(seeds=seeds, jobs=jobs)
    wall = time.perf_counter() - t0
    csv_path = write_csv(os.path.join(outdir, "kappa_sweep.csv"),
                         result.traces)
    series, lines = [], []
    for solver, fit in result.fits.items():
        xs = [float(k) for k in SWEEP_KAPPAS for _ in seeds]
        ys = [float(result.counts[(solver, k, s)])
              for k in SWEEP_KAPPAS for s in seeds]
        series.append((solver, xs, ys))
        lines.append((solver, fit.slope, fit.intercept))
    svg_path = svgplot.loglog_plot(
        os.path.join(outdir, "kappa_sweep.svg"), series, lines,
        title="oracle calls to stationarity vs condition number",
        xlabel="condition number", ylabel="oracle calls")
    return {"csv": csv_path, "svg": svg_path, "fits": result.fits,
            "wall_s": wall, "backend": backends.backend_name()}


# ---------------------------------------------------------------------------
# n sweep (finite-sum wrapper behavior)
# ---------------------------------------------------------------------------

def n_sweep(ns=(2, 4, 8), seed=0, budget=200_000):
    """Accelerated wrapper with the variance-reduced subsolver across
    component counts, on small finite-sum chains. The conservative
    round-target schedule makes full stationarity unreachable at desk
    scale, so each cell is budget-capped and reports its progress profile
    (per-round examiner norms) rather than failing."""
    traces = []
    for n in ns:
        spec = HardInstanceSpec.derive("finite_sum", L=1.0, mu=1.0 / (4.0 * n),
                                       Delta=1.0, epsilon=0.05, n=n,
                                       d_override=2)
        trace, info = run_single(spec, solver="catalyst-svrg", seed=seed,
                                 budget=budget, suite="n_sweep")
        for row in trace.rows:
            row.wall_ms = math.nan  # bench rows stay deterministic
        traces.append(trace)
    return traces


def bench_n(outdir=None, seed=0):
    outdir = outdir or default_outdir()
    os.makedirs(outdir, exist_ok=True)
    traces = n_sweep(seed=seed)
    path = write_csv(os.path.join(outdir, "n_sweep.csv"), traces)
    return {"csv": path}


# ---------------------------------------------------------------------------
# lower-bound suite
# ---------------------------------------------------------------------------

def lower_bound_suite(budget=400_000, fs_seeds=tuple(range(20)),
                      fs_budget=20_000):
    """Oracle-floor audits for the three hard families.

    Deterministic chain at depth 10 against the full first-order roster;
    finite-sum chain (n=4, depth 6) against the component-oracle solvers
    over many seeds; the quadratic finite-sum family against a component
    solver and a full-gradient one. Returns {family: report(s)}.

    The finite-sum runs get their own (smaller) budget: the floor there is
    a couple dozen calls, and the proximal-wrapped component solver never
    certifies stationarity within any desk-scale budget, so extra calls
    past ``fs_budget`` only add wall time without changing any audit.
    """
    out = {}
    det = HardInstanceSpec.derive("deterministic", L=1.0, mu=0.2, Delta=1.0,
                                  epsilon=0.01, d_override=10)
    out["deterministic"] = verify_lower_bound(
        det, ["gda", "alt_gda", "eg", "ogda", "catalyst-eg"], budget=budget)

    fs = HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.1, Delta=1.0,
                                 epsilon=0.02, n=4, d_override=6)
    out["finite_sum"] = [
        verify_lower_bound(fs, ["svrg", "catalyst-svrg"], budget=fs_budget,
                           seed=s)
        for s in fs_seeds]

    case1 = HardInstanceSpec.derive("case1", L=1.0, mu=0.5, Delta=1.0,
                                    epsilon=1.0, n=8)
    out["case1"] = verify_lower_bound(case1, ["svrg", "gda"], budget=budget)
    return out


# ---------------------------------------------------------------------------
# verification battery
# ---------------------------------------------------------------------------
# Each property is independent of the code path it checks: closed forms are
# compared against quadrature/finite differences/dense algebra, accounting
# against hand-counted call patterns, io against byte-level round trips.

_DET_SMALL = dict(L=1.0, mu=0.25, Delta=1.0, epsilon=0.05)


def _rand(shape, seed, scale=1.0):
    return np.random.default_rng(seed).standard_normal(shape) * scale


def _p_gamma_frozen():
    assert abs(gamma(0.0) - 7.34105122590293) < 1e-12
    assert gamma(1.0) == 0.0


def _p_gamma_quadrature():
    from scipy.integrate import quad
    val, err = quad(lambda t: gamma_prime(t), 0.0, 1.0)
    assert abs(gamma(0.0) + val) < 1e-9, (gamma(0.0), -val, err)


def _p_gamma_prime_exact():
    assert gamma_prime(0.0) == 0.0
    assert gamma_prime(1.0) == 0.0
    assert abs(gamma_prime(2.0) - 96.0) < 1e-12


def _p_gamma_prime_fd():
    h = 1e-6
    for t in np.linspace(-2.0, 3.0, 25):
        fd = (gamma(t + h) - gamma(t - h)) / (2.0 * h)
        assert abs(fd - gamma_prime(t)) < 5e-6, (t, fd, gamma_prime(t))


def _p_chain_worked_example():
    B = ChainMatrix(1, 1.0 / 16.0)
    dense = np.column_stack([B.apply(e) for e in np.eye(2)])
    assert np.allclose(dense, [[0, 1], [1, -1], [0.5, 0]], atol=0)


def _p_chain_dense_match():
    for d, seed in ((1, 0), (3, 1), (7, 2)):
        B = ChainMatrix(d, 0.37)
        dense = np.column_stack([B.apply(e) for e in np.eye(d + 1)])
        u = _rand(d + 1, seed)
        v = _rand(d + 2, seed + 10)
        assert np.max(np.abs(B.apply(u) - dense @ u)) < 1e-14
        assert np.max(np.abs(B.apply_t(v) - dense.T @ v)) < 1e-14
        assert abs(np.dot(B.apply(u), v) - np.dot(u, B.apply_t(v))) < 1e-12


def _p_chain_norm_bound():
    B = ChainMatrix(12, 1.0)
    dense = np.column_stack([B.apply(e) for e in np.eye(13)])
    assert np.linalg.norm(dense, 2) <= 2.0 + 1e-12


def _p_det_grad_fd():
    spec = HardInstanceSpec.derive("deterministic", **_DET_SMALL,
                                   d_override=4)
    problem = spec.make()
    for seed in range(6):
        x = _rand(problem.d1, seed, 0.7)
        y = _rand(problem.d2, seed + 50, 0.7)
        err = finite_difference_check(problem, SaddlePoint(x, y))
        assert err < 1e-5, err


def _p_det_primal_identity():
    from .instances import deterministic_ystar
    spec = HardInstanceSpec.derive("deterministic", **_DET_SMALL,
                                   d_override=5)
    problem = spec.make()
    for seed in range(30):
        x = _rand(problem.d1, seed, 1.3)
        phi = problem.primal_value(x)
        val = problem.value(x, deterministic_ystar(spec, x))
        assert abs(phi - val) <= 1e-10 * (1.0 + abs(phi)), (phi, val)


def _p_det_frozen_primal():
    v = kernels.det_primal_value_np(np.zeros(2), 1, 1.0, 1.0, 1.0, 0.01)
    assert abs(v - 0.061705256129514656) < 1e-15, v


def _p_det_grad_floor():
    d, l1, l2, alpha = 6, 0.5, 0.125, 0.0025
    floor = (l1 ** 2 / (8.0 * l2)) * alpha ** 0.75
    rng = np.random.default_rng(3)
    for _ in range(300):
        x = rng.standard_normal(d + 1) * rng.choice([0.1, 1.0, 10.0])
        x[d - 1] = 0.0
        x[d] = 0.0
        g = kernels.det_primal_grad_np(x, d, 1.0, l1, l2, alpha)
        assert float(np.linalg.norm(g)) >= floor


def _p_scaled_floor_is_epsilon():
    for eps in (0.05, 0.0122, 0.003):
        spec = HardInstanceSpec.derive("deterministic", L=2.0, mu=0.125,
                                       Delta=1.0, epsilon=eps)
        floor = spec.make().meta["floor_grad_norm"]
        assert abs(floor - eps) <= 1e-12 * eps, (floor, eps)


def _p_derive_example():
    spec = HardInstanceSpec.derive("deterministic", L=10.0, mu=1.0,
                                   Delta=1.0, epsilon=0.05)
    assert spec.lambda1 == 5.0 and spec.lambda2 == 0.5
    assert abs(spec.alpha - 1e-3) < 1e-18


def _p_spec_roundtrip():
    spec = HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.05, Delta=2.0,
                                   epsilon=0.03, n=4)
    back = HardInstanceSpec.from_text(spec.to_text())
    assert back == spec
    try:
        HardInstanceSpec.from_text("mode = deterministic\nbogus = 1\n")
    except ValueError as e:
        assert "bogus" in str(e) and "2" in str(e)
    else:
        raise AssertionError("unknown key accepted")


def _zero_chain_problem(d=8):
    spec = HardInstanceSpec.derive("deterministic", **_DET_SMALL,
                                   d_override=d)
    return spec, spec.make()


def _x_span(d1, k, seed):
    x = np.zeros(d1)
    x[:k] = _rand(k, seed) if k else 0.0
    return x


def _y_span(d2, d, k, seed):
    y = np.zeros(d2)
    if k:
        y[d - k + 1:d + 2] = _rand(k + 1, seed)
    return y


def _p_zero_chain_origin():
    _, problem = _zero_chain_problem()
    gx, gy = problem.grad(np.zeros(problem.d1), np.zeros(problem.d2))
    assert set(np.nonzero(gx)[0]) == {0}
    assert not np.any(gy != 0.0)


def _p_zero_chain_x_extension():
    spec, problem = _zero_chain_problem()
    d = spec.d
    for k in range(1, d):
        for seed in range(5):
            x = _x_span(problem.d1, k, 11 * k + seed)
            y = _y_span(problem.d2, d, k, 13 * k + seed)
            gx, gy = problem.grad(x, y)
            assert set(np.nonzero(gx)[0]) <= set(range(k + 1)), k
            assert set(np.nonzero(gy)[0]) <= set(range(d - k + 1, d + 2)), k


def _p_zero_chain_y_extension():
    spec, problem = _zero_chain_problem()
    d = spec.d
    for k in range(1, d - 1):
        for seed in range(5):
            x = _x_span(problem.d1, k + 1, 17 * k + seed)
            y = _y_span(problem.d2, d, k, 19 * k + seed)
            gx, gy = problem.grad(x, y)
            assert set(np.nonzero(gx)[0]) <= set(range(k + 1)), k
            assert set(np.nonzero(gy)[0]) <= set(range(d - k, d + 2)), k


def _p_fs_block_average():
    spec = HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.05, Delta=1.0,
                                   epsilon=0.05, n=3, d_override=4)
    problem = spec.make()
    x = _rand(problem.d1, 5, 0.8)
    y = _rand(problem.d2, 6, 0.8)
    d = spec.d
    vals = [kernels.det_value_np(x[b * (d + 1):(b + 1) * (d + 1)],
                                 y[b * (d + 2):(b + 1) * (d + 2)],
                                 d, spec.eta, spec.lambda1, spec.lambda2,
                                 spec.alpha)
            for b in range(3)]
    assert abs(problem.value(x, y) - float(np.mean(vals))) < 1e-12


def _p_fs_component_mean():
    spec = HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.05, Delta=1.0,
                                   epsilon=0.05, n=4, d_override=3)
    problem = spec.make()
    x = _rand(problem.d1, 7, 1.1)
    y = _rand(problem.d2, 8, 1.1)
    gx, gy = problem.grad(x, y)
    sx, sy = np.zeros_like(gx), np.zeros_like(gy)
    for i in range(4):
        cgx, cgy = problem.component_grad(i, x, y)
        sx += cgx
        sy += cgy
    assert np.max(np.abs(sx / 4.0 - gx)) < 1e-12
    assert np.max(np.abs(sy / 4.0 - gy)) < 1e-12


def _p_fs_grad_fd():
    spec = HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.05, Delta=1.0,
                                   epsilon=0.05, n=2, d_override=3)
    problem = spec.make()
    for seed in range(4):
        pt = SaddlePoint(_rand(problem.d1, seed, 0.6),
                         _rand(problem.d2, seed + 30, 0.6))
        assert finite_difference_check(problem, pt) < 1e-5


def _p_case1_closed_forms():
    spec = HardInstanceSpec.derive("case1", L=1.0, mu=0.5, Delta=1.0,
                                   epsilon=0.5, n=4)
    problem = spec.make()
    L, mu = problem.L, problem.mu
    for seed in range(4):
        x = _rand(problem.d1, seed, 0.9)
        pt = SaddlePoint(x, _rand(problem.d2, seed + 40, 0.9))
        assert finite_difference_check(problem, pt) < 1e-6
        ystar = (L / mu) * x
        phi = problem.primal_value(x)
        assert abs(phi - problem.value(x, ystar)) <= 1e-10 * (1 + abs(phi))
        fd_tol = 1e-7
        g = problem.primal_grad(x)
        h = 1e-6
        for j in range(problem.d1):
            e = np.zeros(problem.d1)
            e[j] = h
            fd = (problem.primal_value(x + e)
                  - problem.primal_value(x - e)) / (2 * h)
            assert abs(fd - g[j]) < fd_tol * (1 + abs(g[j]))


def _p_case1_gap_exact():
    spec = HardInstanceSpec.derive("case1", L=2.0, mu=0.5, Delta=3.0,
                                   epsilon=0.5, n=6)
    problem = spec.make()
    L, mu, dt = problem.L, problem.mu, problem.d1
    xstar = np.full(dt, -(spec.theta / spec.n) * mu / L ** 2)
    gap = problem.primal_value(np.zeros(dt)) - problem.primal_value(xstar)
    assert abs(gap - 3.0) <= 1e-12 * 3.0, gap
    assert float(np.linalg.norm(problem.primal_grad(xstar))) < 1e-12


def _p_smoothness_estimate():
    spec = HardInstanceSpec.derive("deterministic", **_DET_SMALL,
                                   d_override=5)
    problem = spec.make()
    lip, avg = estimate_smoothness(problem, sample_count=400)
    assert lip <= problem.L * (1.0 + 1e-6), (lip, problem.L)
    assert avg <= problem.meta.get("smoothness_as", problem.L) * (1.0 + 1e-6)


def _p_backend_agreement():
    x = _rand(6, 1)
    y = _rand(7, 2)
    args = (5, 0.9, 0.5, 0.125, 0.0025)
    gx_np, gy_np = kernels.det_grad_np(x, y, *args)
    if backends.HAS_NUMBA:
        gx_j, gy_j = kernels._det_grad_jit(np.ascontiguousarray(x),
                                           np.ascontiguousarray(y), *args)
        assert np.max(np.abs(gx_j - gx_np)) < 1e-13
        assert np.max(np.abs(gy_j - gy_np)) < 1e-13
        v_np = kernels.det_value_np(x, y, *args)
        v_j = kernels._det_value_jit(np.ascontiguousarray(x),
                                     np.ascontiguousarray(y), *args)
        assert abs(v_j - v_np) < 1e-12 * (1 + abs(v_np))
    gx2, gy2 = kernels.det_grad_np(x, y, *args)
    assert np.array_equal(gx2, gx_np) and np.array_equal(gy2, gy_np)


def _p_gda_driver_twins():
    spec = _sweep_spec(4)
    sx, sy = 1.0 / (16.0 * 25.0), 0.5
    a = kernels._gda_run_numpy(spec.d, spec.eta, spec.lambda1, spec.lambda2,
                               spec.alpha, sx, sy, SWEEP_EPSILON, 10 ** 7)
    if backends.HAS_NUMBA:
        kernels.warm_up()
        b = kernels._gda_run_jit(spec.d, spec.eta, spec.lambda1, spec.lambda2,
                                 spec.alpha, sx, sy, SWEEP_EPSILON, 10 ** 7)
        assert a[0] == b[0] and a[1] == b[1], (a[:2], b[:2])
        assert np.max(np.abs(a[2] - b[2])) < 1e-12
    assert a[0] == 0


def _p_oracle_counting():
    spec = HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.05, Delta=1.0,
                                   epsilon=0.05, n=3, d_override=2)
    logged, log = wrap_with_logging(spec.make())
    x, y = np.zeros(logged.d1), np.zeros(logged.d2)
    logged.grad(x, y)
    logged.component_grad(0, x, y)
    logged.component_grad(2, x, y)
    logged.grad(x, y)
    assert log.fo_calls == 2 and log.ifo_calls == 2
    assert log.ifo_equivalent(3) == 8
    assert log.query_count == 4


def _p_activation_record():
    spec = HardInstanceSpec.derive("deterministic", **_DET_SMALL,
                                   d_override=3)
    logged, log = wrap_with_logging(spec.make(), watch_x_coord=3)
    z = np.zeros(logged.d1)
    logged.grad(z, np.zeros(logged.d2))
    x = np.zeros(logged.d1)
    x[2] = 0.5  # coordinate 3, 1-based
    logged.grad(x, np.zeros(logged.d2))
    assert log.first_call_with_xd_nonzero == 2
    assert (3, 2) in log.x_activation


def _p_span_protocol():
    spec = HardInstanceSpec.derive("deterministic", **_DET_SMALL,
                                   d_override=4)
    logged, log = wrap_with_logging(spec.make(), track_spans=True)
    logged.grad(np.zeros(logged.d1), np.zeros(logged.d2))
    cheat = np.zeros(logged.d1)
    cheat[3] = 1.0  # never appeared in any returned gradient
    try:
        logged.grad(cheat, np.zeros(logged.d2))
    except SpanProtocolError:
        pass
    else:
        raise AssertionError("off-span query accepted")


def _p_gda_respects_floor():
    spec = HardInstanceSpec.derive("deterministic", L=1.0, mu=0.5, Delta=1.0,
                                   epsilon=0.02, d_override=3)
    report = verify_lower_bound(spec, ["gda"], budget=300_000)
    audit = report.audits["gda"]
    assert report.epsilon_floor_applies
    assert audit.work_at_first_stationary is not None, audit.status
    assert audit.work_at_first_stationary >= 2 * 3 - 1
    assert audit.first_watch_activation >= 2 * 3
    assert audit.satisfied


def _p_fd_harness_self_test():
    problem = make_quadratic_saddle(dim=3, a=0.7, b=1.3, couplings=(0.9,))
    pt = SaddlePoint(_rand(3, 1), _rand(3, 2))
    assert finite_difference_check(problem, pt) < 1e-8


def _p_eg_spectral_radius():
    problem = make_bilinear(coupling=1.0, mu_reg=1e-12, dim=1)
    s = 0.25
    a = s * 1.0
    rho = math.sqrt((1 - a * a) ** 2 + a * a)
    norms = []

    def pred(pt, grads):
        norms.append(math.sqrt(float(np.dot(pt.x, pt.x)
                                     + np.dot(pt.y, pt.y))))
        return False

    cfg = SolverConfig(step_x=s, step_y=s, max_iters=40, stop_predicate=pred)
    extragradient(problem, np.ones(1), np.ones(1), cfg)
    for k in range(5, len(norms) - 1):
        assert abs(norms[k + 1] / norms[k] - rho) < 1e-6


def _p_gda_bilinear_control():
    problem = make_bilinear(coupling=1.0, mu_reg=1e-12, dim=2)
    norms = []

    def pred(pt, grads):
        norms.append(float(np.dot(pt.x, pt.x) + np.dot(pt.y, pt.y)))
        return False

    cfg = SolverConfig(step_x=0.2, step_y=0.2, max_iters=50,
                       stop_predicate=pred)
    gda(problem, np.ones(2), np.ones(2), cfg)
    assert all(b >= a * (1 - 1e-12) for a, b in zip(norms, norms[1:]))
    assert norms[-1] > norms[0]


def _p_eg_ogda_monotone():
    problem = make_quadratic_saddle(dim=2, a=1.0, b=1.0, couplings=(1.0,))
    for method in (extragradient, ogda):
        dists = []

        def pred(pt, grads):
            dists.append(float(np.dot(pt.x, pt.x) + np.dot(pt.y, pt.y)))
            return False

        cfg = SolverConfig(max_iters=60, stop_predicate=pred)
        method(problem, np.ones(2), np.ones(2), cfg)
        tail = dists[5:]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(tail, tail[1:])), \
            method.__name__


def _p_gap_sandwich():
    a, b, c = 0.8, 1.4, 0.9
    problem = make_quadratic_saddle(dim=2, a=a, b=b, couplings=(c,))
    rng = np.random.default_rng(9)
    for _ in range(30):
        x = rng.standard_normal(2)
        y = rng.standard_normal(2)
        gap = (a / 2 + c * c / (2 * b)) * float(np.dot(x, x)) \
            + (c * c / (2 * a) + b / 2) * float(np.dot(y, y))
        gx, gy = problem.grad(x, y)
        bound = float(np.dot(gx, gx)) / (2 * a) + float(np.dot(gy, gy)) / (2 * b)
        assert gap <= bound * (1 + 1e-9), (gap, bound)


def _p_solver_determinism():
    problem = make_quadratic_saddle(dim=3, a=0.5, b=1.0,
                                    couplings=(1.0, 0.5, 0.25, 0.75))
    cfg = SolverConfig(max_iters=100)
    r1 = extragradient(problem, np.ones(3), np.ones(3), cfg)
    r2 = extragradient(problem, np.ones(3), np.ones(3), cfg)
    assert np.array_equal(r1.point.x, r2.point.x)
    assert np.array_equal(r1.point.y, r2.point.y)
    s1 = svrg_saddle(problem, np.ones(3), np.ones(3),
                     SolverConfig(max_iters=64, seed=7))
    s2 = svrg_saddle(problem, np.ones(3), np.ones(3),
                     SolverConfig(max_iters=64, seed=7))
    s3 = svrg_saddle(problem, np.ones(3), np.ones(3),
                     SolverConfig(max_iters=64, seed=8))
    assert np.array_equal(s1.point.x, s2.point.x)
    assert not np.array_equal(s1.point.x, s3.point.x)


def _p_divergence_error():
    problem = make_quadratic_saddle(dim=1, a=1.0, b=1.0, couplings=(1.0,))
    try:
        gda(problem, np.ones(1) * 1e6, np.ones(1) * 1e6,
            SolverConfig(step_x=5.0, step_y=5.0, max_iters=10_000))
    except DivergenceError as e:
        assert e.iteration > 0 and str(e.iteration) in str(e)
    else:
        raise AssertionError("oversized steps did not diverge")


def _p_svrg_needs_components():
    problem = make_quadratic_saddle(dim=1, a=1.0, b=1.0, couplings=(1.0,))
    try:
        svrg_saddle(problem, None, None, SolverConfig(max_iters=10))
    except ValueError as e:
        assert "extragradient" in str(e)
    else:
        raise AssertionError("single-component svrg accepted")


def _p_svrg_geometric():
    problem = make_quadratic_saddle(
        dim=2, a=1.0, b=1.0,
        couplings=(0.6, 0.8, 1.0, 1.2, 0.7, 0.9, 1.1, 1.3))
    thresholds = [1e-1, 1e-3, 1e-5, 1e-7]
    for seed in range(20):
        rec = first_passage_iterations(problem, "svrg", thresholds,
                                       np.ones(2), np.ones(2),
                                       SolverConfig(seed=seed),
                                       budget=200_000)
        counts = [c for _, c in rec]
        assert counts == sorted(counts)
        fit = fit_linear_convergence(rec)
        assert fit.r_squared > 0.9, (seed, fit)


def _p_solve_until_contract():
    problem = make_quadratic_saddle(dim=2, a=1.0, b=1.0, couplings=(1.0,))
    res = solve_until(problem, np.ones(2), np.ones(2), target_sq=1e-12,
                      method="eg")
    assert res.measure_sq is not None and res.measure_sq <= 1e-12
    res0 = solve_until(problem, np.zeros(2), np.zeros(2), target_sq=1e-12,
                       method="eg")
    assert res0.iterations == 0 and res0.oracle_calls == 1
    try:
        solve_until(problem, np.ones(2), np.ones(2), target_sq=0.0,
                    method="eg", budget=25)
    except BudgetExceededError as e:
        assert 0.0 < e.best_sq < math.inf and e.point is not None
    else:
        raise AssertionError("zero target within 25 iterations?")


def _p_rate_model():
    m = RateModel.for_eg(1.0, 0.25, 0.75)
    assert abs(m.lambda_M - 0.75) < 1e-15
    assert m.effective == 2.0
    big = RateModel.for_svrg(1.0, 0.25, 0.75, n=8)
    assert abs(big.lambda_M - (8 + (1 + math.sqrt(2) * 2) ** 2)) < 1e-12
    assert big.iterations(0.5) >= 1


def _p_momentum_example():
    from .catalyst import _schedule
    cfg = CatalystConfig(epsilon=1.0, tau=99.0)
    _, q, _, mom, _ = _schedule(1.0, 1.0, 1, cfg)
    assert abs(q - 0.01) < 1e-15
    assert abs(mom - 0.09 / 0.11) < 1e-15


def _p_alpha_schedule():
    assert abs(_alpha_target(1, 10.0, 1.0) - 1.0 / 5.04e7) < 1e-22
    assert _alpha_target(0, 10.0, 1.0) == 1.0 / (576.0 * 10.0 ** 7)
    cfg = CatalystConfig(epsilon=1.0, alpha_0=0.5, alpha_t=0.25)
    assert _alpha_target(0, 10.0, 1.0, cfg) == 0.5
    assert _alpha_target(3, 10.0, 1.0, cfg) == 0.25


def _p_subproblem_identities():
    problem = make_quadratic_saddle(dim=2, a=0.5, b=1.0, couplings=(0.8,))
    c = np.array([0.3, -0.2])
    aux = build_aux_problem(problem, c)
    x, y = _rand(2, 3), _rand(2, 4)
    gx, gy = problem.grad(x, y)
    ax, ay = aux.grad(x, y)
    assert np.max(np.abs(ax - (gx + 2 * problem.L * (x - c)))) < 1e-14
    assert np.array_equal(ay, gy)
    z = _rand(2, 5)
    sub0 = build_subproblem(aux, 0.0, z)
    sx, sy = sub0.grad(x, y)
    assert np.array_equal(sx, ax) and np.array_equal(sy, ay)
    sub = build_subproblem(aux, 1.7, y)  # z centered at the query
    sx, sy = sub.grad(x, y)
    assert np.array_equal(sy, ay)  # dual correction vanishes at y = z
    assert sub.L == problem.L + max(2 * problem.L, 1.7)
    assert sub.mu == problem.mu + 1.7


def _p_epsk_geometric():
    problem = make_quadratic_saddle(dim=2, a=1.0, b=1.0, couplings=(1.0,))
    cfg = CatalystConfig(epsilon=1e-3, subsolver="eg", max_rounds=300)
    res = catalyst_run(problem, x0=np.ones(2), config=cfg)
    ratio = 1.0 - res.trace.rho
    checked = 0
    for rec in res.trace.rounds:
        eps = [e for e, _ in rec.inner_history]
        for a, b in zip(eps, eps[1:]):
            assert abs(b / a - ratio) < 1e-12
            checked += 1
        if not math.isnan(rec.exit_sq) and rec.n0 > 0:
            assert rec.exit_sq <= rec.alpha_target * rec.n0 * (1 + 1e-12)
    assert res.status == "stationary"


def _p_catalyst_toy():
    def value(x, y):
        return -0.25 * float(x[0] ** 2) + 2.0 * float(x[0] * y[0]) \
            - float(y[0] ** 2)

    def grad(x, y):
        return (np.array([-0.5 * x[0] + 2.0 * y[0]]),
                np.array([2.0 * x[0] - 2.0 * y[0]]))

    def primal_value(x):
        return 0.75 * float(x[0] ** 2)

    def primal_grad(x):
        return 1.5 * x

    from .core import SaddleProblem
    toy = SaddleProblem(d1=1, d2=1, L=2.0, mu=2.0, value=value, grad=grad,
                        primal_value=primal_value, primal_grad=primal_grad)
    cfg = CatalystConfig(epsilon=1e-4, subsolver="eg", max_rounds=200)
    res = catalyst_run(toy, x0=np.array([1.0]), config=cfg)
    assert res.trace.tau == 0.0 and res.trace.q == 1.0
    assert res.trace.momentum == 0.0
    assert res.status == "stationary"
    assert len(res.trace.rounds) <= 200
    assert float(np.linalg.norm(primal_grad(res.point.x))) <= 1e-4


def _p_inner_loop_trivial_start():
    problem = make_quadratic_saddle(dim=2, a=1.0, b=1.0, couplings=(1.0,))
    aux = build_aux_problem(problem, np.zeros(2))
    cfg = CatalystConfig(epsilon=1e-3)
    pt, rec = inner_loop(aux, SaddlePoint(np.zeros(2), np.zeros(2)), cfg)
    assert rec.n0 == 0.0 and rec.inner_iterations == 0
    assert rec.oracle_calls == 1 and rec.exit_sq == 0.0
    assert np.array_equal(pt.x, np.zeros(2))


def _p_catalyst_best_seed_invariant():
    problem = make_quadratic_saddle(dim=2, a=1.0, b=1.0, couplings=(1.0,))
    runs = [catalyst_run(problem, x0=np.ones(2),
                         config=CatalystConfig(epsilon=1e-4, seed=s))
            for s in (0, 1)]
    assert np.array_equal(runs[0].point.x, runs[1].point.x)
    for r in runs:
        assert 0 <= r.sampled_index < len(r.trace.round_xs)
        assert np.array_equal(r.point_sampled.x,
                              r.trace.round_xs[r.sampled_index])


def _p_moreau_quadratic_oracle():
    from dataclasses import replace as dc_replace
    a = 0.6
    problem = make_quadratic_saddle(dim=1, a=a, b=1.0, couplings=(1e-12,))
    gamma_eff = a  # coupling ~ 0: Phi(x) = (a/2) x^2
    L = problem.L
    x = np.array([2.0])
    expected_prox = x * 2 * L / (gamma_eff + 2 * L)
    expected = 2 * L * abs(x[0]) * gamma_eff / (gamma_eff + 2 * L)
    prox = proximal_point(problem, x)
    assert np.max(np.abs(prox - expected_prox)) < 1e-8
    assert abs(moreau_stationarity(problem, x) - expected) < 1e-8
    stripped = dc_replace(problem, primal_value=None, primal_grad=None)
    assert abs(moreau_stationarity(stripped, x, accuracy=1e-8)
               - expected) < 1e-6


def _p_fit_scaling_exact():
    ks = np.array([4.0, 16.0, 64.0, 256.0, 1024.0])
    ys = 3.7 * ks ** 0.5
    fit = fit_scaling(ks, ys)
    assert abs(fit.slope - 0.5) < 1e-9
    assert fit.r_squared > 1 - 1e-12
    scaled = fit_scaling(ks, 100.0 * ys)
    assert abs(scaled.slope - fit.slope) < 1e-9
    try:
        fit_scaling(ks[:3], ys[:3])
    except ValueError:
        pass
    else:
        raise AssertionError("3-point fit accepted")


def _p_fit_linear_convergence_exact():
    records = [(10.0 ** -k, 37 * k + 5) for k in range(1, 8)]
    fit = fit_linear_convergence(records)
    assert fit.r_squared > 1 - 1e-12
    assert abs(fit.slope - 37.0 / math.log(10.0)) < 1e-9


def _p_primal_norm_two_routes():
    spec = HardInstanceSpec.derive("deterministic", **_DET_SMALL,
                                   d_override=3)
    problem = spec.make()
    from dataclasses import replace as dc_replace
    blind = dc_replace(problem, primal_grad=None, primal_value=None)
    for seed in range(10):
        x = _rand(problem.d1, seed, 0.8)
        exact = primal_grad_norm(problem, x)
        est = primal_grad_norm(blind, x, inner_tolerance=1e-9)
        assert abs(exact - est) < 1e-6 * (1 + exact), (exact, est)


def _p_bound_arithmetic():
    assert averaged_stationarity_bound(1.0, 1.0, 0.0, 5) == 268.0 / 25.0
    assert moreau_sum_bound(1.0, 1.0, 0.0) == 87.0 / 5.0
    assert moreau_sum_bound(1.0, 0.0, 1.0) == 7.0 / 5.0


def _p_csv_roundtrip(tmpdir=None):
    import tempfile
    tr = RunTrace(suite="s", instance_id="i", solver="eg", seed=3,
                  kappa=16.0, n=1, epsilon=0.1)
    tr.append(TraceRow(calls=1, grad_phi_norm=0.3))
    tr.append(TraceRow(calls=5, grad_phi_norm=0.1, moreau_norm=0.2))
    tr.append(TraceRow(calls=9, grad_phi_norm=1e-17, wall_ms=3.25))
    empty = RunTrace(suite="s", instance_id="j", solver="gda", seed=0,
                     kappa=4.0, n=1, epsilon=0.1)
    with tempfile.TemporaryDirectory() as td:
        p1 = os.path.join(td, "a.csv")
        write_csv(p1, [tr, empty])
        with open(p1) as fh:
            assert len(fh.read().rstrip("\n").split("\n")) == 4
        back = read_csv(p1)
        assert len(back) == 1 and len(back[0].rows) == 3
        p2 = os.path.join(td, "b.csv")
        write_csv(p2, back)
        with open(p1, "rb") as f1, open(p2, "rb") as f2:
            assert f1.read() == f2.read()
        p3 = os.path.join(td, "empty.csv")
        write_csv(p3, [empty])
        with open(p3) as fh:
            content = fh.read()
        assert content == ",".join(CSV_COLUMNS) + "\n"


def _p_svg_emitter():
    import tempfile
    with tempfile.TemporaryDirectory() as td:
        path = os.path.join(td, "plot.svg")
        svgplot.loglog_plot(path, [("a", [4, 16, 64], [10, 40, 160])],
                            [("fit", 1.0, math.log(2.5))], title="t")
        with open(path) as fh:
            body = fh.read()
        assert body.startswith("<svg") and "slope 1" in body


PROPERTIES = [
    ("gamma frozen values", _p_gamma_frozen),
    ("gamma against quadrature", _p_gamma_quadrature),
    ("gamma derivative exact zeros and slope", _p_gamma_prime_exact),
    ("gamma derivative against finite differences", _p_gamma_prime_fd),
    ("chain matrix worked example d=1", _p_chain_worked_example),
    ("chain operator equals dense matrix", _p_chain_dense_match),
    ("chain operator norm within bound", _p_chain_norm_bound),
    ("chain gradient against finite differences", _p_det_grad_fd),
    ("chain primal equals value at best response", _p_det_primal_identity),
    ("chain primal frozen value", _p_det_frozen_primal),
    ("chain gradient-norm floor on the dormant subspace", _p_det_grad_floor),
    ("scaled floor calibrated to epsilon", _p_scaled_floor_is_epsilon),
    ("constant derivation worked example", _p_derive_example),
    ("spec file round trip and unknown-key error", _p_spec_roundtrip),
    ("zero chain: origin activates only the first coordinate",
     _p_zero_chain_origin),
    ("zero chain: x extends by one coordinate", _p_zero_chain_x_extension),
    ("zero chain: y extends by one coordinate", _p_zero_chain_y_extension),
    ("finite sum is the block average", _p_fs_block_average),
    ("component gradients average to the full gradient",
     _p_fs_component_mean),
    ("finite-sum gradient against finite differences", _p_fs_grad_fd),
    ("quadratic family closed forms", _p_case1_closed_forms),
    ("quadratic family gap equals Delta exactly", _p_case1_gap_exact),
    ("sampled smoothness within advertised constants",
     _p_smoothness_estimate),
    ("backends agree on kernel outputs", _p_backend_agreement),
    ("descent-ascent driver twins agree", _p_gda_driver_twins),
    ("oracle log counts full and component calls", _p_oracle_counting),
    ("activation records the first nonzero query", _p_activation_record),
    ("off-span queries raise the protocol error", _p_span_protocol),
    ("descent-ascent respects the oracle floor", _p_gda_respects_floor),
    ("finite-difference harness self test", _p_fd_harness_self_test),
    ("extragradient contraction matches the spectral radius",
     _p_eg_spectral_radius),
    ("plain descent-ascent fails on the bilinear control",
     _p_gda_bilinear_control),
    ("extragradient and optimistic steps are monotone after burn-in",
     _p_eg_ogda_monotone),
    ("duality gap sandwiched by gradient norms", _p_gap_sandwich),
    ("solver determinism and seed sensitivity", _p_solver_determinism),
    ("divergence error names the iteration", _p_divergence_error),
    ("variance reduction refuses single-component problems",
     _p_svrg_needs_components),
    ("variance reduction converges geometrically across seeds",
     _p_svrg_geometric),
    ("solve_until postcondition, trivial exit, and budget error",
     _p_solve_until_contract),
    ("subsolver rate model values and clamp", _p_rate_model),
    ("momentum worked example", _p_momentum_example),
    ("round-target schedule values and overrides", _p_alpha_schedule),
    ("auxiliary and regularized subproblem identities",
     _p_subproblem_identities),
    ("inner tolerances decay geometrically; exits are sound",
     _p_epsk_geometric),
    ("wrapper solves the tiny strongly-concave example", _p_catalyst_toy),
    ("inner loop exits immediately at a stationary start",
     _p_inner_loop_trivial_start),
    ("best iterate is seed-invariant; sampled one is recorded",
     _p_catalyst_best_seed_invariant),
    ("envelope stationarity against the quadratic prox",
     _p_moreau_quadratic_oracle),
    ("power-law fit recovers an exact exponent", _p_fit_scaling_exact),
    ("linear-convergence fit on exact geometric data",
     _p_fit_linear_convergence_exact),
    ("primal norm: closed form agrees with the ascent route",
     _p_primal_norm_two_routes),
    ("bound arithmetic at pinned inputs", _p_bound_arithmetic),
    ("CSV round trip is byte-identical", _p_csv_roundtrip),
    ("SVG emitter writes a well-formed plot", _p_svg_emitter),
]


def verify_all(names=None, out=print):
    """Run the property battery; returns (results, all_ok).

    results is a list of (name, ok, detail). Properties are independent —
    one failure does not stop the rest — and each line is printed as it
    completes so partial progress is visible.
    """
    selected = PROPERTIES if names is None else \
        [(n, f) for n, f in PROPERTIES if any(q in n for q in names)]
    results = []
    for i, (name, fn) in enumerate(selected, 1):
        try:
            fn()
            ok, detail = True, ""
        except AssertionError as e:
            ok, detail = False, f"assertion: {e}"
        except Exception as e:  # a property crashing is a failure too
            ok, detail = False, f"{type(e).__name__}: {e}"
        results.append((name, ok, detail))
        if out is not None:
            mark = "ok  " if ok else "FAIL"
            suffix = f" ({detail})" if detail else ""
            out(f"{mark} {i:2d}/{len(selected)} {name}{suffix}")
    return results, all(ok for _, ok, _ in results)
