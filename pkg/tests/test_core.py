"""Oracle wrapper: counting, activation records, span discipline, traces."""

import numpy as np
import pytest

from saddlekit.core import (
    RunTrace,
    SaddlePoint,
    SpanProtocolError,
    TraceRow,
    finite_difference_check,
    wrap_with_logging,
)
from saddlekit.instances import (
    HardInstanceSpec,
    make_bilinear,
    make_quadratic_saddle,
)


def _fs_problem():
    spec = HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.1, Delta=1.0,
                                   epsilon=0.05, n=4, d_override=3)
    return spec.make()


def test_full_and_component_calls_counted_separately():
    problem = _fs_problem()
    logged, log = wrap_with_logging(problem)
    zx, zy = np.zeros(problem.d1), np.zeros(problem.d2)
    logged.grad(zx, zy)
    logged.grad(zx, zy)
    logged.component_grad(1, zx, zy)
    assert log.fo_calls == 2
    assert log.ifo_calls == 1
    assert log.query_count == 3
    # one full-gradient call reveals all n components
    assert log.ifo_equivalent(problem.n_components) == 4 * 2 + 1


def test_value_calls_are_not_gradient_calls():
    problem = make_quadratic_saddle()
    logged, log = wrap_with_logging(problem)
    logged.value(np.ones(problem.d1), np.ones(problem.d2))
    assert log.fo_calls == 0


def test_examiner_access_is_uncharged():
    spec = HardInstanceSpec.derive("deterministic", L=1.0, mu=0.25, Delta=1.0,
                                   epsilon=0.05, d_override=3)
    logged, log = wrap_with_logging(spec.make())
    logged.primal_value(np.zeros(logged.d1))
    logged.primal_grad(np.zeros(logged.d1))
    assert log.query_count == 0


def test_activation_records_first_nonzero_query():
    """(coordinate, call index) pairs, both 1-based, in discovery order."""
    spec = HardInstanceSpec.derive("deterministic", L=1.0, mu=0.25, Delta=1.0,
                                   epsilon=0.05, d_override=3)
    logged, log = wrap_with_logging(spec.make(), watch_x_coord=spec.d)
    zx, zy = np.zeros(logged.d1), np.zeros(logged.d2)

    logged.grad(zx, zy)                     # call 1: all-zero query
    x = zx.copy()
    x[0] = 0.7
    logged.grad(x, zy)                      # call 2: x_1 active
    y = zy.copy()
    y[4] = -0.2                             # 1-based coordinate 5
    logged.grad(x, y)                       # call 3: y_5 active
    x2 = x.copy()
    x2[spec.d - 1] = 1e-300                 # exact != 0 is what counts
    logged.grad(x2, y)                      # call 4: x_d active

    assert log.x_activation == [(1, 2), (spec.d, 4)]
    assert log.y_activation == [(5, 3)]
    assert log.first_call_with_xd_nonzero == 4


def test_component_calls_share_the_query_index_sequence():
    problem = _fs_problem()
    logged, log = wrap_with_logging(problem)
    zx, zy = np.zeros(problem.d1), np.zeros(problem.d2)
    logged.grad(zx, zy)                     # query index 1
    x = zx.copy()
    x[0] = 1.0
    logged.component_grad(0, x, zy)         # query index 2
    assert log.x_activation == [(1, 2)]


def test_span_protocol_flags_offspan_queries():
    spec = HardInstanceSpec.derive("deterministic", L=1.0, mu=0.25, Delta=1.0,
                                   epsilon=0.05, d_override=4)
    logged, _ = wrap_with_logging(spec.make(), track_spans=True)
    zx, zy = np.zeros(logged.d1), np.zeros(logged.d2)
    gx, gy = logged.grad(zx, zy)
    # staying inside the returned span is fine
    logged.grad(0.5 * gx, -2.0 * gy)
    # jumping to a coordinate no gradient has revealed is not
    x_bad = zx.copy()
    x_bad[2] = 1.0
    with pytest.raises(SpanProtocolError):
        logged.grad(x_bad, zy)


@pytest.mark.parametrize("factory,tol", [
    (lambda: make_bilinear(coupling=1.3, dim=3), 1e-8),
    (lambda: make_quadratic_saddle(dim=2, a=0.8, b=1.1, couplings=(0.9, 0.4)),
     1e-8),
])
def test_finite_difference_check_on_smooth_problems(factory, tol):
    problem = factory()
    rng = np.random.default_rng(3)
    for _ in range(5):
        pt = SaddlePoint(rng.standard_normal(problem.d1),
                         rng.standard_normal(problem.d2))
        assert finite_difference_check(problem, pt) < tol


def test_run_trace_calls_must_increase():
    tr = RunTrace(suite="s", instance_id="i", solver="gda", seed=0,
                  kappa=2.0, n=1, epsilon=0.1)
    tr.append(TraceRow(calls=5))
    with pytest.raises(ValueError):
        tr.append(TraceRow(calls=5))
    tr.maybe_append(TraceRow(calls=4))      # silently skipped
    tr.maybe_append(TraceRow(calls=6))
    assert [r.calls for r in tr.rows] == [5, 6]
    assert tr.final.calls == 6


def test_wrapper_preserves_problem_dimensions():
    problem = _fs_problem()
    logged, _ = wrap_with_logging(problem)
    assert (logged.d1, logged.d2) == (problem.d1, problem.d2)
    assert logged.n_components == problem.n_components
    assert logged.L == problem.L and logged.mu == problem.mu
