"""Hard-instance constructions against independent oracles.

Closed forms are checked against quadrature, dense linear algebra, and
finite differences rather than against the code that produced them.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from saddlekit.core import SaddlePoint, finite_difference_check
from saddlekit.instances import (
    ChainMatrix,
    HardInstanceSpec,
    deterministic_ystar,
    estimate_smoothness,
    gamma,
    gamma_prime,
    make_quadratic_saddle,
)

# ---------------------------------------------------------------------------
# the scalar potential
# ---------------------------------------------------------------------------


def test_gamma_frozen_values():
    assert abs(gamma(0.0) - 7.34105122590293) < 1e-12
    assert gamma(1.0) == 0.0


def test_gamma_matches_quadrature_of_its_derivative():
    # gamma(0) = -(integral of gamma' from 0 to 1), by gamma(1) = 0
    val, err = quad(gamma_prime, 0.0, 1.0)
    assert err < 1e-10
    assert abs(gamma(0.0) + val) < 1e-9


def test_gamma_prime_closed_values():
    assert gamma_prime(0.0) == 0.0          # exactly, not approximately
    assert gamma_prime(1.0) == 0.0
    assert abs(gamma_prime(2.0) - 96.0) < 1e-12


def test_gamma_prime_is_the_derivative():
    for t in (-1.5, -0.2, 0.4, 0.9, 1.7, 3.0):
        h = 1e-6
        fd = (gamma(t + h) - gamma(t - h)) / (2 * h)
        assert abs(fd - gamma_prime(t)) < 1e-5 * (1 + abs(gamma_prime(t)))


# ---------------------------------------------------------------------------
# the chain operator
# ---------------------------------------------------------------------------


def test_chain_matrix_worked_example():
    # d = 1, alpha = 1/16: rows (x_2), (x_1 - x_2), (alpha^{1/4} x_1)
    B = ChainMatrix(1, 1.0 / 16.0)
    dense = np.column_stack([B.apply(e) for e in np.eye(2)])
    np.testing.assert_allclose(dense, [[0.0, 1.0],
                                       [1.0, -1.0],
                                       [0.5, 0.0]], atol=0)


@pytest.mark.parametrize("d,alpha", [(1, 0.0625), (4, 0.01), (9, 0.003)])
def test_chain_apply_matches_dense_matrix(d, alpha):
    B = ChainMatrix(d, alpha)
    dense = np.column_stack([B.apply(e) for e in np.eye(d + 1)])
    rng = np.random.default_rng(d)
    for _ in range(10):
        u = rng.standard_normal(d + 1)
        v = rng.standard_normal(d + 2)
        np.testing.assert_allclose(B.apply(u), dense @ u, atol=1e-12)
        np.testing.assert_allclose(B.apply_t(v), dense.T @ v, atol=1e-12)


@pytest.mark.parametrize("d", [1, 3, 10, 25])
def test_chain_operator_norm_within_two(d):
    alpha = 0.007
    B = ChainMatrix(d, alpha)
    dense = np.column_stack([B.apply(e) for e in np.eye(d + 1)])
    assert np.linalg.norm(dense, 2) <= 2.0
    assert B.norm_bound == 2.0


# ---------------------------------------------------------------------------
# derived constants and the spec round trip
# ---------------------------------------------------------------------------


def test_derive_worked_example():
    spec = HardInstanceSpec.derive("deterministic", L=10.0, mu=1.0,
                                   Delta=1.0, epsilon=0.05)
    assert spec.lambda1 == 5.0
    assert spec.lambda2 == 0.5
    assert spec.alpha == 1.0 / 1000.0
    assert spec.d == 1 and spec.d_clamped


def test_dimension_formula_and_inverse():
    # epsilon_for_dimension inverts the d(epsilon) formula exactly
    eps = HardInstanceSpec.epsilon_for_dimension("deterministic", L=1.0,
                                                 mu=0.01, Delta=1.0, d=8)
    d_raw = 1.0 * 1.0 * math.sqrt(1.0 / 0.01) / (12800.0 * eps ** 2)
    assert abs(d_raw - 8.0) < 1e-9


def test_scaled_gradient_floor_equals_epsilon():
    """eta is calibrated so the dormant-subspace floor is the target."""
    for L, mu, eps in ((1.0, 0.1, 0.05), (4.0, 0.5, 0.01), (2.0, 2.0, 0.3)):
        spec = HardInstanceSpec.derive("deterministic", L=L, mu=mu,
                                       Delta=1.0, epsilon=eps, d_override=5)
        floor = (spec.lambda1 ** 2 / (8.0 * spec.lambda2)) \
            * spec.alpha ** 0.75 * spec.eta
        assert abs(floor - eps) <= 1e-12 * eps


def test_spec_text_round_trip():
    spec = HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.05, Delta=2.0,
                                   epsilon=0.02, n=4, d_override=6)
    again = HardInstanceSpec.from_text(spec.to_text())
    assert again == spec


def test_spec_text_rejects_junk():
    spec = HardInstanceSpec.derive("deterministic", L=1.0, mu=0.1,
                                   Delta=1.0, epsilon=0.1)
    with pytest.raises(ValueError):
        HardInstanceSpec.from_text(spec.to_text() + "bogus_key = 3\n")
    with pytest.raises(ValueError):
        HardInstanceSpec.from_text("mode = deterministic\nL 1.0\n")


@pytest.mark.parametrize("kwargs", [
    dict(mode="deterministic", L=1.0, mu=2.0, Delta=1.0, epsilon=0.1),
    dict(mode="deterministic", L=1.0, mu=0.1, Delta=-1.0, epsilon=0.1),
    dict(mode="deterministic", L=1.0, mu=0.1, Delta=1.0, epsilon=0.1, n=3),
    dict(mode="finite_sum", L=1.0, mu=0.1, Delta=1.0, epsilon=0.1, n=1),
    dict(mode="finite_sum", L=1.0, mu=0.4, Delta=1.0, epsilon=0.1, n=4),
    dict(mode="case1", L=1.0, mu=0.5, Delta=1.0, epsilon=1.0, n=4, d_total=6),
    dict(mode="warp", L=1.0, mu=0.1, Delta=1.0, epsilon=0.1),
])
def test_derive_rejects_bad_constants(kwargs):
    with pytest.raises(ValueError):
        HardInstanceSpec.derive(**kwargs)


def test_instance_id_is_filename_friendly():
    spec = HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.1, Delta=1.0,
                                   epsilon=0.02, n=4, d_override=6)
    ident = spec.instance_id()
    assert ident == "finite_sum-L1-mu0.1-eps0.02-d6-n4"
    assert "/" not in ident and " " not in ident


# ---------------------------------------------------------------------------
# the deterministic instance
# ---------------------------------------------------------------------------


def _det_spec(d=5, L=1.0, mu=0.1):
    return HardInstanceSpec.derive("deterministic", L=L, mu=mu, Delta=1.0,
                                   epsilon=0.05, d_override=d)


def test_deterministic_gradient_against_finite_differences():
    spec = _det_spec(d=5)
    problem = spec.make()
    rng = np.random.default_rng(11)
    for _ in range(10):
        pt = SaddlePoint(rng.standard_normal(problem.d1) * 0.5,
                         rng.standard_normal(problem.d2) * 0.5)
        assert finite_difference_check(problem, pt) < 1e-5


def test_primal_equals_value_at_best_response():
    spec = _det_spec(d=4)
    problem = spec.make()
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = rng.standard_normal(problem.d1)
        ystar = deterministic_ystar(spec, x)
        phi = problem.primal_value(x)
        assert abs(phi - problem.value(x, ystar)) <= 1e-10 * (1 + abs(phi))


def test_frozen_primal_at_origin():
    # unscaled single-link chain with lambda = (1, 1), alpha = 0.01
    spec = HardInstanceSpec(mode="deterministic", L=2.0, mu=2.0, Delta=1.0,
                            epsilon=0.05, lambda1=1.0, lambda2=1.0,
                            alpha=0.01, eta=1.0, d=1)
    problem = spec.make()
    phi0 = problem.primal_value(np.zeros(problem.d1))
    assert abs(phi0 - 0.061705256129514656) < 1e-15


def test_gradient_floor_on_dormant_subspace():
    """Any x with the last two coordinates still zero cannot be stationary:
    the scaled floor (which equals the configured epsilon) holds."""
    spec = _det_spec(d=6)
    problem = spec.make()
    rng = np.random.default_rng(2)
    floor = spec.epsilon
    for _ in range(200):
        x = rng.standard_normal(problem.d1) * rng.choice([0.1, 1.0, 3.0])
        x[spec.d - 1] = 0.0
        x[spec.d] = 0.0
        x *= spec.eta  # the floor argument lives on the scaled instance
        g = problem.primal_grad(x)
        assert float(np.linalg.norm(g)) >= floor * (1 - 1e-12)


def test_advertised_smoothness_is_an_upper_bound():
    spec = _det_spec(d=4, L=2.0, mu=0.4)
    problem = spec.make()
    lip, _ = estimate_smoothness(problem, sample_count=500, seed=1)
    assert lip <= problem.L * (1 + 1e-6)


# ---------------------------------------------------------------------------
# the finite-sum instance
# ---------------------------------------------------------------------------


def _fs_spec(n=4, d=3):
    return HardInstanceSpec.derive("finite_sum", L=1.0, mu=0.1, Delta=1.0,
                                   epsilon=0.05, n=n, d_override=d)


def test_finite_sum_value_is_block_average():
    spec = _fs_spec()
    problem = spec.make()
    emb = problem.meta["embedding"]
    n = problem.n_components
    rng = np.random.default_rng(7)
    x = rng.standard_normal(problem.d1)
    y = rng.standard_normal(problem.d2)
    # each block pair sees one copy of the chain; the objective is their mean
    from saddlekit.kernels import det_value_np
    parts = [det_value_np(emb.x_block(x, i), emb.y_block(y, i), spec.d,
                          spec.eta, spec.lambda1, spec.lambda2, spec.alpha)
             for i in range(n)]
    full = problem.value(x, y)
    assert abs(full - float(np.mean(parts))) <= 1e-12 * (1 + abs(full))


def test_component_gradients_average_to_full_gradient():
    problem = _fs_spec(n=4, d=3).make()
    rng = np.random.default_rng(9)
    for _ in range(10):
        x = rng.standard_normal(problem.d1)
        y = rng.standard_normal(problem.d2)
        gx, gy = problem.grad(x, y)
        cx = np.zeros_like(gx)
        cy = np.zeros_like(gy)
        for i in range(problem.n_components):
            gxi, gyi = problem.component_grad(i, x, y)
            cx += gxi
            cy += gyi
        np.testing.assert_allclose(cx / 4.0, gx, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(cy / 4.0, gy, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("n,d", [(2, 3), (4, 6)])
def test_finite_sum_gradient_against_finite_differences(n, d):
    problem = _fs_spec(n=n, d=d).make()
    rng = np.random.default_rng(n * d)
    for _ in range(5):
        pt = SaddlePoint(rng.standard_normal(problem.d1) * 0.3,
                         rng.standard_normal(problem.d2) * 0.3)
        assert finite_difference_check(problem, pt) < 1e-5


# ---------------------------------------------------------------------------
# the quadratic finite-sum family
# ---------------------------------------------------------------------------


def test_case1_closed_forms():
    spec = HardInstanceSpec.derive("case1", L=1.0, mu=0.5, Delta=1.0,
                                   epsilon=1.0, n=4)
    problem = spec.make()
    th, L, mu, n = spec.theta, spec.L, spec.mu, spec.n
    rng = np.random.default_rng(1)
    x = rng.standard_normal(problem.d1)
    y = rng.standard_normal(problem.d2)
    want = (th / n) * x.sum() + L * float(x @ y) - 0.5 * mu * float(y @ y)
    assert abs(problem.value(x, y) - want) < 1e-12
    np.testing.assert_allclose(problem.primal_grad(x),
                               th / n + (L ** 2 / mu) * x, rtol=1e-12)
    phi = (th / n) * x.sum() + (L ** 2 / (2 * mu)) * float(x @ x)
    assert abs(problem.primal_value(x) - phi) < 1e-12


def test_case1_initial_gap_is_delta():
    # Phi is strongly convex with minimizer -theta*mu/(n L^2) * ones, so the
    # gap from the origin has a closed form; theta is calibrated to make it
    # exactly Delta
    for Delta in (0.5, 1.0, 2.0):
        spec = HardInstanceSpec.derive("case1", L=1.0, mu=0.5, Delta=Delta,
                                       epsilon=1.0, n=8)
        problem = spec.make()
        inf_phi = -spec.theta ** 2 * spec.mu * spec.d_total \
            / (2.0 * spec.n ** 2 * spec.L ** 2)
        gap = problem.primal_value(np.zeros(problem.d1)) - inf_phi
        assert abs(gap - Delta) <= 1e-12 * max(1.0, Delta)


def test_quadratic_saddle_reports_spectral_smoothness():
    problem = make_quadratic_saddle(dim=2, a=0.5, b=1.0, couplings=(2.0,))
    top = np.linalg.norm(np.array([[0.5, 2.0], [2.0, 1.0]]), 2)
    assert abs(problem.L - top) < 1e-12
