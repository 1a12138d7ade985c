import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zoest import (
    LOG_FLOOR,
    BoundInputs,
    EstimatorSpec,
    Objective,
    ParameterError,
    RandomSource,
    c_curve_grad,
    c_curve_hess,
    directional_derivative,
    estimate_smoothness_constant,
    fourth_derivative_contraction,
    grad_bias_bound_first_order,
    grad_bias_bound_refined,
    grad_variance_bound,
    hess_bias_bound_first_order,
    hess_bias_bound_refined,
    hess_variance_bound,
    hess_variance_bound_terms,
    make_paper_test_function,
    make_quadratic,
    run_trials,
    spectral_norm,
    sphere_cross_fourth_moment,
    sphere_even_moment,
    third_derivative_contraction,
)


def exact_grad_var(n, k, d, g, L3):
    # rational-arithmetic oracle of the three printed terms
    n, k, d, g, L3 = (Fraction(v) for v in (n, k, d, g, L3))
    return float((n / k - 1) * g * g + (L3 * d * d / 3) * (n * n / k - n) * g
                 + L3 * L3 * n * n * d ** 4 / (36 * k))


# -- gradient variance ---------------------------------------------------------


def test_grad_variance_full_frame_leaves_remainder():
    b = BoundInputs(50, 50, 0.1, grad_norm=3.0, L3=2.0)
    assert grad_variance_bound(b) == pytest.approx(4.0 * 50 * 1e-4 / 36, rel=1e-12)


def test_grad_variance_first_term_only():
    assert grad_variance_bound(BoundInputs(2, 1, 0.0, grad_norm=1.0, L3=1.0)) == 1.0


def test_grad_variance_worked_example():
    value = grad_variance_bound(BoundInputs(500, 100, 0.01, grad_norm=22.369, L3=1.0))
    oracle = exact_grad_var(500, 100, "0.01", "22.369", 1)
    assert value == pytest.approx(oracle, rel=1e-12)
    assert value == pytest.approx(2002.98, abs=0.01)


def test_grad_variance_requires_l3():
    with pytest.raises(ParameterError):
        grad_variance_bound(BoundInputs(5, 2, 0.1, grad_norm=1.0))


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 300), g=st.floats(0, 100), L3=st.floats(0, 100), d=st.floats(0, 1),
       data=st.data())
def test_grad_variance_nonincreasing_in_k(n, g, L3, d, data):
    k = data.draw(st.integers(1, n))
    k2 = data.draw(st.integers(k, n))
    lo = grad_variance_bound(BoundInputs(n, k2, d, grad_norm=g, L3=L3))
    hi = grad_variance_bound(BoundInputs(n, k, d, grad_norm=g, L3=L3))
    assert lo <= hi * (1 + 1e-12) + 1e-300


# -- gradient bias -------------------------------------------------------------


def test_grad_bias_first_order_examples():
    assert grad_bias_bound_first_order(BoundInputs(500, 1, 0.01, L1=1.0)) == pytest.approx(
        0.00998004, abs=1e-8)
    assert grad_bias_bound_first_order(BoundInputs(1, 1, 0.2, L1=3.0)) == pytest.approx(0.3)
    big = grad_bias_bound_first_order(BoundInputs(10**9, 1, 0.2, L1=3.0))
    assert big == pytest.approx(0.6, rel=1e-8)


def test_grad_bias_refined_zero_inputs():
    b = BoundInputs(4, 2, 0.1, F_contract=np.zeros(4), L4=0.0)
    assert grad_bias_bound_refined(b) == 0.0


def test_grad_bias_refined_matches_brute_force_bias(f500):
    x = np.zeros(500)
    F = third_derivative_contraction(f500, x)
    # sin terms give -cos(0) = -1 per coordinate; the exp block adds to the first two
    np.testing.assert_allclose(F[2:], -1.0, atol=1e-5)
    bound = grad_bias_bound_refined(BoundInputs(500, 500, 0.1, F_contract=F, L4=0.0))
    stats = run_trials(EstimatorSpec("gradient", "stiefel", 500, 0.1), f500, x, 20)
    assert bound / 3 <= stats.empirical_bias <= 3 * bound


# -- Hessian variance ------------------------------------------------------------


def test_hess_variance_explicit_terms_vanish_at_full_frame():
    terms = hess_variance_bound_terms(BoundInputs(30, 30, 0.1, hess_fro=2.0, hess_spec=1.5,
                                                  L4=1.0, L6=1.0))
    assert terms["explicit"] == 0.0
    assert terms["total"] == terms["implicit"] > 0


def test_hess_variance_zero_delta():
    b = BoundInputs(10, 5, 0.0, hess_fro=2.0, hess_spec=1.0, L4=3.0, L6=3.0)
    assert hess_variance_bound(b) == pytest.approx(4.0 * 3.0)


def test_hess_variance_worked_example():
    b = BoundInputs(100, 50, 0.01, hess_fro=1.0, hess_spec=1.0, L4=1.0, L6=1.0)
    terms = hess_variance_bound_terms(b)
    assert terms["explicit"] == pytest.approx(3.0 + 6.0, rel=1e-12)
    assert terms["implicit"] == pytest.approx(5e-4, rel=1e-12)
    assert hess_variance_bound(b) == pytest.approx(9.0005, rel=1e-12)


def test_hess_variance_constants_configurable():
    b = BoundInputs(100, 50, 0.01, hess_fro=1.0, hess_spec=1.0, L4=1.0, L6=1.0)
    terms = hess_variance_bound_terms(b, c_a=2.0, c_b=0.0)
    assert terms["implicit"] == pytest.approx(2.0 * 1e4 * 1e-8)
    assert (terms["c_a"], terms["c_b"]) == (2.0, 0.0)


# -- Hessian bias ----------------------------------------------------------------


def test_hess_bias_first_order_examples():
    assert hess_bias_bound_first_order(BoundInputs(100, 1, 0.1, L2=1.0)) == pytest.approx(
        0.19802, abs=1e-5)
    assert hess_bias_bound_first_order(BoundInputs(1, 1, 0.1, L2=2.0)) == pytest.approx(0.2)


def test_hess_bias_refined_trivial_cases():
    assert hess_bias_bound_refined(BoundInputs(5, 5, 0.1, Ftilde_spec=0.0, L5=0.0)) == 0.0
    pure = hess_bias_bound_refined(BoundInputs(5, 5, 0.1, Ftilde_spec=0.0, L5=2.0))
    assert pure == pytest.approx(4 * 1e-3 * 2 * 25 / 15)


def test_hess_bias_refined_quadratic_has_zero_contraction():
    A = np.array([[1.0, 0.3], [0.3, -2.0]])
    Ft = fourth_derivative_contraction(make_quadratic(A), np.zeros(2))
    assert np.max(np.abs(Ft)) < 1e-6


def test_hess_bias_refined_dominates_observed_bias(f100):
    x = np.full(100, math.pi / 4)
    Ft = spectral_norm(fourth_derivative_contraction(f100, x))
    L5 = estimate_smoothness_constant(f100, 5, x, 0.3, n_points=4, n_directions=8,
                                      rng=RandomSource(0))
    bound = hess_bias_bound_refined(BoundInputs(100, 100, 0.1, Ftilde_spec=Ft, L5=L5))
    stats = run_trials(EstimatorSpec("hessian", "stiefel", 100, 0.1), f100, x, 10)
    assert stats.empirical_bias <= bound
    # the leading term alone already tracks the observed bias
    lead = hess_bias_bound_refined(BoundInputs(100, 100, 0.1, Ftilde_spec=Ft, L5=0.0))
    assert lead / 3 <= stats.empirical_bias <= 3 * lead


# -- c-curves --------------------------------------------------------------------


def test_c_curve_grad_examples():
    assert c_curve_grad(500, 500, 0.1, 22.37) == pytest.approx(math.log10(0.05), abs=1e-12)
    assert c_curve_grad(40, 1, 0.0, 1.0) == pytest.approx(math.log10(39))
    assert c_curve_grad(40, 40, 0.0, 1.0) == LOG_FLOOR


def test_c_curve_hess_examples():
    assert c_curve_hess(100, 100, 0.01, 5.0, 1.0) == pytest.approx(-4.0, abs=1e-12)
    assert c_curve_hess(100, 100, 0.0, 5.0, 1.0) == LOG_FLOOR
    assert c_curve_hess(10, 1, 0.0, 2.0, 1.0) == pytest.approx(math.log10(4 * 99))


def test_c_curve_tracks_variance_bound_shape():
    # same k-dependence as the variance bound once constants are dropped (L3 = 3)
    for k in (1, 7, 50, 200):
        lhs = 10 ** c_curve_grad(200, k, 0.05, 2.0)
        rhs = grad_variance_bound(BoundInputs(200, k, 0.05, grad_norm=2.0, L3=3.0))
        assert 0.2 <= rhs / lhs <= 5


# -- sphere moments ----------------------------------------------------------------


def test_sphere_even_moment_examples():
    assert sphere_even_moment(7, 2) == pytest.approx(1 / 7)
    assert sphere_even_moment(7, 4) == pytest.approx(3 / 63)
    assert sphere_even_moment(10, 6) == pytest.approx(15 / (10 * 12 * 14))
    assert sphere_even_moment(5, 6) == pytest.approx(15 / (5 * 7 * 9))


def test_sphere_cross_moment_examples():
    assert sphere_cross_fourth_moment(2) == 0.125
    assert sphere_cross_fourth_moment(10) == pytest.approx(1 / 120)


@pytest.mark.parametrize("n,p", [(5, 3), (5, 0), (0, 2)])
def test_sphere_moment_rejects(n, p):
    with pytest.raises(ParameterError):
        sphere_even_moment(n, p)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 10**6))
def test_moment_consistency_identity(n):
    total = n * sphere_even_moment(n, 4) + n * (n - 1) * sphere_cross_fourth_moment(n)
    assert total == pytest.approx(1.0, rel=1e-14)
    assert n * Fraction(3, n * n + 2 * n) + n * (n - 1) * Fraction(1, n * n + 2 * n) == 1


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 200), half=st.integers(1, 8))
def test_even_moment_matches_gamma_formula(n, half):
    # E[v_1^p] = Gamma((p+1)/2) Gamma(n/2) / (sqrt(pi) Gamma((n+p)/2))
    p = 2 * half
    ref = math.exp(math.lgamma((p + 1) / 2) + math.lgamma(n / 2) - math.lgamma((n + p) / 2)
                   ) / math.sqrt(math.pi)
    assert sphere_even_moment(n, p) == pytest.approx(ref, rel=1e-10)


# -- inputs and derivative helpers -------------------------------------------------


@pytest.mark.parametrize("kwargs", [
    dict(n=3, k=4, delta=0.1), dict(n=3, k=0, delta=0.1), dict(n=3, k=1, delta=-1.0),
    dict(n=3, k=1, delta=math.nan), dict(n=3, k=1, delta=0.1, L3=-1.0),
    dict(n=3, k=1, delta=0.1, grad_norm=math.inf), dict(n=3, k=1, delta=0.1, F_contract=[1.0]),
])
def test_bound_inputs_validation(kwargs):
    with pytest.raises(ParameterError):
        BoundInputs(**kwargs)


def test_third_contraction_on_cubic():
    a = np.array([1.0, -2.0, 0.5])
    f = Objective(3, lambda X: (X ** 3) @ a + X[:, 0] * X[:, 1] * X[:, 2])
    # sum_j d^3 f / dx_j dx_j dx_i = 6 a_i (the mixed monomial has no repeated index)
    np.testing.assert_allclose(third_derivative_contraction(f, np.array([0.3, -0.2, 0.1])),
                               6 * a, atol=1e-5)


def test_fourth_contraction_on_quartic():
    f = Objective(3, lambda X: (X ** 4).sum(axis=1) + X[:, 0] ** 2 * X[:, 1] ** 2)
    Ft = fourth_derivative_contraction(f, np.zeros(3), h=1e-2)
    expected = np.diag([24.0 + 4.0, 24.0 + 4.0, 24.0])
    expected[0, 1] = expected[1, 0] = 0.0
    np.testing.assert_allclose(Ft, expected, atol=1e-3)


def test_directional_derivative_exponential():
    f = Objective(2, lambda X: np.exp(X @ np.array([1.0, 2.0])))
    u = np.array([[0.6, 0.8]])
    rate = 0.6 + 1.6
    for p in (1, 2, 3, 4):
        val = directional_derivative(f, np.zeros((1, 2)), u, p, 1e-2)[0]
        assert val == pytest.approx(rate ** p, rel=1e-3)


def test_smoothness_constant_of_quadratic():
    A = np.diag([3.0, -1.0, 0.5])
    est = estimate_smoothness_constant(make_quadratic(A), 2, np.zeros(3), 1.0,
                                       rng=RandomSource(0))
    assert est == pytest.approx(3.0, rel=1e-6)


def test_smoothness_constant_sine_sum_third_order():
    f = make_paper_test_function(4)
    # |d^3 f[u]| at 0 includes sum_i u_i^3 (-cos) = -1 along each axis
    est = estimate_smoothness_constant(f, 3, np.zeros(4), 0.1, rng=RandomSource(1))
    assert est >= 1.0
    with pytest.raises(ParameterError):
        estimate_smoothness_constant(f, 0, np.zeros(4), 0.1)
