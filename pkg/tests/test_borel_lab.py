from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lindborel.borel_lab import (BorelPoly, ContourTruncationTooSmall, InsufficientData, TailNotNegligible,
                                 borel_convolve, borel_transform, growth_fit, inverse_laplace_contour, laplace_sum,
                                 series_product)

coef_lists = st.lists(st.floats(-3, 3, allow_nan=False), min_size=8, max_size=8)


def _monomial(k, K=8):
    a = np.zeros(K + 1)
    a[k] = 1.0
    return a


@pytest.mark.parametrize("k", [1, 2, 5, 8])
def test_power_pair(k):
    # eta^k <-> p^(k-1)/(k-1)!
    F = borel_transform(_monomial(k))
    p = np.array([0.3, 1.7])
    assert np.allclose(F(p), p ** (k - 1) / math.factorial(k - 1), rtol=1e-15, atol=0)


@pytest.mark.parametrize("alpha", [-1.0, 0.5, 2.0])
def test_geometric_pair(alpha):
    # eta / (1 - alpha eta) <-> exp(alpha p), coefficient by coefficient
    K = 12
    F = borel_transform([0.0] + [alpha ** (k - 1) for k in range(1, K + 1)])
    mono = F.monomials()
    assert all(mono[j] == alpha**j / math.factorial(j) for j in range(K))


@pytest.mark.parametrize("a,b", [(0, 0), (1, 2), (3, 4)])
def test_convolution_monomial_rule(a, b):
    F = borel_transform(_monomial(a + 1))
    G = borel_transform(_monomial(b + 1))
    H = borel_convolve(F, G)
    expected = np.zeros(H.K)
    expected[a + b + 1] = 1.0
    assert np.array_equal(H.coeffs, expected)


@settings(max_examples=50, deadline=None)
@given(coef_lists, coef_lists)
def test_convolution_is_transform_of_product(a, b):
    A = [0.0] + a
    B = [0.0] + b
    lhs = borel_convolve(borel_transform(A), borel_transform(B))
    # a_0 = b_0 = 0, so a zero eta^9 slot does not change the product through eta^9
    prod = series_product(A + [0.0], B + [0.0])
    rhs = borel_transform(prod)
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


def test_transform_rejects_constant_term():
    with pytest.raises(ValueError):
        borel_transform([1.0, 2.0])


def test_vector_valued_evaluation():
    F = BorelPoly(np.array([[1.0, 0.0], [0.0, 2.0]]))
    assert np.allclose(F(np.array([0.5])), [[1.0, 1.0]])


def test_laplace_of_polynomial_is_partial_sum():
    F = borel_transform([0.0, 1.0, -2.0, 0.5])
    s = laplace_sum(F, 0.1)
    assert complex(s) == pytest.approx(F.laplace_exact(0.1), abs=1e-13)
    assert s.tail_bound < 1e-12


def test_laplace_geometric():
    alpha, eta = -1.0, 0.1
    s = laplace_sum(lambda p: mpmath.exp(alpha * p), eta, bound=(1.0, 0.0))
    assert float(s) == pytest.approx(eta / (1 - alpha * eta), abs=1e-12)


def test_laplace_tail_check():
    with pytest.raises(TailNotNegligible):
        laplace_sum(lambda p: mpmath.exp(2 * p), 0.1, p_max=1.0, bound=(1.0, 2.0))
    with pytest.raises(TailNotNegligible):
        laplace_sum(lambda p: mpmath.exp(20 * p), 0.1, bound=(1.0, 20.0))
    with pytest.raises(ValueError):
        laplace_sum(lambda p: p, 0.1)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_contour_inversion(p):
    r = inverse_laplace_contour(lambda e: e / (1 + e), 1.0, p)
    assert r.value == pytest.approx(math.exp(-p), abs=1e-7)
    r2 = inverse_laplace_contour(lambda e: e * e, 0.5, p)
    assert r2.value == pytest.approx(p, abs=1e-8)


def test_contour_truncation_reported():
    with pytest.raises(ContourTruncationTooSmall):
        inverse_laplace_contour(lambda e: e / (1 + e), 1.0, 1.0, T_max=2.0)


def test_growth_fit_factorial():
    c = [0.0] + [3.0 * 2.0**k * math.factorial(k) for k in range(1, 9)]
    fit = growth_fit(c)
    assert fit.tau_est == pytest.approx(1.0, abs=1e-8)
    assert fit.C == pytest.approx(2.0, rel=1e-6)
    assert fit.holds(c)


def test_growth_fit_geometric_with_fixed_tau():
    c = [0.0] + [2.0**k for k in range(1, 9)]
    fit = growth_fit(c, tau_fixed=0.0)
    assert fit.C == pytest.approx(2.0, rel=1e-10) and fit.D == pytest.approx(1.0, rel=1e-10)
    assert fit.holds(c)


def test_growth_fit_envelope_covers_noisy_data():
    rng = np.random.default_rng(1)
    c = [0.0] + [math.factorial(k) * math.exp(rng.normal()) for k in range(1, 9)]
    assert growth_fit(c, tau_fixed=1.0).holds(c)


def test_growth_fit_needs_data():
    with pytest.raises(InsufficientData):
        growth_fit([0.0, 1.0, 0.0, 2.0, 0.0, 3.0])
