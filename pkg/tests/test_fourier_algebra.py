from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lindborel.fourier_algebra import (EpsSeries, EquilibriumViolated, NotHyperbolic, SystemSpec, TrigPoly,
                                       compose_f, cosine_perturbation, effective_potential, hessian_at,
                                       omega_derivative, parse_perturbation, series_mul, tp_diff, tp_mul)
from lindborel.freq_diophantine import golden_frequency
from lindborel.lindstedt_recursion import psi_grid, solve_up_to

GRID = psi_grid(16)

modes2 = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
coefs = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)
polys = st.dictionaries(modes2, coefs, max_size=6).map(lambda t: TrigPoly(t, (), 2))


def _cos(k):
    return TrigPoly({k: 0.5, tuple(-x for x in k): 0.5}, (), 2)


def test_product_of_cosines():
    p = tp_mul(_cos((1, 0)), _cos((0, 1)))
    expected = {(1, 1): 0.25, (1, -1): 0.25, (-1, 1): 0.25, (-1, -1): 0.25}
    assert set(p.terms) == set(expected)
    for k, v in expected.items():
        assert p.coef(k) == pytest.approx(v)


def test_identity_and_zero():
    one = TrigPoly.constant(1.0, 2)
    a = _cos((2, -1))
    assert (tp_mul(one, a) - a).is_zero()
    assert tp_mul(TrigPoly.zero(2), a).is_zero()


def test_vector_times_scalar_broadcasts():
    v = TrigPoly({(1, 0): np.array([1.0, 2.0, 3.0])}, (3,), 2)
    p = tp_mul(v, _cos((0, 1)))
    assert p.shape == (3,)
    assert np.allclose(p.coef((1, 1)), [0.5, 1.0, 1.5])


def test_derivatives():
    a = _cos((2, 3))
    d = tp_diff(a, 1)
    assert d.coef((2, 3)) == pytest.approx(1.5j)
    assert d.coef((-2, -3)) == pytest.approx(-1.5j)
    w = np.array([1.0, 0.5])
    assert omega_derivative(a, w, 2).coef((2, 3)) == pytest.approx(-(3.5**2) * 0.5)


def test_square_on_grid():
    # (eps cos psi1)^2 = eps^2 (1 + cos 2 psi1) / 2
    A = [TrigPoly.zero(2), _cos((1, 0)), TrigPoly.zero(2)]
    sq = series_mul(A, A)
    assert sq[0].is_zero() and sq[1].is_zero()
    assert np.allclose(np.real(sq[2].evaluate(GRID)), np.cos(GRID[..., 0]) ** 2)


@settings(max_examples=50, deadline=None)
@given(polys, polys)
def test_evaluation_is_a_homomorphism(a, b):
    lhs = tp_mul(a, b).evaluate(GRID)
    rhs = a.evaluate(GRID) * b.evaluate(GRID)
    assert np.allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(polys, polys)
def test_support_and_degree(a, b):
    p = tp_mul(a, b)
    if not (a.is_zero() or b.is_zero()):
        assert p.degree() <= a.degree() + b.degree()


@settings(max_examples=50, deadline=None)
@given(polys)
def test_conjugate_reflection_real_part(a):
    r = a + a.conj_reflect()
    assert r.is_real()
    assert np.allclose(np.imag(r.evaluate(GRID)), 0, atol=1e-12)


def test_effective_potential_and_hessian():
    f = cosine_perturbation([(0, 0, 1), (1, 0, 1), (0, 1, 0)], 1)
    f0 = effective_potential(f)
    assert set(f0.terms) == {(1,), (-1,)}
    assert hessian_at(f0, [0.0]) == pytest.approx(np.array([[1.0]]))
    with pytest.raises(NotHyperbolic):
        hessian_at(f0, [np.pi])


def test_system_validation():
    fr = golden_frequency()
    f = cosine_perturbation([(0, 0, 1)], 1)
    with pytest.raises(NotHyperbolic):
        SystemSpec(fr, 1, f, [np.pi])
    with pytest.raises(EquilibriumViolated):
        SystemSpec(fr, 1, f, [0.5])
    sys = SystemSpec(fr, 1, f, [0.0])
    assert np.allclose(sys.g_minus1, np.diag([0.0, 0.0, 1.0]))


def test_node_tensor_rank_one(golden):
    # f_(1,0) = 0.5 e^(i beta): gradient 0.5 (i, 0, i) at beta0 = 0
    T = golden.node_tensor((1, 0), 1)
    assert T.shape == (3,)
    assert T[0] == pytest.approx(0.5j)
    assert T[2] == pytest.approx(0.5j)


def test_parse_closes_conjugates(caplog):
    f = parse_perturbation([{"nu": [1, 0], "mu": [1], "re": 1.0, "im": 0.0}], 1)
    assert f.is_real()
    # the missing partner is added with the conjugate coefficient
    assert f.coef((-1, 0, -1)) == pytest.approx(1.0)
    assert "conjugate-closed" in caplog.text


def test_grad_f_matches_differences(golden):
    rng = np.random.default_rng(0)
    phi = rng.uniform(0, 2 * np.pi, (5, 3))
    h = 1e-6
    for g in range(3):
        e = np.zeros(3)
        e[g] = h
        fd = (golden.f_value(phi + e) - golden.f_value(phi - e)) / (2 * h)
        assert np.allclose(golden.grad_f(phi)[:, g], fd, atol=1e-8)


def test_compose_matches_grid(golden):
    h = solve_up_to(golden, 3).h
    comp = compose_f(golden, h, 3)
    psi = psi_grid(12)
    for eps in (1e-2, 5e-3):
        hv = np.real(h.evaluate(psi, eps))
        base = np.concatenate([psi, np.zeros(psi.shape[:-1] + (1,))], axis=-1)
        direct = golden.grad_f(base + hv)
        approx = np.real(comp.evaluate(psi, eps))
        assert np.max(np.abs(direct - approx)) < 50 * eps**4


def test_compose_support_grows(golden):
    h = solve_up_to(golden, 3).h
    comp = compose_f(golden, h, 3)
    degrees = [p.degree() for p in comp.orders]
    assert degrees == sorted(degrees)
    assert comp.is_real()


def test_eps_series_rows():
    s = EpsSeries.zeros(2, 3)
    assert s.K == 2 and s.to_rows() == []
    s.orders[1] = TrigPoly({(1, 0): np.array([1j, 0, 0])}, (3,), 2)
    assert s.to_rows() == [(1, 1, 0, 0, 0.0, 1.0), (1, 1, 0, 1, 0.0, 0.0), (1, 1, 0, 2, 0.0, 0.0)]


def test_compose_rejects_constant_term(golden):
    with pytest.raises(ValueError):
        compose_f(golden, EpsSeries([TrigPoly.constant(np.ones(3), 2)], 3), 1)
