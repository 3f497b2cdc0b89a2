import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covlab import analytic
from covlab.analytic import (EdgeError, QuadratureSpec, TestFunction, expansion_prediction,
                             mp_density, self_consistency_residual, semicircle_density,
                             semicircle_stieltjes, test_function, variance_functional,
                             variance_terms)
from covlab.battery import upper_half_plane_grid

upper = st.builds(complex,
                  st.floats(-10, 10, allow_nan=False),
                  st.floats(1e-3, 1e3, allow_nan=False))


def test_semicircle_density_values():
    assert semicircle_density(2.0) == 0.0
    assert semicircle_density(3.0) == 0.0
    assert semicircle_density(0.0) == pytest.approx(0.3183099, abs=1e-7)
    assert np.all(semicircle_density(np.linspace(-3, 3, 61)) >= 0)


def test_mp_density_values():
    assert mp_density(1.0, 1.0) == pytest.approx(math.sqrt(3) / (2 * math.pi), abs=1e-7)
    assert mp_density(4.0, 1.0) == 0.0
    assert mp_density(0.2, 0.25) == 0.0


@pytest.mark.parametrize("y", [0.0, -0.5, 1.5])
def test_mp_density_rejects_ratio(y):
    with pytest.raises(ValueError):
        mp_density(1.0, y)


def test_stieltjes_examples():
    assert semicircle_stieltjes(2j) == pytest.approx(1j * (math.sqrt(2) - 1), abs=1e-12)
    assert semicircle_stieltjes(1j) == pytest.approx(1j * (math.sqrt(5) - 1) / 2, abs=1e-12)
    z = 1e6j
    assert abs(semicircle_stieltjes(z) - (-1 / z)) <= 1e-11 * abs(1 / z)


@pytest.mark.parametrize("z", [0j, 1 + 0j, 2 - 1j])
def test_stieltjes_rejects_lower_half_plane(z):
    with pytest.raises(ValueError):
        semicircle_stieltjes(z)


def test_branch_law_on_grid():
    zs = upper_half_plane_grid()
    assert len(zs) == 100
    assert zs.imag.min() == pytest.approx(1e-2) and zs.imag.max() == pytest.approx(1e2)
    for z in zs:
        f = semicircle_stieltjes(z)
        assert f.imag > 0 and abs(f) < 1
        assert abs(f * f + z * f + 1) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(upper)
def test_stieltjes_solves_quadratic(z):
    f = semicircle_stieltjes(z)
    assert f.imag > 0
    assert abs(f * f + z * f + 1) <= 1e-12 * max(1.0, abs(z))
    assert abs(f) <= 1 / z.imag + 1e-15


@settings(max_examples=100, deadline=None)
@given(upper)
def test_stieltjes_reflection_symmetry(z):
    # f(-conj z) = -conj f(z) for a symmetric density
    assert semicircle_stieltjes(-z.conjugate()) == pytest.approx(
        -semicircle_stieltjes(z).conjugate(), abs=1e-13)


def test_self_consistency_examples():
    assert self_consistency_residual(2j, 0.4142136j) < 1e-6
    assert self_consistency_residual(2j, 0) == pytest.approx(0.5)
    assert self_consistency_residual(1j, 0.6180340j) < 1e-6
    with pytest.raises(ValueError):
        self_consistency_residual(1j, -1j)
    with pytest.raises(ValueError):
        self_consistency_residual(-1j, 0)


def test_expansion_example():
    terms = expansion_prediction(2j, 100, 10000, 0.0)
    assert terms.total == pytest.approx(-0.0025126 + 0.4136958j, abs=1e-7)
    f = terms.leading
    bracket = terms.total / f
    assert bracket == pytest.approx(0.99875 + 0.0060660j, abs=1e-7)
    f2 = f * f
    assert f2 / (1 - f2) ** 2 == pytest.approx(-0.125, abs=1e-14)


def test_expansion_large_m():
    terms = expansion_prediction(2j, 100, 10 ** 8, 0.0)
    assert abs(terms.first_order) == pytest.approx(2.5127e-5, rel=1e-4)
    # first-order term is purely real at z = 2i
    assert abs(terms.first_order.imag) < 1e-18


def test_expansion_vanishes_in_limit():
    f = semicircle_stieltjes(2j)
    terms = expansion_prediction(2j, 10 ** 6, 10 ** 14, 0.0)
    assert abs(terms.total - f) < 1e-5


def test_expansion_partial_sums():
    t = expansion_prediction(1 + 2j, 64, 4096, -2.0)
    assert t.partial(0) == t.leading
    assert t.partial(1) == t.leading + t.first_order
    assert t.partial(2) == t.total


def test_expansion_kurtosis_linear():
    a = expansion_prediction(2j, 64, 4096, 0.0)
    b = expansion_prediction(2j, 64, 4096, -2.0)
    f = a.leading
    f2 = f * f
    assert b.second_order - a.second_order == pytest.approx(-2.0 * f * f2 / (1 - f2) / 64,
                                                           abs=1e-15)
    assert a.first_order == b.first_order


def test_expansion_rejects():
    with pytest.raises(ValueError):
        expansion_prediction(2j, 1, 10, 0.0)
    with pytest.raises(ValueError):
        expansion_prediction(2j, 10, 5, 0.0)
    with pytest.raises(ValueError):
        expansion_prediction(2.0, 10, 50, 0.0)


def test_expansion_edge_refusal(monkeypatch):
    monkeypatch.setattr(analytic, "semicircle_stieltjes", lambda z: 1.0 + 1e-12j)
    with pytest.raises(EdgeError):
        expansion_prediction(2 + 1e-9j, 10, 100, 0.0)


@pytest.mark.parametrize("k4", [0.0, -2.0, -1.2])
def test_variance_exact_values(k4):
    assert variance_functional(test_function("x"), k4) == pytest.approx(2 + k4, abs=1e-6)
    assert variance_functional(test_function("x2"), k4) == pytest.approx(4.0, abs=1e-6)


def test_variance_of_constant_is_zero():
    assert variance_functional(test_function("1"), 0.7) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("name", ["x", "x2", "x3", "x4", "x5", "x6"])
def test_quadrature_convergence(name):
    phi = test_function(name)
    for k4 in (0.0, -2.0):
        coarse = variance_functional(phi, k4, QuadratureSpec(64))
        fine = variance_functional(phi, k4, QuadratureSpec(128))
        assert abs(coarse - fine) <= 1e-8


@pytest.mark.parametrize("name", ["x3", "cos", "gauss", "tanh"])
def test_double_term_symmetric_under_swap(name):
    phi = test_function(name)
    a, _ = variance_terms(phi, 0.0, QuadratureSpec(64))
    b, _ = variance_terms(phi, 0.0, QuadratureSpec(64), transpose=True)
    assert abs(a - b) <= 1e-12


def test_chebyshev_basis_variance():
    # for phi = sum c_k T_k(x/2) the double term is sum k c_k^2 / 2;
    # x^3 = 2 T_3(x/2) + 6 T_1(x/2)
    c = {1: 6.0, 3: 2.0}
    expected = sum(k * ck ** 2 / 2 for k, ck in c.items())
    assert variance_functional(test_function("x3")) == pytest.approx(expected, abs=1e-8)


def test_finite_difference_derivative_used():
    analytic_phi = test_function("cos")
    bare = TestFunction("cos_fd", np.cos)
    a = variance_functional(analytic_phi, 0.0, QuadratureSpec(64))
    b = variance_functional(bare, 0.0, QuadratureSpec(64))
    assert a == pytest.approx(b, abs=1e-7)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(order=4)
    with pytest.raises(ValueError):
        QuadratureSpec(diag_threshold=0.0)


def test_unknown_test_function():
    with pytest.raises(ValueError):
        test_function("sinh")


def test_density_normalization():
    assert abs(analytic.semicircle_mass() - 1) <= 1e-10
    for y in (0.25, 0.5, 1.0):
        assert abs(analytic.mp_mass(y) - 1) <= 1e-10


def test_stieltjes_density_consistency():
    x = np.linspace(-1.9, 1.9, 381)
    gap = max(abs(semicircle_stieltjes(complex(t, 1e-4)).imag / math.pi - semicircle_density(t))
              for t in x)
    assert gap <= 1e-3


def test_semicircle_cdf_matches_density():
    x = np.linspace(-2, 2, 2001)
    num = np.concatenate([[0], np.cumsum(0.5 * (semicircle_density(x[1:])
                                                + semicircle_density(x[:-1])) * np.diff(x))])
    assert np.max(np.abs(analytic.semicircle_cdf(x) - num)) < 1e-4
    assert analytic.semicircle_cdf(-5.0) == 0.0
    assert analytic.semicircle_cdf(5.0) == pytest.approx(1.0)
