import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from nhpoisson.errors import ContractError, NHPoissonError
from nhpoisson.multivec import (BivectorField, ScalarField, VectorField, constant, coordinate,
                                lie_bracket, max_abs_component, rank_at, scale, schouten_pair,
                                schouten_self, sharp, upper_triples, wedge,
                                wedge_bivector_vector)
from nhpoisson.systems import make_system
from nhpoisson.verify import heisenberg_bivector


def canonical(n=2):
    return BivectorField({(0, 1): constant(1.0, n)}, n)


def poly_field(coeffs, n=3):
    """A quadratic vector field ``X^i = c_i0 + sum_j c_ij x_j + d_i x_i x_{i+1}``; no
    analytic Jacobian, so brackets use finite differences."""
    c = np.asarray(coeffs, dtype=float).reshape(n, n + 2)

    def f(p):
        lin = c[:, 0] + np.einsum("ij,...j->...i", c[:, 1:n + 1], p)
        quad = c[:, n + 1] * p * np.roll(p, -1, axis=-1)
        return lin + quad
    return VectorField(f, n)


# -- sharp ----------------------------------------------------------------

def test_sharp_canonical():
    L = canonical()
    assert_array_equal(sharp(L, [0.0, 1.0], [0.3, -2.0]), [1.0, 0.0])
    assert_array_equal(sharp(L, [1.0, 0.0], [0.3, -2.0]), [0.0, -1.0])


def test_sharp_dimension_mismatch():
    with pytest.raises(ContractError):
        sharp(canonical(), [1.0, 0.0, 0.0], [0.0, 0.0])


def test_sharp_disk_first_component():
    spec = make_system("disk")
    x = np.array([0.0, 0.3, 0.1, 0.2])
    v = sharp(spec.bivector(), spec.energy.gradient(x), x)
    assert_allclose(v[0], 0.3, rtol=0, atol=1e-15)


# -- Schouten bracket -----------------------------------------------------

def test_schouten_constant_is_zero(rng):
    L = BivectorField({(0, 1): constant(2.0, 4), (1, 3): constant(-0.5, 4)}, 4)
    x = rng.uniform(-1, 1, size=(20, 4))
    assert_array_equal(schouten_self(L, x), 0.0)


def test_heisenberg_coefficient(rng):
    x = rng.uniform(-2, 2, size=(10, 3))
    S = schouten_self(heisenberg_bivector(), x)
    assert_allclose(S[:, 0, 1, 2], 4.0, rtol=0, atol=1e-9)
    # total antisymmetry of the stored array
    assert_allclose(S[:, 1, 0, 2], -4.0, rtol=0, atol=1e-9)
    assert_allclose(S[:, 2, 0, 1], 4.0, rtol=0, atol=1e-9)


def test_heisenberg_components():
    x = np.array([0.7, -1.3, 0.4])
    W = heisenberg_bivector().matrix(x)
    assert_allclose([W[0, 1], W[0, 2], W[1, 2]], [1.0, 0.7, -1.3], atol=1e-15)


def test_disk_r5_jacobi_at_point():
    spec = make_system("disk", variant="extended5")
    S = schouten_self(spec.bivector(), [0.2, 0.1, 0.3, 0.4, 0.5])
    assert max_abs_component(S) < 1e-8


def test_pair_polarization(rng):
    spec = make_system("routh_sphere")
    L = spec.bivector()
    x = spec.sample(rng, 30)
    assert_allclose(schouten_pair(L, L, x), schouten_self(L, x), rtol=0, atol=1e-13)


def test_pair_symmetric_for_bivectors(rng):
    spec = make_system("cylinder")
    L1, L2 = spec.extras["Lambda1"], spec.extras["Lambda2"]
    x1 = coordinate(0, 4)
    L3 = scale(spec.bivector(), 1.0 + x1 * x1)
    x = spec.sample(rng, 30)
    for A, B in ((L1, L2), (L1, L3), (L2, L3)):
        assert_allclose(schouten_pair(A, B, x), schouten_pair(B, A, x), rtol=0, atol=1e-13)


def test_pair_hand_expansion(rng):
    L1 = canonical(3)
    L2 = BivectorField({(0, 1): coordinate(0, 3)}, 3)
    x = rng.uniform(-1, 1, size=(5, 3))
    assert_allclose(schouten_pair(L1, L2, x)[:, 0, 1, 2], 0.0, atol=1e-15)


def test_cylinder_pair_vanishes(rng):
    spec = make_system("cylinder")
    x = spec.sample(rng, 200)
    S = schouten_pair(spec.extras["Lambda1"], spec.extras["Lambda2"], x)
    assert np.max(max_abs_component(S)) < 1e-8


@settings(max_examples=3, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=30, max_size=30),
       st.lists(st.floats(-1, 1), min_size=15, max_size=15))
def test_leibniz_wedge(cs, xs):
    X = poly_field(cs[:15])
    Y = poly_field(cs[15:])
    x = np.reshape(xs, (5, 3))
    lhs = schouten_self(wedge(X, Y), x)
    rhs = 2.0 * wedge_bivector_vector(wedge(X, Y), lie_bracket(X, Y), x)
    assert_allclose(lhs, rhs, rtol=0, atol=1e-6)


# -- rank, scale, wedge ---------------------------------------------------

def test_rank_examples():
    assert rank_at(BivectorField({}, 4), np.zeros(4)) == 0
    assert rank_at(canonical(4), np.zeros(4)) == 2
    disk5 = make_system("disk", variant="extended5")
    assert rank_at(disk5.bivector(), [1.0, 0.0, 0.0, 0.7, 0.0]) == 0


def test_rank_tol_must_be_positive():
    with pytest.raises(ContractError):
        rank_at(canonical(), np.zeros(2), tol=0.0)


def test_rank_tolerance_is_relative():
    L = BivectorField({(0, 1): constant(1.0, 4), (2, 3): constant(1e-3, 4)}, 4)
    assert rank_at(L, np.zeros(4), tol=1e-9) == 4
    assert rank_at(L, np.zeros(4), tol=1e-2) == 2


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=10, max_size=10))
def test_rank_is_even(vals):
    comps = {}
    k = 0
    for i in range(5):
        for j in range(i + 1, 5):
            comps[(i, j)] = constant(vals[k], 5)
            k += 1
    L = BivectorField(comps, 5)
    assert rank_at(L, np.zeros(5)) % 2 == 0


def test_rank_odd_guard():
    class Fake(BivectorField):
        def matrix(self, x):
            return np.diag([1.0, 1.0, 1.0])
    with pytest.raises(NHPoissonError):
        rank_at(Fake({}, 3), np.zeros(3))


def test_scale_identity_and_zero(rng):
    spec = make_system("disk")
    L = spec.bivector()
    x = spec.sample(rng, 20)
    assert_array_equal(scale(L, constant(1.0, 4)).matrix(x), L.matrix(x))
    assert_array_equal(scale(L, constant(0.0, 4)).matrix(x), 0.0)


def test_scaled_disk_still_poisson(rng):
    spec = make_system("disk")
    x1 = coordinate(0, 4)
    L = scale(spec.bivector(), 1.0 + x1 * x1)
    x = spec.sample(rng, 100)
    assert np.max(max_abs_component(schouten_self(L, x))) < 1e-8


def test_wedge_basis_and_self():
    d1, d2 = VectorField.coordinate_basis(0, 3), VectorField.coordinate_basis(1, 3)
    W = wedge(d1, d2).matrix([0.1, 0.2, 0.3])
    expected = np.zeros((3, 3))
    expected[0, 1], expected[1, 0] = 1.0, -1.0
    assert_array_equal(W, expected)
    X = poly_field(np.linspace(-1, 1, 15))
    assert_array_equal(wedge(X, X).matrix([[0.1, 0.2, 0.3]]), 0.0)


def test_wedge_dimension_mismatch():
    with pytest.raises(ContractError):
        wedge(VectorField.coordinate_basis(0, 3), VectorField.coordinate_basis(0, 4))


def test_antisymmetry_exact(spec, rng):
    W = spec.bivector().matrix(spec.sample(rng, 50))
    assert_array_equal(W + np.swapaxes(W, -1, -2), 0.0)
    assert_array_equal(np.diagonal(W, axis1=-2, axis2=-1), 0.0)


def test_upper_triples_count():
    T = np.zeros((5, 5, 5))
    assert len(upper_triples(T)) == 10


# -- scalar fields --------------------------------------------------------

def test_fd_fallback_matches_analytic(rng):
    f = ScalarField(lambda p: np.sin(p[..., 0]) * p[..., 1] ** 2, 2)
    x = rng.uniform(-1, 1, size=(50, 2))
    exact = np.stack([np.cos(x[:, 0]) * x[:, 1] ** 2, 2 * np.sin(x[:, 0]) * x[:, 1]], axis=-1)
    assert not f.has_analytic_gradient
    assert_allclose(f.gradient(x), exact, rtol=0, atol=1e-9)


def test_field_algebra(rng):
    x1, x2 = coordinate(0, 2), coordinate(1, 2)
    f = (x1 * x2 + 3.0) / (1.0 + x1 * x1) - x2
    x = rng.uniform(-1, 1, size=(30, 2))
    a, b = x[:, 0], x[:, 1]
    assert_allclose(f(x), (a * b + 3) / (1 + a * a) - b, rtol=1e-14)
    assert_allclose(f.gradient(x), f.fd_gradient(x), rtol=0, atol=1e-8)


def test_points_must_be_finite():
    with pytest.raises(ContractError):
        coordinate(0, 2)([np.nan, 0.0])
    with pytest.raises(ContractError):
        coordinate(0, 2)([0.0, 0.0, 0.0])
