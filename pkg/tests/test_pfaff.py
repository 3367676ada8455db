import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from nhpoisson.errors import ConfigError, ContractError
from nhpoisson.multivec import (ScalarField, constant, coordinate, max_abs_component, scale,
                                schouten_self, sharp)
from nhpoisson.pfaff import (PfaffianSpec, build_r4, build_r5, frobenius_residual,
                             hamiltonian_vf, kernel_oneforms)
from nhpoisson.systems import make_system

x1, x3, x4 = (coordinate(i, 3) for i in range(3))
DISK = PfaffianSpec(-2.0 * x4, -(2.0 / 3.0) * x3 / (1.0 - x1 * x1))


def disk_phi():
    y = [coordinate(i, 5) for i in range(5)]
    return y[1] * y[1] + y[2] * y[2] - (1.0 - y[0] * y[0]) * y[4]


DISK5 = PfaffianSpec(DISK.h3, DISK.h4, disk_phi())


def one_minus_x1sq(dim):
    y = coordinate(0, dim)
    return 1.0 - y * y


def test_forms_trivial():
    spec = PfaffianSpec(constant(0.0, 3), constant(0.0, 3))
    t1, t2 = kernel_oneforms(spec, 4).forms()
    p = np.array([0.3, 0.1, 2.0, -1.0])
    assert_array_equal([c(p) for c in t1], [0, 0, 1, 0])
    assert_array_equal([c(p) for c in t2], [0, 0, 0, 1])


def test_forms_disk():
    t1, t2 = kernel_oneforms(DISK, 4).forms()
    p = np.array([0.0, 5.0, 3.0, 1.0])
    assert_allclose([c(p) for c in t1], [2, 0, 1, 0], atol=1e-15)
    assert_allclose([c(p) for c in t2], [2, 0, 0, 1], atol=1e-15)


def test_forms_theta0():
    forms = kernel_oneforms(DISK5, 5)
    p = np.array([0.0, 1.0, 0.0, 0.0, 2.0])
    assert_allclose([c(p) for c in forms.theta0], [0, 2, 0, 0, -1], atol=1e-15)


def test_dim5_needs_phi():
    with pytest.raises(ConfigError):
        kernel_oneforms(DISK, 5)
    with pytest.raises(ConfigError):
        build_r5(DISK, constant(1.0, 5))


def test_spec_dimension_contract():
    with pytest.raises(ContractError):
        PfaffianSpec(constant(0.0, 4), constant(0.0, 3))
    with pytest.raises(ContractError):
        build_r4(DISK, constant(1.0, 5))


def test_build_r4_zero_multiplier(rng):
    L = build_r4(DISK, constant(0.0, 4))
    assert_array_equal(L.matrix(rng.uniform(-0.5, 0.5, (10, 4))), 0.0)


def test_build_r4_disk_component():
    L = build_r4(DISK, one_minus_x1sq(4))
    W = L.matrix([0.0, 0.4, -0.7, 1.0])
    assert_allclose(W[1, 2], 2.0, atol=1e-15)


def test_build_r5_zero_multiplier(rng):
    L = build_r5(DISK5, constant(0.0, 5))
    assert_array_equal(L.matrix(rng.uniform(-0.5, 0.5, (10, 5))), 0.0)


def test_build_r5_disk_components():
    W = build_r5(DISK5, constant(1.0, 5)).matrix([0.0, 1.0, 0.0, 0.0, 1.0])
    assert_allclose(W[0, 4], 2.0, atol=1e-15)
    assert_allclose(W[0, 1], 1.0, atol=1e-15)


@pytest.mark.parametrize("dim", [4, 5])
def test_kernel_property_random(dim, rng):
    spec = DISK if dim == 4 else DISK5
    mult = one_minus_x1sq(4) if dim == 4 else constant(1.0, 5) + coordinate(2, 5) * coordinate(2, 5)
    L = build_r4(spec, mult) if dim == 4 else build_r5(spec, mult)
    x = rng.uniform(-0.9, 0.9, size=(100, dim))
    W = L.matrix(x)
    for form in kernel_oneforms(spec, dim).forms():
        th = np.stack([c(x) for c in form], axis=-1)
        res = np.max(np.abs(sharp(L, th, x)), axis=-1)
        scale_ = 1.0 + np.max(np.abs(W.reshape(100, -1)), axis=-1)
        assert np.max(res / scale_) < 1e-10


@pytest.mark.parametrize("dim", [4, 5])
def test_generic_multiplier_is_poisson(dim, rng):
    """Any non-vanishing multiplier gives a Poisson bivector."""
    y = [coordinate(i, dim) for i in range(dim)]
    mult = 2.0 + y[0] * y[1] + y[3] * y[3]
    L = build_r4(DISK, mult) if dim == 4 else build_r5(DISK5, mult)
    x = rng.uniform(-0.8, 0.8, size=(200, dim))
    assert np.max(max_abs_component(schouten_self(L, x))) < 1e-8


def test_scaling_closure_exact(rng):
    mult = one_minus_x1sq(4)
    y = coordinate(0, 4)
    a = 1.0 + y * y
    x = rng.uniform(-0.9, 0.9, size=(100, 4))
    W1 = scale(build_r4(DISK, mult), a).matrix(x)
    W2 = build_r4(DISK, a * mult).matrix(x)
    assert_allclose(W1, W2, rtol=1e-15, atol=0)


def test_hamiltonian_vf_constant_is_zero(rng):
    L = build_r4(DISK, one_minus_x1sq(4))
    X = hamiltonian_vf(L, constant(3.0, 4))
    assert_array_equal(X(rng.uniform(-0.5, 0.5, (10, 4))), 0.0)


def test_hamiltonian_vf_disk(rng):
    spec = make_system("disk")
    L = build_r4(DISK, one_minus_x1sq(4))
    X = hamiltonian_vf(L, spec.energy)
    x = spec.sample(rng, 100)
    v = spec.vf(x)
    res = np.max(np.abs(X(x) - v), axis=-1) / (1.0 + np.max(np.abs(v), axis=-1))
    assert np.max(res) < 1e-10


def test_hamiltonian_vf_cylinder_lambda1(rng):
    spec = make_system("cylinder")
    X = hamiltonian_vf(spec.extras["Lambda1"], spec.energy)
    x = spec.sample(rng, 100)
    assert_allclose(X(x), spec.vf(x), rtol=0, atol=1e-12)


def test_hamiltonian_vf_annihilates_phi(rng):
    spec = make_system("disk", variant="extended5")
    X = spec.hamiltonian_vf()
    x = spec.sample(rng, 100)
    assert np.max(np.abs(X.apply(spec.phi, x))) < 1e-10
    assert np.max(np.abs(X.apply(spec.energy, x))) < 1e-10


def test_frobenius_constant_exact():
    spec = PfaffianSpec(constant(0.5, 3), constant(-2.0, 3))
    assert frobenius_residual(spec, [0.1, 0.2, 0.3, 0.4]) == 0.0


def test_frobenius_disk():
    assert frobenius_residual(DISK, [0.3, 0.0, 1.0, 2.0]) < 1e-8


def test_frobenius_surface_ball():
    spec = make_system("surface_ball")
    assert frobenius_residual(spec.pfaffian, [0.5, 0.1, 0.3, 0.7]) < 1e-8


def test_frobenius_dim_contract():
    with pytest.raises(ContractError):
        frobenius_residual(DISK, [0.1, 0.2, 0.3])


def test_missing_gradient_uses_differences(rng):
    h3 = ScalarField(lambda q: -2.0 * q[..., 2], 3)
    spec = PfaffianSpec(h3, DISK.h4)
    x = rng.uniform(-0.8, 0.8, size=(50, 4))
    L = build_r4(spec, one_minus_x1sq(4))
    assert np.max(max_abs_component(schouten_self(L, x))) < 1e-7
