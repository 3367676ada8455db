"""Routh's sphere: a ball with its centre of mass at distance ``offset_a`` from
the geometric centre, rolling on a horizontal plane.

Parameter vector layout: ``p = [m, r, g, a, I1, I3]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._accel import kernel
from ..errors import ConfigError
from ..pfaff import PfaffianSpec
from .base import (SystemSpec, batch_guard, kernel_scalar, kernel_vector, params_from,
                   require_positive)
from .disk import lift_to_variety, orbit_constraint, project_to_chart


@dataclass(frozen=True)
class RouthSphereParams:
    m: float = 1.0
    r: float = 1.0
    g: float = 9.81
    offset_a: float = 0.3
    I1: float = 0.4
    I3: float = 0.5

    def validate(self):
        require_positive(self, "m", "r", "g", "offset_a", "I1", "I3")
        if not self.offset_a < self.r:
            raise ConfigError("parameter offset_a must be smaller than r")

    def vector(self):
        return np.array([self.m, self.r, self.g, self.offset_a, self.I1, self.I3])


@kernel
def T_of(s1, p):
    m, r, a, I1 = p[0], p[1], p[3], p[4]
    return I1 + m * r * r + m * a * a + 2.0 * m * r * a * s1


@kernel
def P_of(s1, p):
    m, r, a, I1, I3 = p[0], p[1], p[3], p[4], p[5]
    return I1 * I3 + m * r * r * I1 * (1.0 - s1 * s1) + m * I3 * (a + r * s1) ** 2


@kernel
def _dP(s1, p):
    m, r, a, I1, I3 = p[0], p[1], p[3], p[4], p[5]
    return -2.0 * m * r * r * I1 * s1 + 2.0 * m * I3 * r * (a + r * s1)


@kernel
def _n3(s1, p):
    # numerator of h3 / sigma4
    m, r, a, I3 = p[0], p[1], p[3], p[5]
    return -I3 * (I3 + m * r * r + m * r * a * s1)


@kernel
def _n4(s1, p):
    m, r, a, I1, I3 = p[0], p[1], p[3], p[4], p[5]
    return m * r * (I1 * r * s1 - I3 * (a + r * s1))


@kernel
def _sigma2_drive(s1, s3, s4, s5, p):
    # T * d(sigma2)/dt
    m, r, g, a, I1, I3 = p[0], p[1], p[2], p[3], p[4], p[5]
    return ((I3 + m * r * r + m * r * a * s1) * s3 * s4 - m * g * a * (1.0 - s1 * s1)
            - s5 * (m * r * a + (I1 + m * a * a + m * r * r) * s1 + m * r * a * s1 * s1))


def rhs5(x, p):
    m, r, g, a, I1, I3 = p[0], p[1], p[2], p[3], p[4], p[5]
    s1, s2, s3, s4, s5 = x[0], x[1], x[2], x[3], x[4]
    T = T_of(s1, p)
    P = P_of(s1, p)
    c3 = I3 + m * r * r + m * r * a * s1
    d2 = _sigma2_drive(s1, s3, s4, s5, p) / T
    d3 = -I3 * s2 * s4 * c3 / P
    d4 = -m * r * s2 * s4 * (I3 * a + r * (I3 - I1) * s1) / P
    d5 = (-2.0 * m * r * a * s2 * s5 - 2.0 * m * g * a * s2
          - 2.0 * m * r * r * (I3 - I1) * c3 * s2 * s3 * s4 / P) / T
    return np.array((s2, d2, d3, d4, d5))


def rhs4(x, p):
    m, r, g, a, I1, I3 = p[0], p[1], p[2], p[3], p[4], p[5]
    s1, s2, s3, s4 = x[0], x[1], x[2], x[3]
    T = T_of(s1, p)
    P = P_of(s1, p)
    s5 = (s2 * s2 + s3 * s3) / (1.0 - s1 * s1)
    d2 = _sigma2_drive(s1, s3, s4, s5, p) / T
    d3 = -I3 * s2 * s4 * (I3 + m * r * r + m * r * a * s1) / P
    d4 = -m * r * s2 * s4 * (I3 * a + r * (I3 - I1) * s1) / P
    return np.array((s2, d2, d3, d4))


def guard5(x, p):
    return (T_of(x[0], p) > 0.0) & (P_of(x[0], p) > 0.0)


def guard4(x, p):
    return (np.abs(x[0]) < 1.0) & (T_of(x[0], p) > 0.0) & (P_of(x[0], p) > 0.0)


def _e_common(x, p):
    m, r, g, a, I3 = p[0], p[1], p[2], p[3], p[5]
    s1, s3, s4 = x[0], x[2], x[3]
    w = s3 + s1 * s4
    return 0.5 * ((I3 + m * r * r) * s4 * s4 - m * r * r * w * w) + m * a * (g * s1 - r * s3 * s4)


def _e_common_grad(x, p):
    m, r, g, a, I3 = p[0], p[1], p[2], p[3], p[5]
    s1, s3, s4 = x[0], x[2], x[3]
    w = s3 + s1 * s4
    return (-m * r * r * w * s4 + m * a * g,
            -m * r * r * w - m * a * r * s4,
            (I3 + m * r * r) * s4 - m * r * r * w * s1 - m * a * r * s3)


def energy5(x, p):
    return 0.5 * T_of(x[0], p) * x[4] + _e_common(x, p)


def energy5_grad(x, p):
    m, r, a = p[0], p[1], p[3]
    c1, c3, c4 = _e_common_grad(x, p)
    return (c1 + m * r * a * x[4], 0.0 * x[0], c3, c4, 0.5 * T_of(x[0], p))


def energy4(x, p):
    u = 1.0 - x[0] ** 2
    q = (x[1] ** 2 + x[2] ** 2) / u
    return 0.5 * T_of(x[0], p) * q + _e_common(x, p)


def energy4_grad(x, p):
    m, r, a = p[0], p[1], p[3]
    s1 = x[0]
    u = 1.0 - s1 * s1
    q = (x[1] ** 2 + x[2] ** 2) / u
    T = T_of(s1, p)
    c1, c3, c4 = _e_common_grad(x, p)
    return (c1 + 0.5 * (2.0 * m * r * a * q + T * 2.0 * s1 * q / u),
            T * x[1] / u, c3 + T * x[2] / u, c4)


# -- Pfaffian data on (x1, x3, x4) ------------------------------------------

def h3(y, p):
    return _n3(y[0], p) * y[2] / P_of(y[0], p)


def h3_grad(y, p):
    m, r, a, I3 = p[0], p[1], p[3], p[5]
    P = P_of(y[0], p)
    dn = -I3 * m * r * a
    return (y[2] * (dn * P - _n3(y[0], p) * _dP(y[0], p)) / (P * P), 0.0 * y[0],
            _n3(y[0], p) / P)


def h4(y, p):
    return _n4(y[0], p) * y[2] / P_of(y[0], p)


def h4_grad(y, p):
    m, r, I1, I3 = p[0], p[1], p[4], p[5]
    P = P_of(y[0], p)
    dn = m * r * (I1 * r - I3 * r)
    return (y[2] * (dn * P - _n4(y[0], p) * _dP(y[0], p)) / (P * P), 0.0 * y[0],
            _n4(y[0], p) / P)


def coefficient_matrix(s1, p):
    P = P_of(s1, p)
    return np.array([[0.0, _n3(s1, p) / P], [0.0, _n4(s1, p) / P]])


# -- multipliers ------------------------------------------------------------

def f5(x, p):
    return 1.0 / T_of(x[0], p)


def f5_grad(x, p):
    m, r, a = p[0], p[1], p[3]
    T = T_of(x[0], p)
    z = 0.0 * x[0]
    return (-2.0 * m * r * a / (T * T), z, z, z, z)


def lambda12(x, p):
    return (1.0 - x[0] ** 2) / T_of(x[0], p)


def lambda12_grad(x, p):
    m, r, a = p[0], p[1], p[3]
    s1 = x[0]
    T = T_of(s1, p)
    z = 0.0 * s1
    return ((-2.0 * s1 * T - (1.0 - s1 * s1) * 2.0 * m * r * a) / (T * T), z, z, z)


def jellet_integrals(params, x):
    """Jellet's integral ``j`` and ``k = sigma4 sqrt(P(sigma1))``."""
    prm = params_from(RouthSphereParams, params)
    p = prm.vector()
    x = np.asarray(x, dtype=float)
    s1, s3, s4 = x[..., 0], x[..., 2], x[..., 3]
    j = prm.I1 * prm.r * s3 + prm.I3 * (prm.offset_a + prm.r * s1) * s4
    k = s4 * np.sqrt(P_of(s1, p))
    return j, k


def _sampler(dim):
    def sample(rng, n):
        pts = rng.uniform(-1.0, 1.0, size=(n, dim))
        pts[:, 0] *= 0.95
        if dim == 5:
            pts[:, 4] = rng.uniform(0.0, 2.0, size=n)
        return pts
    return sample


def make(params, variant):
    prm = params_from(RouthSphereParams, params)
    p = prm.vector()
    pf = PfaffianSpec(kernel_scalar(h3, h3_grad, p, 3, name="h3"),
                      kernel_scalar(h4, h4_grad, p, 3, name="h4"))
    extras = {"coefficient_matrix": coefficient_matrix, "x1_domain": (-1.0, 1.0, True)}
    if variant == "reduced4":
        g = batch_guard(guard4, p)
        return SystemSpec(
            name="routh_sphere", variant=variant, dim=4, params=prm,
            coords=("sigma1", "sigma2", "sigma3", "sigma4"), pvec=p,
            rhs_kernel=rhs4, guard_kernel=guard4,
            vf=kernel_vector(rhs4, p, 4, guard=g, name="X"),
            energy=kernel_scalar(energy4, energy4_grad, p, 4, guard=g, name="E"),
            pfaffian=pf,
            multiplier=kernel_scalar(lambda12, lambda12_grad, p, 4, guard=g, name="Lambda12"),
            sampler=_sampler(4), extras=extras,
        )
    phi = orbit_constraint(p)
    g = batch_guard(guard5, p)
    return SystemSpec(
        name="routh_sphere", variant=variant, dim=5, params=prm,
        coords=("sigma1", "sigma2", "sigma3", "sigma4", "sigma5"), pvec=p,
        rhs_kernel=rhs5, guard_kernel=guard5,
        vf=kernel_vector(rhs5, p, 5, guard=g, name="X"),
        energy=kernel_scalar(energy5, energy5_grad, p, 5, guard=g, name="E"),
        pfaffian=PfaffianSpec(pf.h3, pf.h4, phi),
        multiplier=kernel_scalar(f5, f5_grad, p, 5, guard=g, name="f"),
        phi=phi,
        singular_fixtures=(np.array([1.0, 0.0, 0.0, 1.0, 0.0]),
                           np.array([-1.0, 0.0, 0.0, 1.0, 0.0])),
        sampler=_sampler(5),
        extras=dict(extras, project=project_to_chart, lift=lift_to_variety),
    )
