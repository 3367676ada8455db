"""The rolling disk in the invariants sigma1..sigma5 (or sigma1..sigma4).

With ``u = 1 - sigma1**2`` and ``lam = 4 g / (5 r)``.  The mass only fixes
units and does not enter the reduced equations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._accel import safe_div
from ..multivec import constant
from ..pfaff import PfaffianSpec
from .base import (SystemSpec, batch_guard, kernel_scalar, kernel_vector, params_from,
                   require_positive)


@dataclass(frozen=True)
class DiskParams:
    m: float = 1.0
    r: float = 1.0
    g: float = 9.81

    def validate(self):
        require_positive(self, "m", "r", "g")

    @property
    def lam(self) -> float:
        return 0.8 * self.g / self.r


# -- vector fields --------------------------------------------------------

def rhs5(x, p):
    lam = p[0]
    s1, s2, s3, s4, s5 = x[0], x[1], x[2], x[3], x[4]
    u = 1.0 - s1 * s1
    su = np.sqrt(u)
    d2 = (1.2 * s3 * s4 - s1 * s5 + 0.8 * safe_div(s1 * s3 * s3, u) + lam * s1 * su)
    d3 = -2.0 * s2 * s4
    d4 = -safe_div((2.0 / 3.0) * s2 * s3, u)
    d5 = (safe_div(2.0 * lam * s1 * s2, su) + safe_div(1.6 * s1 * s2 * s3 * s3, u * u)
          - safe_div(1.6 * s2 * s3 * s4, u))
    return np.array((s2, d2, d3, d4, d5))


def rhs4(x, p):
    lam = p[0]
    s1, s2, s3, s4 = x[0], x[1], x[2], x[3]
    u = 1.0 - s1 * s1
    d2 = 1.2 * s3 * s4 - s1 * s2 * s2 / u - 0.2 * s1 * s3 * s3 / u + lam * s1 * np.sqrt(u)
    d3 = -2.0 * s2 * s4
    d4 = -(2.0 / 3.0) * s2 * s3 / u
    return np.array((s2, d2, d3, d4))


def guard5(x, p):
    a = np.abs(x[0])
    return (a < 1.0) | ((a == 1.0) & (x[1] == 0.0) & (x[2] == 0.0))


def guard4(x, p):
    return np.abs(x[0]) < 1.0


# -- energies -------------------------------------------------------------

def energy5(x, p):
    lam = p[0]
    u = 1.0 - x[0] ** 2
    return 0.5 * x[4] + 0.6 * x[3] ** 2 - 0.4 * safe_div(x[2] ** 2, u) + lam * np.sqrt(u)


def energy5_grad(x, p):
    lam = p[0]
    s1 = x[0]
    u = 1.0 - s1 * s1
    z = 0.0 * s1
    return (-0.8 * safe_div(s1 * x[2] ** 2, u * u) - safe_div(lam * s1, np.sqrt(u)),
            z, -0.8 * safe_div(x[2], u), 1.2 * x[3], z + 0.5)


def energy4(x, p):
    lam = p[0]
    u = 1.0 - x[0] ** 2
    return 0.5 * x[1] ** 2 / u + 0.1 * x[2] ** 2 / u + 0.6 * x[3] ** 2 + lam * np.sqrt(u)


def energy4_grad(x, p):
    lam = p[0]
    s1 = x[0]
    u = 1.0 - s1 * s1
    q = 0.5 * x[1] ** 2 + 0.1 * x[2] ** 2
    return (2.0 * s1 * q / (u * u) - lam * s1 / np.sqrt(u), x[1] / u, 0.2 * x[2] / u, 1.2 * x[3])


# -- Pfaffian data on (x1, x3, x4) ------------------------------------------

def h3(y, p):
    return -2.0 * y[2]


def h3_grad(y, p):
    z = 0.0 * y[0]
    return (z, z, z - 2.0)


def h4(y, p):
    return -safe_div((2.0 / 3.0) * y[1], 1.0 - y[0] ** 2)


def h4_grad(y, p):
    u = 1.0 - y[0] ** 2
    return (-safe_div((4.0 / 3.0) * y[0] * y[1], u * u), -(2.0 / 3.0) / u, 0.0 * y[0])


def coefficient_matrix(s1, p):
    """``A(sigma1)`` of the linear system d(sigma3, sigma4)/d sigma1 = A (sigma3, sigma4)."""
    u = 1.0 - s1 * s1
    return np.array([[0.0, -2.0], [-(2.0 / 3.0) / u, 0.0]])


# -- constraint and multipliers ---------------------------------------------

def orbit_phi(x, p):
    return x[1] ** 2 + x[2] ** 2 - (1.0 - x[0] ** 2) * x[4]


def orbit_phi_grad(x, p):
    return (2.0 * x[0] * x[4], 2.0 * x[1], 2.0 * x[2], 0.0 * x[0], x[0] ** 2 - 1.0)


def orbit_phi_hess(x, p):
    z = 0.0 * x[0]
    return ((z + 2.0 * x[4], z, z, z, 2.0 * x[0]),
            (z, z + 2.0, z, z, z),
            (z, z, z + 2.0, z, z),
            (z, z, z, z, z),
            (2.0 * x[0], z, z, z, z))


def lambda12(x, p):
    return 1.0 - x[0] ** 2


def lambda12_grad(x, p):
    z = 0.0 * x[0]
    return (-2.0 * x[0], z, z, z)


def project_to_chart(x5):
    """Drop sigma5 (points on the variety)."""
    return np.asarray(x5)[..., :4]


def lift_to_variety(x4):
    """Solve the constraint for sigma5."""
    x4 = np.asarray(x4, dtype=float)
    s5 = (x4[..., 1] ** 2 + x4[..., 2] ** 2) / (1.0 - x4[..., 0] ** 2)
    return np.concatenate([x4, s5[..., None]], axis=-1)


def _sampler(dim):
    def sample(rng, n):
        pts = rng.uniform(-1.0, 1.0, size=(n, dim))
        pts[:, 0] *= 0.95
        if dim == 5:
            pts[:, 4] = rng.uniform(0.0, 2.0, size=n)
        return pts
    return sample


def orbit_constraint(p):
    """The constraint ``phi`` shared by the disk and Routh's sphere."""
    return kernel_scalar(orbit_phi, orbit_phi_grad, p, 5, hess=orbit_phi_hess, name="phi")


def make(params, variant):
    prm = params_from(DiskParams, params)
    p = np.array([prm.lam])
    pf = PfaffianSpec(kernel_scalar(h3, h3_grad, p, 3, name="h3"),
                      kernel_scalar(h4, h4_grad, p, 3, name="h4"))
    if variant == "reduced4":
        g = batch_guard(guard4, p)
        return SystemSpec(
            name="disk", variant=variant, dim=4, params=prm,
            coords=("sigma1", "sigma2", "sigma3", "sigma4"), pvec=p,
            rhs_kernel=rhs4, guard_kernel=guard4,
            vf=kernel_vector(rhs4, p, 4, guard=g, name="X"),
            energy=kernel_scalar(energy4, energy4_grad, p, 4, guard=g, name="E"),
            pfaffian=pf,
            multiplier=kernel_scalar(lambda12, lambda12_grad, p, 4, guard=g, name="Lambda12"),
            sampler=_sampler(4),
            extras={"coefficient_matrix": coefficient_matrix, "x1_domain": (-1.0, 1.0, False)},
        )
    phi = orbit_constraint(p)
    g = batch_guard(guard5, p)
    return SystemSpec(
        name="disk", variant=variant, dim=5, params=prm,
        coords=("sigma1", "sigma2", "sigma3", "sigma4", "sigma5"), pvec=p,
        rhs_kernel=rhs5, guard_kernel=guard5,
        vf=kernel_vector(rhs5, p, 5, guard=g, name="X"),
        energy=kernel_scalar(energy5, energy5_grad, p, 5, guard=g, name="E"),
        pfaffian=PfaffianSpec(pf.h3, pf.h4, phi),
        multiplier=constant(1.0, 5),
        phi=phi,
        singular_fixtures=(np.array([1.0, 0.0, 0.0, 0.7, 0.0]),
                           np.array([-1.0, 0.0, 0.0, -0.4, 0.0])),
        sampler=_sampler(5),
        extras={"coefficient_matrix": coefficient_matrix, "x1_domain": (-1.0, 1.0, False),
                "project": project_to_chart, "lift": lift_to_variety},
    )
