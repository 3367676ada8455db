"""A ball rolling on a surface of revolution ``z = phi(rho)`` with an even
profile, in the invariants p1..p5 (or p1..p4 on the chart p1 > 0).

Everything is written through ``s = 2 p1 = rho**2`` and the smooth profile
functions of :mod:`profiles`, so the vertex ``p1 = 0`` is a regular point of
every formula.  With ``w = 1 + phi'**2 = 1 + s q1**2``:

* ``phi''/(1 + phi'**2) = (q1 + s q3) / w``
* ``(phi''/(1 + phi'**2) - phi'/rho) / s = (q3 - q1**3) / w``

Parameter vector: ``p = [m, r, g, M, alpha_in, K, kind, c2, c4, printed]``
with ``K = M / (alpha_in r**2)``.  ``printed = 1`` switches the denominators of
the p2 and p5 equations to ``1 + phi'`` (kept only to show that this reading
breaks Hamiltonianity).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._accel import kernel
from ..errors import ConfigError
from ..pfaff import PfaffianSpec
from . import profiles
from .base import (SystemSpec, batch_guard, kernel_scalar, kernel_vector, params_from,
                   require_positive)
from .profiles import Profile, profile_eval

DENOMINATORS = ("squared", "printed")


@dataclass(frozen=True)
class SurfaceBallParams:
    m: float = 1.0
    r: float = 0.5
    g: float = 9.81
    M: float = 0.1
    profile: Profile = field(default_factory=lambda: profiles.paraboloid(0.5))
    denominator: str = "squared"

    def __post_init__(self):
        object.__setattr__(self, "profile", profiles.from_config(self.profile))

    def validate(self):
        require_positive(self, "m", "r", "g", "M")
        if self.denominator not in DENOMINATORS:
            raise ConfigError(f"denominator must be one of {DENOMINATORS}")

    @property
    def alpha_in(self) -> float:
        return (self.M + self.m * self.r ** 2) / self.r ** 2

    def vector(self):
        a = self.alpha_in
        return np.array([self.m, self.r, self.g, self.M, a, self.M / (a * self.r ** 2),
                         self.profile.code, self.profile.c2, self.profile.c4,
                         1.0 if self.denominator == "printed" else 0.0])


@kernel
def _prof(x, p):
    return profile_eval(2.0 * x[0], p[6], p[7], p[8])


@kernel
def _den(s, q1, w, p):
    # 1 + phi'^2, or 1 + phi' when the printed reading is requested
    return w + p[9] * (1.0 + np.sqrt(np.maximum(s, 0.0)) * q1 - w)


@kernel
def _rhs5_core(x, p, phi, q1, q3):
    m, g, al, K = p[0], p[2], p[4], p[5]
    p1, p2, p3, p4, p5 = x[0], x[1], x[2], x[3], x[4]
    s = 2.0 * p1
    w = 1.0 + s * q1 * q1
    den = _den(s, q1, w, p)
    d2 = (-K * p3 * p4 * q1 - (m * g / al) * s * q1 + 2.0 * p5 - p2 * p2 * q1 * s * q3) / den
    d3 = K * p2 * p4 * (q1 + s * q3) / w
    d4 = -p2 * p3 * (q3 - q1 * q1 * q1) / w
    d5 = (p2 / den) * ((K * p3 * p4 - p2 * p2 * q1) * q3 - (m * g / al) * q1
                       - 2.0 * p5 * q1 * q1)
    return np.array((p2, d2, d3, d4, d5))


@kernel
def _rhs4_core(x, p, phi, q1, q3):
    m, g, al, K = p[0], p[2], p[4], p[5]
    p1, p2, p3, p4 = x[0], x[1], x[2], x[3]
    s = 2.0 * p1
    w = 1.0 + s * q1 * q1
    den = _den(s, q1, w, p)
    d2 = (-K * p3 * p4 * q1 - (m * g / al) * s * q1 + (p2 * p2 + p3 * p3) / s
          - p2 * p2 * q1 * s * q3) / den
    d3 = K * p2 * p4 * (q1 + s * q3) / w
    d4 = -p2 * p3 * (q3 - q1 * q1 * q1) / w
    return np.array((p2, d2, d3, d4))


def rhs5(x, p):
    phi, q1, q3, q3s = _prof(x, p)
    return _rhs5_core(x, p, phi, q1, q3)


def rhs4(x, p):
    phi, q1, q3, q3s = _prof(x, p)
    return _rhs4_core(x, p, phi, q1, q3)


def guard5(x, p):
    return x[0] >= 0.0


def guard4(x, p):
    return x[0] > 0.0


# -- energies ---------------------------------------------------------------

def _energy5(x, p, prof):
    phi, q1, q3, q3s = prof
    m, r, g, M, al = p[0], p[1], p[2], p[3], p[4]
    return (M / (2.0 * r * r)) * x[3] ** 2 + al * x[4] + 0.5 * al * q1 * q1 * x[1] ** 2 + m * g * phi


def _energy5_grad(x, p, prof):
    phi, q1, q3, q3s = prof
    m, r, g, M, al = p[0], p[1], p[2], p[3], p[4]
    z = 0.0 * x[0]
    return (al * q1 * q3 * x[1] ** 2 + m * g * q1, al * q1 * q1 * x[1], z,
            (M / (r * r)) * x[3], z + al)


def _energy4(x, p, prof):
    phi, q1, q3, q3s = prof
    m, r, g, M, al = p[0], p[1], p[2], p[3], p[4]
    s = 2.0 * x[0]
    return ((M / (2.0 * r * r)) * x[3] ** 2 + al * (x[1] ** 2 + x[2] ** 2) / (2.0 * s)
            + 0.5 * al * q1 * q1 * x[1] ** 2 + m * g * phi)


def _energy4_grad(x, p, prof):
    phi, q1, q3, q3s = prof
    m, r, g, M, al = p[0], p[1], p[2], p[3], p[4]
    s = 2.0 * x[0]
    kin = x[1] ** 2 + x[2] ** 2
    return (al * q1 * q3 * x[1] ** 2 + m * g * q1 - al * kin / (s * s),
            al * x[1] / s + al * q1 * q1 * x[1], al * x[2] / s, (M / (r * r)) * x[3])


# -- Pfaffian data on (p1, p3, p4) ------------------------------------------

def _h3(y, p, prof):
    phi, q1, q3, q3s = prof
    s = 2.0 * y[0]
    return p[5] * y[2] * (q1 + s * q3) / (1.0 + s * q1 * q1)


def _h3_grad(y, p, prof):
    phi, q1, q3, q3s = prof
    K = p[5]
    s = 2.0 * y[0]
    w = 1.0 + s * q1 * q1
    A = q1 + s * q3
    dA = 3.0 * q3 + 2.0 * s * q3s
    dw = 2.0 * (q1 * q1 + s * q1 * q3)
    return (K * y[2] * (dA * w - A * dw) / (w * w), 0.0 * y[0], K * A / w)


def _h4(y, p, prof):
    phi, q1, q3, q3s = prof
    s = 2.0 * y[0]
    return -y[1] * (q3 - q1 ** 3) / (1.0 + s * q1 * q1)


def _h4_grad(y, p, prof):
    phi, q1, q3, q3s = prof
    s = 2.0 * y[0]
    w = 1.0 + s * q1 * q1
    B = q3 - q1 ** 3
    dB = 2.0 * q3s - 3.0 * q1 * q1 * q3
    dw = 2.0 * (q1 * q1 + s * q1 * q3)
    return (-y[1] * (dB * w - B * dw) / (w * w), -B / w, 0.0 * y[0])


# -- multipliers --------------------------------------------------------------

def _f5(x, p, prof):
    q1 = prof[1]
    return 1.0 / (2.0 * p[4] * (1.0 + 2.0 * x[0] * q1 * q1))


def _f5_grad(x, p, prof):
    phi, q1, q3, q3s = prof
    s = 2.0 * x[0]
    w = 1.0 + s * q1 * q1
    dw = 2.0 * (q1 * q1 + s * q1 * q3)
    z = 0.0 * x[0]
    return (-dw / (2.0 * p[4] * w * w), z, z, z, z)


def _lambda12(x, p, prof):
    q1 = prof[1]
    s = 2.0 * x[0]
    return s / (p[4] * (1.0 + s * q1 * q1))


def _lambda12_grad(x, p, prof):
    phi, q1, q3, q3s = prof
    s = 2.0 * x[0]
    w = 1.0 + s * q1 * q1
    dw = 2.0 * (q1 * q1 + s * q1 * q3)
    z = 0.0 * x[0]
    return ((2.0 * w - s * dw) / (p[4] * w * w), z, z, z)


def orbit_phi(x, p):
    return x[1] ** 2 + x[2] ** 2 - 4.0 * x[0] * x[4]


def orbit_phi_grad(x, p):
    return (-4.0 * x[4], 2.0 * x[1], 2.0 * x[2], 0.0 * x[0], -4.0 * x[0])


def orbit_phi_hess(x, p):
    z = 0.0 * x[0]
    return ((z, z, z, z, z - 4.0),
            (z, z + 2.0, z, z, z),
            (z, z, z + 2.0, z, z),
            (z, z, z, z, z),
            (z - 4.0, z, z, z, z))


def coefficient_matrix_factory(profile: Profile, p):
    def coefficient_matrix(p1, _p=None):
        phi, q1, q3, q3s = profile.evaluate(2.0 * p1)
        s = 2.0 * p1
        w = 1.0 + s * q1 * q1
        return np.array([[0.0, p[5] * (q1 + s * q3) / w], [-(q3 - q1 ** 3) / w, 0.0]])
    return coefficient_matrix


def project_to_chart(x5):
    return np.asarray(x5)[..., :4]


def lift_to_variety(x4):
    x4 = np.asarray(x4, dtype=float)
    p5 = (x4[..., 1] ** 2 + x4[..., 2] ** 2) / (4.0 * x4[..., 0])
    return np.concatenate([x4, p5[..., None]], axis=-1)


def _sampler(dim):
    def sample(rng, n):
        pts = rng.uniform(-1.0, 1.0, size=(n, dim))
        pts[:, 0] = rng.uniform(0.02 if dim == 4 else 0.0, 1.5, size=n)
        if dim == 5:
            pts[:, 4] = rng.uniform(0.0, 2.0, size=n)
        return pts
    return sample


def _with_profile(fn, profile, axis=0):
    """Bind a kernel of the form ``fn(x, p, prof)`` to a profile."""
    def bound(x, p):
        return fn(x, p, profile.evaluate(2.0 * x[axis]))
    return bound


def make(params, variant):
    prm = params_from(SurfaceBallParams, params)
    p = prm.vector()
    prof = prm.profile
    if prof.builtin:
        r5, r4 = rhs5, rhs4
    else:
        def r5(x, p):
            return _rhs5_core(x, p, *prof.evaluate(2.0 * x[0])[:3])

        def r4(x, p):
            return _rhs4_core(x, p, *prof.evaluate(2.0 * x[0])[:3])
    b = lambda fn: _with_profile(fn, prof)  # noqa: E731
    pf = PfaffianSpec(kernel_scalar(b(_h3), b(_h3_grad), p, 3, name="h3"),
                      kernel_scalar(b(_h4), b(_h4_grad), p, 3, name="h4"))
    extras = {"coefficient_matrix": coefficient_matrix_factory(prof, p),
              "x1_domain": (0.0, np.inf, True), "alpha_in": prm.alpha_in}
    if variant == "reduced4":
        g = batch_guard(guard4, p)
        return SystemSpec(
            name="surface_ball", variant=variant, dim=4, params=prm,
            coords=("p1", "p2", "p3", "p4"), pvec=p,
            rhs_kernel=r4, guard_kernel=guard4,
            vf=kernel_vector(r4, p, 4, guard=g, name="X"),
            energy=kernel_scalar(b(_energy4), b(_energy4_grad), p, 4, guard=g, name="E"),
            pfaffian=pf,
            multiplier=kernel_scalar(b(_lambda12), b(_lambda12_grad), p, 4, guard=g,
                                     name="Lambda12"),
            jit_ok=prof.builtin, sampler=_sampler(4), extras=extras,
        )
    phi = kernel_scalar(orbit_phi, orbit_phi_grad, p, 5, hess=orbit_phi_hess, name="phi")
    g = batch_guard(guard5, p)
    return SystemSpec(
        name="surface_ball", variant=variant, dim=5, params=prm,
        coords=("p1", "p2", "p3", "p4", "p5"), pvec=p,
        rhs_kernel=r5, guard_kernel=guard5,
        vf=kernel_vector(r5, p, 5, guard=g, name="X"),
        energy=kernel_scalar(b(_energy5), b(_energy5_grad), p, 5, guard=g, name="E"),
        pfaffian=PfaffianSpec(pf.h3, pf.h4, phi),
        multiplier=kernel_scalar(b(_f5), b(_f5_grad), p, 5, guard=g, name="f"),
        phi=phi, jit_ok=prof.builtin,
        singular_fixtures=(np.array([0.0, 0.0, 0.0, 1.3, 0.0]),
                           np.array([0.0, 0.0, 0.0, -0.5, 0.0])),
        sampler=_sampler(5),
        extras=dict(extras, project=project_to_chart, lift=lift_to_variety),
    )
