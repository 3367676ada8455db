"""A ball rolling inside a vertical cylinder (reduced to R^4; no 5-dim chart).

Parameter vector: ``p = [m, r, g, M, rho, alpha_in]``.  The state is
``(sigma1, sigma2, sigma3, sigma4) = (z, ..., ..., omega3)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..multivec import BivectorField, constant
from ..pfaff import PfaffianSpec, build_r4
from .base import (SystemSpec, batch_guard, kernel_scalar, kernel_vector, params_from,
                   require_positive)

FALLING_THRESHOLD = 1e-14


@dataclass(frozen=True)
class CylinderParams:
    m: float = 1.0
    r: float = 0.2
    g: float = 9.81
    M: float = 0.016
    rho: float = 1.0

    def validate(self):
        require_positive(self, "m", "r", "g", "M", "rho")
        if not self.rho > self.r:
            raise ConfigError("parameter rho must exceed r")

    @property
    def alpha_in(self) -> float:
        return (self.M + self.m * self.r ** 2) / self.r ** 2

    def constants(self, sigma4):
        """``(nu1, nu2, sigma_g)`` for a given spin ``sigma4``."""
        nu1 = self.r * np.asarray(sigma4, dtype=float) / self.rho
        nu2 = self.M * nu1 / (self.alpha_in * self.r ** 2)
        return nu1, nu2, self.m * self.g / (self.alpha_in * self.r)

    def vector(self):
        return np.array([self.m, self.r, self.g, self.M, self.rho, self.alpha_in])


def rhs(x, p):
    m, r, g, M, rho, al = p[0], p[1], p[2], p[3], p[4], p[5]
    s2, s3, s4 = x[1], x[2], x[3]
    return np.array((-r * s2, M * s4 * s3 / (al * r * rho) + m * g / (al * r),
                     -(r / rho) * s4 * s2, 0.0 * s2))


def guard(x, p):
    return x[0] == x[0]


def energy(x, p):
    m, r, g, M = p[0], p[1], p[2], p[3]
    return 0.5 * (m * r * r * (x[1] ** 2 + x[3] ** 2) + M * (x[1] ** 2 + x[2] ** 2 + x[3] ** 2)) \
        + m * g * x[0]


def energy_grad(x, p):
    m, r, g, M = p[0], p[1], p[2], p[3]
    return (0.0 * x[0] + m * g, (m * r * r + M) * x[1], M * x[2], (m * r * r + M) * x[3])


def _h3(y, p):
    return y[2] / p[4]


def _h3_grad(y, p):
    z = 0.0 * y[0]
    return (z, z, z + 1.0 / p[4])


def _h4(y, p):
    return 0.0 * y[0]


def _h4_grad(y, p):
    z = 0.0 * y[0]
    return (z, z, z)


def coefficient_matrix(s1, p):
    return np.array([[0.0, 1.0 / p[4]], [0.0, 0.0]])


def _sample(rng, n):
    return rng.uniform(-1.0, 1.0, size=(n, 4))


def lambda1(params) -> BivectorField:
    """``(1/(alpha r^2)) d2 ^ (r d1 + (r sigma4/rho) d3)`` as a Pfaffian bivector."""
    prm = params_from(CylinderParams, params)
    p = prm.vector()
    pf = PfaffianSpec(kernel_scalar(_h3, _h3_grad, p, 3, name="h3"),
                      kernel_scalar(_h4, _h4_grad, p, 3, name="h4"))
    L = build_r4(pf, constant(-1.0 / (prm.alpha_in * prm.r), 4))
    L.name = "Lambda1"
    return L


def lambda2(params) -> BivectorField:
    """``-(1/mg) d1 ^ X``."""
    prm = params_from(CylinderParams, params)
    p = prm.vector()
    m, r, g, M, rho, al = p

    def w12(x, p):
        return -(M * x[3] * x[2] / (al * r * rho) + m * g / (al * r)) / (m * g)

    def w12_grad(x, p):
        z = 0.0 * x[0]
        c = -M / (al * r * rho * m * g)
        return (z, z, c * x[3], c * x[2])

    def w13(x, p):
        return r * x[3] * x[1] / (rho * m * g)

    def w13_grad(x, p):
        z = 0.0 * x[0]
        c = r / (rho * m * g)
        return (z, c * x[3], z, c * x[1])

    return BivectorField({(0, 1): kernel_scalar(w12, w12_grad, p, 4, name="W12"),
                          (0, 2): kernel_scalar(w13, w13_grad, p, 4, name="W13")}, 4,
                         name="Lambda2")


def cylinder_pencil(params, lam: float) -> BivectorField:
    """``(1 - lam) Lambda1 + lam Lambda2``."""
    lam = float(lam)
    return lambda1(params) * (1.0 - lam) + lambda2(params) * lam


def cylinder_casimirs(params, x):
    """``(c1, c2, c3)``: ``dc1, dc2`` span the kernel of ``Lambda1`` and
    ``dc1, dc3`` that of ``Lambda2``."""
    prm = params_from(CylinderParams, params)
    x = np.asarray(x, dtype=float)
    s1, s2, s3, s4 = (x[..., i] for i in range(4))
    al, r, rho = prm.alpha_in, prm.r, prm.rho
    c1 = s4 + 0.0 * s1
    c2 = s3 - s4 * s1 / rho
    c3 = (r * s4 / rho) * s2 ** 2 + (prm.M * s4 * s3 / (al * r * rho) + 2.0 * prm.m * prm.g
                                     / (al * r)) * s3
    return c1, c2, c3


def c3_as_printed(params, x):
    """The third function with ``mg/(alpha r)`` in place of ``2 mg/(alpha r)``; not conserved."""
    prm = params_from(CylinderParams, params)
    x = np.asarray(x, dtype=float)
    s2, s3, s4 = x[..., 1], x[..., 2], x[..., 3]
    al, r, rho = prm.alpha_in, prm.r, prm.rho
    return (r * s4 / rho) * s2 ** 2 + (prm.M * s4 * s3 / (al * r * rho)
                                       + prm.m * prm.g / (al * r)) * s3


def casimir_remix(params, x, lam: float):
    """``c2_lam = (1-lam) E - alpha r^2 c3`` and ``c3_lam = lam r sigma4 E / rho + m g r c2``."""
    prm = params_from(CylinderParams, params)
    x = np.asarray(x, dtype=float)
    E = energy(np.moveaxis(x, -1, 0), prm.vector())
    c1, c2, c3 = cylinder_casimirs(prm, x)
    c2l = (1.0 - lam) * E - prm.alpha_in * prm.r ** 2 * c3
    c3l = lam * prm.r * x[..., 3] * E / prm.rho + prm.m * prm.g * prm.r * c2
    return c2l, c3l


def casimir_fields(params):
    """``(c1, c2, c3)`` as scalar fields with analytic gradients."""
    prm = params_from(CylinderParams, params)
    p = prm.vector()
    m, r, g, M, rho, al = p

    def c1(x, p):
        return x[3]

    def c1g(x, p):
        z = 0.0 * x[0]
        return (z, z, z, z + 1.0)

    def c2(x, p):
        return x[2] - x[3] * x[0] / rho

    def c2g(x, p):
        z = 0.0 * x[0]
        return (-x[3] / rho, z, z + 1.0, -x[0] / rho)

    def c3(x, p):
        return cylinder_casimirs(prm, np.moveaxis(np.asarray(x), 0, -1))[2]

    def c3g(x, p):
        s2, s3, s4 = x[1], x[2], x[3]
        k = M / (al * r * rho)
        return (0.0 * s2, 2.0 * (r * s4 / rho) * s2,
                2.0 * k * s4 * s3 + 2.0 * m * g / (al * r),
                (r / rho) * s2 ** 2 + k * s3 ** 2)

    return (kernel_scalar(c1, c1g, p, 4, name="c1"), kernel_scalar(c2, c2g, p, 4, name="c2"),
            kernel_scalar(c3, c3g, p, 4, name="c3"))


# -- closed-form flow ---------------------------------------------------------

def cylinder_analytic(params, x0, t):
    """The exact reduced flow from ``x0`` at time(s) ``t``.

    The trigonometric solution is written with ``sin(w t)/w`` and
    ``2 sin(w t/2)**2 / w**2`` (``w = sqrt(nu1 nu2)``), which equals the
    textbook form and stays accurate as ``w -> 0``; ``|sigma4| < 1e-14`` uses
    the falling-motion formulas.
    """
    prm = params_from(CylinderParams, params)
    x0 = np.asarray(x0, dtype=float)
    t = np.asarray(t, dtype=float)
    s10, s20, s30, s40 = x0
    nu1, nu2, sg = prm.constants(s40)
    r = prm.r
    if abs(s40) < FALLING_THRESHOLD:
        s1 = s10 - r * s20 * t - 0.5 * r * sg * t ** 2
        s2 = s20 + sg * t
        s3 = s30 + 0.0 * t
    else:
        w = np.sqrt(nu1 * nu2)
        dsp = nu2 * s30 + sg  # sigma2'(0)
        S = np.sin(w * t) / w
        C = 2.0 * np.sin(0.5 * w * t) ** 2 / w ** 2
        s1 = s10 - r * (dsp * C + s20 * S)
        s2 = s20 * np.cos(w * t) + dsp * S
        s3 = s30 - nu1 * (dsp * C + s20 * S)
    s4 = s40 + 0.0 * t
    return np.stack([s1, s2, s3, s4], axis=-1)


def period(params, sigma4):
    """``2 pi / sqrt(nu1 nu2)`` (infinite for the falling branch)."""
    prm = params_from(CylinderParams, params)
    nu1, nu2, _ = prm.constants(sigma4)
    w = float(np.sqrt(nu1 * nu2))
    return np.inf if w == 0.0 else 2.0 * np.pi / w


def cylinder_reconstruct(params, x0, theta0, t):
    """``(omega1, omega2, omega3, theta, z)`` of the unreduced motion."""
    prm = params_from(CylinderParams, params)
    sig = cylinder_analytic(prm, x0, t)
    nu1, _, _ = prm.constants(x0[3])
    th = theta0 - nu1 * np.asarray(t, dtype=float)
    s1, s2, s3, s4 = (sig[..., i] for i in range(4))
    w1 = s2 * np.sin(th) - s3 * np.cos(th)
    w2 = -s2 * np.cos(th) - s3 * np.sin(th)
    return w1, w2, s4, th, s1


def reduce_state(omega1, omega2, omega3, theta, z):
    """The invariants ``(sigma1..sigma4)`` of an unreduced state."""
    return np.stack([np.asarray(z, dtype=float), -omega2 * np.cos(theta) + omega1 * np.sin(theta),
                     -omega1 * np.cos(theta) - omega2 * np.sin(theta),
                     np.asarray(omega3, dtype=float)], axis=-1)


def unreduced_rhs(params, state):
    """Right-hand side of the unreduced equations in ``(omega1, omega2, omega3, theta, z)``."""
    prm = params_from(CylinderParams, params)
    w1, w2, w3, th, z = state
    m, r, g, al, rho = prm.m, prm.r, prm.g, prm.alpha_in, prm.rho
    drive = (m / al) * (g / r + (r / rho) * w3 * (w1 * np.cos(th) + w2 * np.sin(th)))
    return np.array([drive * np.sin(th), -drive * np.cos(th), 0.0 * w3, -(r / rho) * w3,
                     r * (w2 * np.cos(th) - w1 * np.sin(th))])


def unreduced_energy(params, state):
    prm = params_from(CylinderParams, params)
    w1, w2, w3, th, z = state
    a = w1 * np.cos(th) + w2 * np.sin(th)
    return 0.5 * ((prm.M + prm.m * prm.r ** 2) * (w1 ** 2 + w2 ** 2 + w3 ** 2)
                  - prm.m * prm.r ** 2 * a ** 2) + prm.m * prm.g * z


def make(params, variant):
    if variant != "reduced4":
        from ..errors import UnsupportedVariantError
        raise UnsupportedVariantError("the cylinder system has only the reduced4 variant")
    prm = params_from(CylinderParams, params)
    p = prm.vector()
    g = batch_guard(guard, p)
    L1 = lambda1(prm)
    pf = PfaffianSpec(kernel_scalar(_h3, _h3_grad, p, 3, name="h3"),
                      kernel_scalar(_h4, _h4_grad, p, 3, name="h4"))
    return SystemSpec(
        name="cylinder", variant=variant, dim=4, params=prm,
        coords=("sigma1", "sigma2", "sigma3", "sigma4"), pvec=p,
        rhs_kernel=rhs, guard_kernel=guard,
        vf=kernel_vector(rhs, p, 4, guard=g, name="X"),
        energy=kernel_scalar(energy, energy_grad, p, 4, guard=g, name="E"),
        pfaffian=pf,
        multiplier=constant(-1.0 / (prm.alpha_in * prm.r), 4),
        sampler=_sample,
        extras={"coefficient_matrix": coefficient_matrix, "x1_domain": (-np.inf, np.inf, True),
                "Lambda1": L1, "Lambda2": lambda2(prm)},
    )
