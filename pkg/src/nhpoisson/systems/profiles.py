"""Even surface profiles ``phi(rho)`` for the ball on a surface of revolution.

The equations use the profile only through ``s = rho**2 = 2 p1`` and the
smooth functions

    q1(s) = phi'(rho) / rho,    q3(s) = (phi''(rho) - q1) / s,

plus ``phi`` itself and ``dq3/ds``.  For an even profile all four extend
smoothly to ``s = 0``; ``dq1/ds = q3 / 2`` and ``dphi/ds = q1 / 2``.

Built-in profiles are encoded as ``(kind, c2, c4)`` so the evaluation kernel
can run under numba.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import _accel
from ..errors import ConfigError

KIND_POLY = 0.0
KIND_COSH = 1.0

_NSERIES = 14
# series coefficients in s for the cosh profile
_PHI_C = np.array([0.0] + [1.0 / math.factorial(2 * k) for k in range(1, _NSERIES)])
_Q1_C = np.array([1.0 / math.factorial(2 * k + 1) for k in range(_NSERIES)])
_Q3_C = np.array([2.0 * k / math.factorial(2 * k + 1) for k in range(1, _NSERIES + 1)])
_Q3S_C = np.array([(k - 1) * 2.0 * k / math.factorial(2 * k + 1) for k in range(2, _NSERIES + 2)])


@_accel.kernel
def _horner(c, s):
    acc = 0.0 * s
    for i in range(c.shape[0] - 1, -1, -1):
        acc = acc * s + c[i]
    return acc


@_accel.kernel
def _cosh_closed(s):
    rho = np.sqrt(s)
    ch = np.cosh(rho)
    sh = np.sinh(rho)
    phi = ch - 1.0
    q1 = sh / rho
    g = ch - q1
    q3 = g / s
    gp = sh - ch / rho + sh / s
    q3s = (gp * rho - 2.0 * g) / (2.0 * s * s)
    return phi, q1, q3, q3s


def profile_eval(s, kind, c2, c4):
    """``(phi, q1, q3, dq3/ds)`` at ``s`` for a built-in profile."""
    if kind == KIND_POLY:
        z = 0.0 * s
        return c2 * s + c4 * s * s, 2.0 * c2 + 4.0 * c4 * s, z + 8.0 * c4, z
    # cosh(rho) - 1, series near the vertex
    ss = np.minimum(s, 1.0)
    sl = np.maximum(s, 1.0)
    phi_l, q1_l, q3_l, q3s_l = _cosh_closed(sl)
    near = s < 1.0
    return (np.where(near, _horner(_PHI_C, ss), phi_l),
            np.where(near, _horner(_Q1_C, ss), q1_l),
            np.where(near, _horner(_Q3_C, ss), q3_l),
            np.where(near, _horner(_Q3S_C, ss), q3s_l))


def profile_eval_scalar(s, kind, c2, c4):
    """Scalar twin of :func:`profile_eval` used inside compiled kernels."""
    if kind == KIND_POLY:
        return c2 * s + c4 * s * s, 2.0 * c2 + 4.0 * c4 * s, 8.0 * c4, 0.0
    if s < 1.0:
        return (_horner(_PHI_C, s), _horner(_Q1_C, s), _horner(_Q3_C, s),
                _horner(_Q3S_C, s))
    return _cosh_closed(s)


@dataclass(frozen=True)
class Profile:
    """A surface profile.

    Built-in kinds are ``paraboloid`` (``c * rho**2``), ``quartic``
    (``c2 * rho**2 + c4 * rho**4``) and ``cosh`` (``cosh(rho) - 1``).  A
    ``custom`` profile carries Python callables for ``phi, phi', phi''`` and
    only runs on the numpy path.
    """

    kind: str
    c2: float = 0.0
    c4: float = 0.0
    funcs: tuple | None = None

    @property
    def code(self) -> float:
        return KIND_COSH if self.kind == "cosh" else KIND_POLY

    @property
    def builtin(self) -> bool:
        return self.kind != "custom"

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        if self.builtin:
            return profile_eval(s, self.code, self.c2, self.c4)
        return _custom_eval(self.funcs, s)

    def value(self, rho):
        """``phi(rho)`` in the original radial variable."""
        rho = np.asarray(rho, dtype=float)
        if not self.builtin:
            return self.funcs[0](rho)
        return self.evaluate(rho * rho)[0]


def paraboloid(c: float) -> Profile:
    return Profile("paraboloid", c2=float(c))


def quartic(c2: float, c4: float) -> Profile:
    return Profile("quartic", c2=float(c2), c4=float(c4))


def cosh_profile() -> Profile:
    return Profile("cosh")


_S_FLOOR = 1e-6


def _custom_eval(funcs, s):
    f0, f1, f2 = funcs

    def q1q3(sv):
        rho = np.sqrt(sv)
        q1 = f1(rho) / rho
        return q1, (f2(rho) - q1) / sv

    se = np.maximum(s, _S_FLOOR)
    q1, q3 = q1q3(se)
    h = 1e-4 * se
    q3s = (q1q3(se + h)[1] - q1q3(se - h)[1]) / (2.0 * h)
    return f0(np.sqrt(np.maximum(s, 0.0))), q1, q3, q3s


def custom(value: Callable, d1: Callable, d2: Callable, check_points=None) -> Profile:
    """A user-supplied profile, checked for evenness."""
    pts = np.linspace(0.05, 1.5, 12) if check_points is None else np.asarray(check_points)
    if abs(float(d1(np.array(0.0)))) > 1e-12:
        raise ConfigError("custom profile must satisfy phi'(0) = 0")
    odd = np.max(np.abs(value(pts) - value(-pts))) + np.max(np.abs(d1(pts) + d1(-pts)))
    if odd > 1e-10 * (1.0 + np.max(np.abs(value(pts)))):
        raise ConfigError("custom profile is not even")
    return Profile("custom", funcs=(value, d1, d2))


def from_config(table) -> Profile:
    """Build a profile from ``{kind = ..., c = ...}`` style mappings."""
    if isinstance(table, Profile):
        return table
    if not isinstance(table, dict) or "kind" not in table:
        raise ConfigError("profile must be a table with a 'kind' key")
    kind = table["kind"]
    extra = set(table) - {"kind", "c", "c2", "c4"}
    if extra:
        raise ConfigError(f"unknown profile key(s): {', '.join(sorted(extra))}")
    if kind == "paraboloid":
        if "c" not in table:
            raise ConfigError("paraboloid profile needs 'c'")
        return paraboloid(table["c"])
    if kind == "quartic":
        if "c2" not in table or "c4" not in table:
            raise ConfigError("quartic profile needs 'c2' and 'c4'")
        return quartic(table["c2"], table["c4"])
    if kind == "cosh":
        return cosh_profile()
    raise ConfigError(f"unknown profile kind {kind!r}")


if _accel.USE_NUMBA:
    _profile_scalar_jit = _accel.numba.njit(profile_eval_scalar)

    @_accel.overload(profile_eval)
    def _profile_eval_overload(s, kind, c2, c4):
        def impl(s, kind, c2, c4):
            return _profile_scalar_jit(s, kind, c2, c4)
        return impl
