"""The 2x2 linear system ``d(x3, x4)/dx1 = A(x1) (x3, x4)`` behind the implicit
first integrals.

Its fundamental matrix ``g`` (``dg/dx1 = A g``, ``g(x1_0) = I``) turns a state
into the Casimir values ``c = g(x1)^-1 (x3, x4)``.  The values depend on the
base point ``x1_0``; moving it remixes ``(c1, c2)`` by a constant matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _rk
from .errors import ContractError, ConvergenceError, DomainError

DEFAULT_TOL = 1e-10


class CoefficientCurve:
    """``x1 -> A(x1)`` on an interval ``(lo, hi)``.

    ``closed`` says whether the endpoints themselves are admissible (``A`` is
    finite there); when false, an interval whose closure touches ``lo`` or
    ``hi`` is refused.
    """

    def __init__(self, matrix, params=None, lo=-np.inf, hi=np.inf, closed=True, name=""):
        self._matrix = matrix
        self.params = params
        self.lo = float(lo)
        self.hi = float(hi)
        self.closed = bool(closed)
        self.name = name

    @classmethod
    def constant(cls, A):
        A = np.array(A, dtype=float)
        if A.shape != (2, 2):
            raise ContractError("coefficient matrix must be 2x2")
        return cls(lambda s, p: A, name="constant")

    @classmethod
    def from_system(cls, spec):
        """The curve attached to a :class:`~nhpoisson.systems.SystemSpec`."""
        lo, hi, closed = spec.extras["x1_domain"]
        return cls(spec.extras["coefficient_matrix"], spec.pvec, lo, hi, closed, name=spec.name)

    def contains(self, x1) -> bool:
        if self.closed:
            return self.lo <= x1 <= self.hi
        return self.lo < x1 < self.hi

    def check_interval(self, a, b):
        for v in (a, b):
            if not np.isfinite(v):
                raise ContractError("interval endpoints must be finite")
            if not self.contains(v):
                raise DomainError(f"x1 = {v} is outside the interval where A is finite "
                                  f"({self.lo}, {self.hi})")

    def __call__(self, x1) -> np.ndarray:
        A = np.asarray(self._matrix(float(x1), self.params), dtype=float)
        if not np.all(np.isfinite(A)):
            raise DomainError(f"A is not finite at x1 = {x1}")
        return A

    def trace(self, x1) -> float:
        return float(np.trace(self(x1)))


def _rhs(A):
    def f(s, y):
        return (A(s) @ y.reshape(2, 2)).ravel()
    return f


@dataclass(frozen=True)
class FundamentalMatrix:
    """``g(x1)`` based at ``base``, computed to local tolerance ``tol``."""

    curve: CoefficientCurve
    base: float
    tol: float = DEFAULT_TOL

    def __call__(self, x1):
        """``g`` at a scalar or an array of ``x1`` values (shape ``(..., 2, 2)``)."""
        x1 = np.asarray(x1, dtype=float)
        flat = fundamental_matrices(self.curve, self.base, x1.ravel(), self.tol)
        return flat.reshape(x1.shape + (2, 2))

    def inverse(self, x1):
        return np.linalg.inv(self(x1))


def fundamental_matrices(A: CoefficientCurve, x1_0: float, x1s, tol: float = DEFAULT_TOL):
    """``g(x1)`` for each entry of ``x1s``; one adaptive sweep per direction."""
    if tol <= 0:
        raise ContractError("tol must be positive")
    x1s = np.asarray(x1s, dtype=float).ravel()
    x1_0 = float(x1_0)
    out = np.empty((x1s.size, 2, 2))
    if x1s.size == 0:
        return out
    A.check_interval(x1_0, x1_0)
    for v in (x1s.min(), x1s.max()):
        A.check_interval(x1_0, v)
    f = _rhs(A)
    eye = np.eye(2).ravel()
    for sel in (x1s > x1_0, x1s < x1_0):
        if not np.any(sel):
            continue
        pts = x1s[sel]
        end = pts.max() if pts[0] > x1_0 else pts.min()
        res = _rk.solve_adaptive(f, x1_0, eye, end, rtol=tol, atol=tol, dt_min=1e-14,
                                 stops=pts)
        if res.status != _rk.REACHED:
            raise ConvergenceError(f"fundamental matrix solve stopped: {res.status}")
        lookup = {float(t): y for t, y in zip(res.times, res.states)}
        out[sel] = np.array([lookup[float(v)] for v in pts]).reshape(-1, 2, 2)
    out[x1s == x1_0] = np.eye(2)
    return out


def fundamental_matrix(A: CoefficientCurve, x1_0: float, x1: float,
                       tol: float = DEFAULT_TOL) -> np.ndarray:
    """``g(x1)`` with ``dg/dx1 = A(x1) g`` and ``g(x1_0) = I``."""
    return fundamental_matrices(A, x1_0, [x1], tol)[0]


def _split_state(state):
    s = np.asarray(state, dtype=float)
    if s.shape[-1] == 3:
        return s[..., 0], s[..., 1:3]
    if s.shape[-1] in (4, 5):
        return s[..., 0], s[..., 2:4]
    raise ContractError("state must be (x1, x3, x4) or a full 4/5-dimensional point")


def casimir_values(A: CoefficientCurve, x1_0: float, state, tol: float = DEFAULT_TOL):
    """``(c1, c2) = g(x1)^-1 (x3, x4)``.

    ``state`` is ``(x1, x3, x4)`` or a full system point, or a batch of
    either; the result has shape ``(..., 2)``.
    """
    x1, y = _split_state(state)
    g = fundamental_matrices(A, x1_0, np.ravel(x1), tol).reshape(np.shape(x1) + (2, 2))
    return np.linalg.solve(g, y[..., None])[..., 0]


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature of a scalar function on ``[a, b]``."""
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0:
            raise ConvergenceError("adaptive Simpson exceeded its recursion depth")
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (rec(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))

    if a == b:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def wronskian_residual(A: CoefficientCurve, x1_0: float, x1: float,
                       tol: float = DEFAULT_TOL) -> float:
    """``|det g(x1) - exp(int tr A)|``, the quadrature at tolerance ``tol / 10``."""
    g = fundamental_matrix(A, x1_0, x1, tol)
    integral = adaptive_simpson(A.trace, float(x1_0), float(x1), tol / 10.0)
    return float(abs(np.linalg.det(g) - np.exp(integral)))
