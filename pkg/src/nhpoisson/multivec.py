"""Coordinate calculus for scalar, vector, bivector and trivector fields on
open subsets of R^n.

All fields evaluate on arrays of points with shape ``(..., n)``.  Indices are
0-based in code; ``components[(0, 1)]`` is the coefficient of
d/dx1 ^ d/dx2.

Conventions
-----------
* The antisymmetric matrix ``W`` of a bivector has ``W[i, j] = L_ij`` for
  ``i < j`` and ``W[j, i] = -L_ij``.
* ``sharp(L, alpha)`` is ``v^i = sum_j W^ij alpha_j``.
* The Schouten bracket is normalised so that
  ``[X^Y, X^Y] = 2 X^Y^[X, Y]``.
"""
from __future__ import annotations

import itertools
from typing import Callable, Mapping

import numpy as np

from . import _kernels
from .errors import ContractError, DomainError, NHPoissonError

FD_STEP = 1e-5
DEFAULT_RANK_TOL = 1e-9

Guard = Callable[[np.ndarray], np.ndarray]


def as_points(x, dim: int) -> np.ndarray:
    """Validate ``x`` as a point or batch of points in R^dim."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0 or pts.shape[-1] != dim:
        raise ContractError(f"expected points with last axis {dim}, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ContractError("points must have finite coordinates")
    return pts


def _fd_steps(pts):
    return FD_STEP * np.maximum(1.0, np.abs(pts))


def _combine_guards(*guards):
    active = [g for g in guards if g is not None]
    if not active:
        return None
    if len(active) == 1:
        return active[0]

    def guard(pts):
        ok = active[0](pts)
        for g in active[1:]:
            ok = np.logical_and(ok, g(pts))
        return ok
    return guard


class ScalarField:
    """A smooth function on (an open subset of) R^dim.

    ``func`` maps points ``(..., dim)`` to values ``(...)``.  ``grad`` (and
    optionally ``hess``) give analytic derivatives; when missing, central
    finite differences with step ``1e-5 * max(1, |x_i|)`` are used.
    ``guard`` returns a boolean per point; evaluating outside raises
    :class:`DomainError`.
    """

    def __init__(self, func, dim: int, grad=None, hess=None, guard: Guard | None = None,
                 name: str = ""):
        if dim < 1:
            raise ContractError("dimension must be positive")
        self.dim = int(dim)
        self._func = func
        self._gradf = grad
        self._hessf = hess
        self.guard = guard
        self.name = name

    def __repr__(self):
        return f"ScalarField({self.name or '?'}, dim={self.dim})"

    @property
    def has_analytic_gradient(self) -> bool:
        return self._gradf is not None

    # -- evaluation -------------------------------------------------------
    def _check(self, x):
        pts = as_points(x, self.dim)
        if self.guard is not None and not np.all(self.guard(pts)):
            raise DomainError(f"{self.name or 'field'} evaluated outside its domain")
        return pts

    def _value(self, pts):
        return np.asarray(self._func(pts), dtype=float) * np.ones(pts.shape[:-1])

    def _grad(self, pts):
        if self._gradf is None:
            return self._fd_grad(pts)
        return np.asarray(self._gradf(pts), dtype=float) * np.ones(pts.shape)

    def _fd_grad(self, pts):
        h = _fd_steps(pts)
        out = np.empty(pts.shape)
        for i in range(self.dim):
            e = np.zeros(pts.shape)
            e[..., i] = h[..., i]
            out[..., i] = (self._value(pts + e) - self._value(pts - e)) / (2.0 * h[..., i])
        return out

    def _hess(self, pts):
        if self._hessf is not None:
            return np.asarray(self._hessf(pts), dtype=float) * np.ones(pts.shape + (self.dim,))
        h = _fd_steps(pts)
        out = np.empty(pts.shape + (self.dim,))
        for j in range(self.dim):
            e = np.zeros(pts.shape)
            e[..., j] = h[..., j]
            out[..., :, j] = (self._grad(pts + e) - self._grad(pts - e)) / (2.0 * h[..., j, None])
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    def __call__(self, x):
        return self._value(self._check(x))

    def gradient(self, x):
        """Partial derivatives, shape ``(..., dim)``."""
        return self._grad(self._check(x))

    def fd_gradient(self, x):
        """Central-difference gradient, ignoring any analytic one."""
        return self._fd_grad(self._check(x))

    def hessian(self, x):
        return self._hess(self._check(x))

    def partial(self, i: int) -> "ScalarField":
        """The field d/dx_i of this field; its gradient is a Hessian row."""
        return ScalarField(lambda p: self._grad(p)[..., i], self.dim,
                           grad=lambda p: self._hess(p)[..., i, :], guard=self.guard,
                           name=f"d{i + 1}({self.name})")

    def embed(self, indices, dim: int) -> "ScalarField":
        """Pull back along the projection R^dim -> R^k onto ``indices``."""
        idx = list(indices)
        if len(idx) != self.dim:
            raise ContractError("need one ambient index per field coordinate")

        def grad(p):
            out = np.zeros(p.shape)
            out[..., idx] = self._grad(p[..., idx])
            return out

        guard = None if self.guard is None else (lambda p: self.guard(p[..., idx]))
        return ScalarField(lambda p: self._value(p[..., idx]), dim, grad=grad, guard=guard,
                           name=self.name)

    # -- algebra -----------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, ScalarField):
            if other.dim != self.dim:
                raise ContractError("dimension mismatch")
            return other
        return constant(float(other), self.dim)

    def __add__(self, other):
        o = self._lift(other)
        return ScalarField(lambda p: self._value(p) + o._value(p), self.dim,
                           grad=lambda p: self._grad(p) + o._grad(p),
                           guard=_combine_guards(self.guard, o.guard))

    __radd__ = __add__

    def __neg__(self):
        return ScalarField(lambda p: -self._value(p), self.dim,
                           grad=lambda p: -self._grad(p), guard=self.guard,
                           name=f"-{self.name}")

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)

        def grad(p):
            return (self._grad(p) * o._value(p)[..., None]
                    + self._value(p)[..., None] * o._grad(p))
        return ScalarField(lambda p: self._value(p) * o._value(p), self.dim, grad=grad,
                           guard=_combine_guards(self.guard, o.guard))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)

        def grad(p):
            v = o._value(p)[..., None]
            return (self._grad(p) * v - self._value(p)[..., None] * o._grad(p)) / v**2
        return ScalarField(lambda p: self._value(p) / o._value(p), self.dim, grad=grad,
                           guard=_combine_guards(self.guard, o.guard))

    def __rtruediv__(self, other):
        return self._lift(other) / self


def constant(c: float, dim: int) -> ScalarField:
    c = float(c)
    return ScalarField(lambda p: np.full(p.shape[:-1], c), dim,
                       grad=lambda p: np.zeros(p.shape), hess=lambda p: np.zeros(p.shape + (dim,)),
                       name=repr(c))


def coordinate(i: int, dim: int) -> ScalarField:
    """The coordinate function x_{i+1}."""
    def grad(p):
        g = np.zeros(p.shape)
        g[..., i] = 1.0
        return g
    return ScalarField(lambda p: p[..., i], dim, grad=grad,
                       hess=lambda p: np.zeros(p.shape + (dim,)), name=f"x{i + 1}")


class VectorField:
    """A vector field given by ``func: (..., n) -> (..., n)``.

    ``jacobian`` (optional) returns ``J[..., i, l] = d X^i / d x_l``.
    """

    def __init__(self, func, dim: int, jacobian=None, guard: Guard | None = None,
                 name: str = ""):
        self.dim = int(dim)
        self._func = func
        self._jacf = jacobian
        self.guard = guard
        self.name = name

    @classmethod
    def from_components(cls, components, name: str = "") -> "VectorField":
        comps = list(components)
        dim = comps[0].dim
        if any(c.dim != dim for c in comps) or len(comps) != dim:
            raise ContractError("need one component per coordinate, all of equal dimension")

        def func(p):
            return np.stack([c._value(p) for c in comps], axis=-1)

        def jac(p):
            return np.stack([c._grad(p) for c in comps], axis=-2)
        return cls(func, dim, jacobian=jac, guard=_combine_guards(*(c.guard for c in comps)),
                   name=name)

    @classmethod
    def coordinate_basis(cls, i: int, dim: int) -> "VectorField":
        """The constant field d/dx_{i+1}."""
        e = np.zeros(dim)
        e[i] = 1.0
        return cls(lambda p: np.broadcast_to(e, p.shape).copy(), dim,
                   jacobian=lambda p: np.zeros(p.shape + (dim,)), name=f"d/dx{i + 1}")

    def _check(self, x):
        pts = as_points(x, self.dim)
        if self.guard is not None and not np.all(self.guard(pts)):
            raise DomainError(f"{self.name or 'vector field'} evaluated outside its domain")
        return pts

    def _value(self, pts):
        return np.asarray(self._func(pts), dtype=float) * np.ones(pts.shape)

    def _jac(self, pts):
        if self._jacf is not None:
            return np.asarray(self._jacf(pts), dtype=float) * np.ones(pts.shape + (self.dim,))
        h = _fd_steps(pts)
        out = np.empty(pts.shape + (self.dim,))
        for l in range(self.dim):
            e = np.zeros(pts.shape)
            e[..., l] = h[..., l]
            out[..., :, l] = (self._value(pts + e) - self._value(pts - e)) / (2.0 * h[..., l, None])
        return out

    def __call__(self, x):
        return self._value(self._check(x))

    def jacobian(self, x):
        return self._jac(self._check(x))

    def component(self, i: int) -> ScalarField:
        return ScalarField(lambda p: self._value(p)[..., i], self.dim,
                           grad=lambda p: self._jac(p)[..., i, :], guard=self.guard,
                           name=f"{self.name}[{i}]")

    def apply(self, f: ScalarField, x):
        """The derivative X(f) evaluated at ``x``."""
        pts = self._check(x)
        return np.einsum("...i,...i->...", self._value(pts), f._grad(pts))

    def __neg__(self):
        return VectorField(lambda p: -self._value(p), self.dim,
                           jacobian=lambda p: -self._jac(p), guard=self.guard,
                           name=f"-{self.name}")


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^i = X^l d_l Y^i - Y^l d_l X^i."""
    if X.dim != Y.dim:
        raise ContractError("dimension mismatch")

    def func(p):
        return (np.einsum("...il,...l->...i", Y._jac(p), X._value(p))
                - np.einsum("...il,...l->...i", X._jac(p), Y._value(p)))
    return VectorField(func, X.dim, guard=_combine_guards(X.guard, Y.guard), name="[X,Y]")


class BivectorField:
    """sum_{i<j} L_ij d/dx_i ^ d/dx_j with each ``L_ij`` a :class:`ScalarField`.

    ``components`` maps 0-based pairs ``(i, j)`` with ``i < j`` to fields;
    missing pairs are zero.
    """

    def __init__(self, components: Mapping[tuple[int, int], ScalarField], dim: int,
                 name: str = ""):
        self.dim = int(dim)
        self.name = name
        comps = {}
        for (i, j), f in components.items():
            if not (0 <= i < j < dim):
                raise ContractError(f"bad bivector index pair {(i, j)} for dimension {dim}")
            if f.dim != dim:
                raise ContractError("component dimension mismatch")
            comps[(i, j)] = f
        self.components = comps
        self.guard = _combine_guards(*(f.guard for f in comps.values()))

    def __repr__(self):
        return f"BivectorField({self.name or '?'}, dim={self.dim}, nnz={len(self.components)})"

    def _check(self, x):
        pts = as_points(x, self.dim)
        if self.guard is not None and not np.all(self.guard(pts)):
            raise DomainError(f"{self.name or 'bivector'} evaluated outside its domain")
        return pts

    def component(self, i: int, j: int) -> ScalarField:
        """Coefficient W^ij for any ordered pair (antisymmetric extension)."""
        if i == j:
            return constant(0.0, self.dim)
        if i < j:
            return self.components.get((i, j), constant(0.0, self.dim))
        return -self.component(j, i)

    def _matrix(self, pts):
        W = np.zeros(pts.shape[:-1] + (self.dim, self.dim))
        for (i, j), f in self.components.items():
            v = f._value(pts)
            W[..., i, j] = v
            W[..., j, i] = -v
        return W

    def _derivative(self, pts):
        D = np.zeros(pts.shape[:-1] + (self.dim, self.dim, self.dim))
        for (i, j), f in self.components.items():
            g = f._grad(pts)
            D[..., i, j, :] = g
            D[..., j, i, :] = -g
        return D

    def matrix(self, x):
        """Antisymmetric matrix ``W``, shape ``(..., n, n)``."""
        return self._matrix(self._check(x))

    def matrix_derivative(self, x):
        """``D[..., i, j, l] = d W^ij / d x_l``."""
        return self._derivative(self._check(x))

    def _combine(self, other, sign):
        if other.dim != self.dim:
            raise ContractError("dimension mismatch")
        keys = set(self.components) | set(other.components)
        comps = {}
        for k in keys:
            a = self.components.get(k)
            b = other.components.get(k)
            if a is None:
                comps[k] = b if sign > 0 else -b
            elif b is None:
                comps[k] = a
            else:
                comps[k] = a + b if sign > 0 else a - b
        return BivectorField(comps, self.dim)

    def __add__(self, other):
        return self._combine(other, +1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, c):
        if isinstance(c, ScalarField):
            return scale(self, c)
        return BivectorField({k: f * float(c) for k, f in self.components.items()}, self.dim,
                             name=self.name)

    __rmul__ = __mul__


class TrivectorField:
    """A 3-vector field stored as its full antisymmetric array ``(..., n, n, n)``."""

    def __init__(self, func, dim: int, name: str = ""):
        self.dim = int(dim)
        self._func = func
        self.name = name

    def __call__(self, x):
        return np.asarray(self._func(as_points(x, self.dim)), dtype=float)


def upper_triples(T: np.ndarray) -> dict:
    """Collect the independent entries ``T[i, j, k]`` with ``i < j < k``."""
    n = T.shape[-1]
    return {(i, j, k): T[..., i, j, k] for i, j, k in itertools.combinations(range(n), 3)}


def max_abs_component(T: np.ndarray) -> np.ndarray:
    """Largest |T^ijk| per point."""
    return np.max(np.abs(T.reshape(T.shape[:-3] + (-1,))), axis=-1)


def sharp(L: BivectorField, alpha, x):
    """Apply the bundle map T*M -> TM of ``L`` to the covector(s) ``alpha`` at ``x``."""
    pts = L._check(x)
    a = np.asarray(alpha, dtype=float)
    if a.shape[-1] != L.dim:
        raise ContractError(f"covector has {a.shape[-1]} entries, bivector dimension is {L.dim}")
    return np.einsum("...ij,...j->...i", L._matrix(pts), a)


def schouten_self(L: BivectorField, x) -> np.ndarray:
    """[L, L]^ijk at ``x``; vanishes iff ``L`` satisfies the Jacobi identity."""
    pts = L._check(x)
    W = L._matrix(pts)
    D = L._derivative(pts)
    lead = pts.shape[:-1]
    n = L.dim
    flat = _kernels.schouten_contract(np.ascontiguousarray(W.reshape(-1, n, n)),
                                      np.ascontiguousarray(D.reshape(-1, n, n, n)))
    return flat.reshape(lead + (n, n, n))


def schouten_field(L: BivectorField) -> TrivectorField:
    return TrivectorField(lambda p: schouten_self(L, p), L.dim, name=f"[{L.name},{L.name}]")


def schouten_pair(L1: BivectorField, L2: BivectorField, x) -> np.ndarray:
    """[L1, L2] by polarisation of the self-bracket."""
    if L1.dim != L2.dim:
        raise ContractError("dimension mismatch")
    return 0.25 * (schouten_self(L1 + L2, x) - schouten_self(L1 - L2, x))


def rank_at(L: BivectorField, x, tol: float = DEFAULT_RANK_TOL):
    """Numerical rank of ``W(x)``: singular values above ``tol * s_max``."""
    if tol <= 0:
        raise ContractError("tol must be positive")
    W = L.matrix(x)
    s = np.linalg.svd(W, compute_uv=False)
    smax = s[..., 0]
    ranks = np.where(smax > 0.0, np.sum(s > tol * smax[..., None], axis=-1), 0)
    if np.any(ranks % 2):
        raise NHPoissonError("odd numerical rank for an antisymmetric matrix; adjust tol")
    if ranks.ndim == 0:
        return int(ranks)
    return ranks.astype(int)


def scale(L: BivectorField, a: ScalarField) -> BivectorField:
    """Componentwise product ``a * L``."""
    if a.dim != L.dim:
        raise ContractError("dimension mismatch")
    return BivectorField({k: a * f for k, f in L.components.items()}, L.dim,
                         name=f"{a.name}*{L.name}")


def wedge(X: VectorField, Y: VectorField) -> BivectorField:
    """X ^ Y, i.e. ``W^ij = X^i Y^j - X^j Y^i``."""
    if X.dim != Y.dim:
        raise ContractError("dimension mismatch")
    n = X.dim
    xs = [X.component(i) for i in range(n)]
    ys = [Y.component(i) for i in range(n)]
    comps = {(i, j): xs[i] * ys[j] - xs[j] * ys[i]
             for i, j in itertools.combinations(range(n), 2)}
    return BivectorField(comps, n, name=f"{X.name}^{Y.name}")


def wedge_bivector_vector(L: BivectorField, Z: VectorField, x) -> np.ndarray:
    """(L ^ Z)^ijk = W^ij Z^k + W^jk Z^i + W^ki Z^j at ``x``."""
    pts = as_points(x, L.dim)
    W = L._matrix(pts)
    z = Z._value(pts)
    T = np.einsum("...ij,...k->...ijk", W, z)
    return T + np.moveaxis(T, -1, -3) + np.moveaxis(T, -3, -1)
