"""Rank-two Poisson bivectors whose kernel is spanned by prescribed 1-forms.

In R^4 the kernel is spanned by

    theta1 = -h3 dx1 + dx3,    theta2 = -h4 dx1 + dx4,

with ``h3, h4`` functions of ``(x1, x3, x4)``.  In R^5 the differential of a
constraint function ``phi`` is added as ``theta0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError
from .multivec import (BivectorField, ScalarField, VectorField, as_points, constant,
                       _combine_guards)

_H_AXES = (0, 2, 3)


@dataclass(frozen=True)
class PfaffianSpec:
    """The data ``(h3, h4[, phi])``.

    ``h3`` and ``h4`` are 3-dimensional fields evaluated on ``(x1, x3, x4)``,
    so independence from ``x2`` holds by construction.  ``phi`` lives on R^5.
    """

    h3: ScalarField
    h4: ScalarField
    phi: ScalarField | None = None

    def __post_init__(self):
        if self.h3.dim != 3 or self.h4.dim != 3:
            raise ContractError("h3 and h4 must be fields on (x1, x3, x4)")
        if self.phi is not None and self.phi.dim != 5:
            raise ContractError("phi must be a field on R^5")

    def lifted(self, dim: int):
        """``(h3, h4)`` pulled back to R^dim."""
        if dim not in (4, 5):
            raise ContractError("dimension must be 4 or 5")
        return self.h3.embed(_H_AXES, dim), self.h4.embed(_H_AXES, dim)


@dataclass(frozen=True)
class KernelForms:
    """Covector fields as tuples of scalar fields, one per ``dx_i``."""

    theta1: tuple
    theta2: tuple
    theta0: tuple | None = None

    @property
    def dim(self) -> int:
        return len(self.theta1)

    def forms(self):
        out = [self.theta1, self.theta2]
        if self.theta0 is not None:
            out.append(self.theta0)
        return out

    @staticmethod
    def evaluate(form, x) -> np.ndarray:
        pts = as_points(x, len(form))
        return np.stack([c(pts) for c in form], axis=-1)


def _theta12(spec, dim):
    h3, h4 = spec.lifted(dim)
    zero, one = constant(0.0, dim), constant(1.0, dim)
    theta1 = (-h3, zero, one, zero) + (zero,) * (dim - 4)
    theta2 = (-h4, zero, zero, one) + (zero,) * (dim - 4)
    return theta1, theta2


def kernel_oneforms(spec: PfaffianSpec, dim: int) -> KernelForms:
    if dim == 5 and spec.phi is None:
        raise ConfigError("the 5-dimensional construction needs phi")
    theta1, theta2 = _theta12(spec, dim)
    theta0 = None
    if dim == 5:
        theta0 = tuple(spec.phi.partial(i) for i in range(5))
    return KernelForms(theta1, theta2, theta0)


def build_r4(spec: PfaffianSpec, lambda12: ScalarField) -> BivectorField:
    """The bivector ``-lambda12 U ^ V`` with ``U = d2``, ``V = d1 + h3 d3 + h4 d4``."""
    if lambda12.dim != 4:
        raise ContractError("lambda12 must be a field on R^4")
    h3, h4 = spec.lifted(4)
    comps = {
        (0, 1): lambda12,
        (1, 2): -(lambda12 * h3),
        (1, 3): -(lambda12 * h4),
    }
    return BivectorField(comps, 4, name="Lambda4")


def build_r5(spec: PfaffianSpec, f: ScalarField) -> BivectorField:
    """The bivector ``f[(Z phi) U^V + Y^Z]`` written out componentwise."""
    if spec.phi is None:
        raise ConfigError("the 5-dimensional construction needs phi")
    if f.dim != 5:
        raise ContractError("f must be a field on R^5")
    h3, h4 = spec.lifted(5)
    d1, d2, d3, d4, d5 = (spec.phi.partial(i) for i in range(5))
    comps = {
        (0, 1): -(f * d5),
        (1, 2): f * h3 * d5,
        (1, 3): f * h4 * d5,
        (0, 4): f * d2,
        (2, 4): f * h3 * d2,
        (3, 4): f * h4 * d2,
        (1, 4): -(f * (d1 + h3 * d3 + h4 * d4)),
    }
    return BivectorField(comps, 5, name="Lambda5")


def hamiltonian_vf(L: BivectorField, H: ScalarField) -> VectorField:
    """The vector field ``L#(dH)``."""
    if L.dim != H.dim:
        raise ContractError("dimension mismatch")

    def func(p):
        return np.einsum("...ij,...j->...i", L._matrix(p), H._grad(p))
    return VectorField(func, L.dim, guard=_combine_guards(L.guard, H.guard),
                       name=f"X_{H.name or 'H'}")


def _two_form(alpha, beta):
    return alpha[..., :, None] * beta[..., None, :] - alpha[..., None, :] * beta[..., :, None]


def _exterior_derivative(form, pts):
    # (d theta)_ab = d_a theta_b - d_b theta_a, differentiated numerically
    G = np.stack([c.fd_gradient(pts) for c in form], axis=-1)  # G[..., a, b] = d_a theta_b
    return G - np.swapaxes(G, -1, -2)


def frobenius_residual(spec: PfaffianSpec, p) -> float:
    """max |d theta_i - Delta_i^j ^ theta_j| over coordinate pairs at ``p``.

    The connection forms are ``Delta_i^j = (d h_{i+2} / d x_{j+2}) dx1``.
    The exterior derivatives are taken by central differences, while the
    connection forms use the fields' own gradients, so the two sides are
    computed independently.
    """
    pts = np.asarray(p, dtype=float)
    dim = pts.shape[-1]
    if dim not in (4, 5):
        raise ContractError("points must lie in R^4 or R^5")
    pts = as_points(pts, dim)
    forms = _theta12(spec, dim)
    theta = [KernelForms.evaluate(t, pts) for t in forms]
    q = pts[..., list(_H_AXES)]
    grads = [spec.h3.gradient(q), spec.h4.gradient(q)]  # columns: d/dx1, d/dx3, d/dx4
    dx1 = np.zeros(pts.shape)
    dx1[..., 0] = 1.0
    worst = 0.0
    for i, form in enumerate(forms):
        lhs = _exterior_derivative(form, pts)
        rhs = sum(_two_form(grads[i][..., 1 + j, None] * dx1, theta[j]) for j in range(2))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
