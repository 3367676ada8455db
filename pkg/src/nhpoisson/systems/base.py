"""Shared plumbing for the reduced systems.

Each system is written as a handful of kernels ``k(x, p)`` taking a
coordinate-major state ``x`` (``x[0]`` is the first coordinate, scalar or
array) and a flat float parameter vector ``p``.  The same source runs under
numpy on batches and, for the vector field and the domain guard, under
numba on single states.
"""
from __future__ import annotations

from dataclasses import MISSING, dataclass, field, fields
from typing import Callable

import numpy as np

from ..errors import ConfigError, ContractError
from ..multivec import BivectorField, ScalarField, VectorField, max_abs_component
from ..pfaff import PfaffianSpec, build_r4, build_r5, hamiltonian_vf

VARIANTS = ("reduced4", "extended5")


def _cm(pts):
    return np.moveaxis(pts, -1, 0)


def _stack_last(parts, shape):
    return np.stack([np.broadcast_to(np.asarray(c, dtype=float), shape) for c in parts], axis=-1)


def kernel_scalar(value, grad, p, dim, guard=None, hess=None, name=""):
    """Wrap coordinate-major kernels as a :class:`ScalarField`.

    ``grad(x, p)`` returns a sequence of ``dim`` partials; ``hess(x, p)``, if
    given, a ``dim x dim`` nested sequence.
    """
    def func(pts):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(value(_cm(pts), p), dtype=float)

    def gfun(pts):
        with np.errstate(divide="ignore", invalid="ignore"):
            return _stack_last(grad(_cm(pts), p), pts.shape[:-1])

    hfun = None
    if hess is not None:
        def hfun(pts):
            rows = hess(_cm(pts), p)
            return np.stack([_stack_last(r, pts.shape[:-1]) for r in rows], axis=-2)
    return ScalarField(func, dim, grad=gfun, hess=hfun, guard=guard, name=name)


def batch_guard(kernel, p):
    """Adapt a guard kernel to points of shape ``(..., n)``."""
    def guard(pts):
        with np.errstate(invalid="ignore"):
            return np.asarray(kernel(_cm(pts), p), dtype=bool)
    return guard


def kernel_vector(rhs, p, dim, guard=None, name=""):
    def func(pts):
        with np.errstate(divide="ignore", invalid="ignore"):
            return _stack_last(rhs(_cm(pts), p), pts.shape[:-1])
    return VectorField(func, dim, guard=guard, name=name)


# -- parameter handling ----------------------------------------------------

def params_from(cls, params):
    """Build a parameter dataclass from a mapping, naming missing or unknown keys."""
    if isinstance(params, cls):
        params.validate()
        return params
    if params is None:
        params = {}
    if not isinstance(params, dict):
        raise ConfigError(f"parameters for {cls.__name__} must be a table")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(params) - names)
    if unknown:
        raise ConfigError(f"unknown parameter(s) for {cls.__name__}: {', '.join(unknown)}")
    required = [f.name for f in fields(cls)
                if f.default is MISSING and f.default_factory is MISSING]
    missing = [n for n in required if n not in params]
    if missing:
        raise ConfigError(f"missing parameter(s) for {cls.__name__}: {', '.join(missing)}")
    obj = cls(**params)
    obj.validate()
    return obj


def require_positive(obj, *names):
    for n in names:
        v = getattr(obj, n)
        if not (isinstance(v, (int, float)) and np.isfinite(v) and v > 0):
            raise ConfigError(f"parameter {n} must be a positive number, got {v!r}")


# -- the system record -----------------------------------------------------

@dataclass(frozen=True)
class SystemSpec:
    """One reduced system in one variant (immutable)."""

    name: str
    variant: str
    dim: int
    params: object
    coords: tuple
    pvec: np.ndarray
    rhs_kernel: Callable
    guard_kernel: Callable
    vf: VectorField
    energy: ScalarField
    pfaffian: PfaffianSpec
    multiplier: ScalarField
    phi: ScalarField | None = None
    jit_ok: bool = True
    singular_fixtures: tuple = ()
    sampler: Callable | None = None
    extras: dict = field(default_factory=dict)

    def domain_guard(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ContractError(f"expected {self.dim} coordinates")
        with np.errstate(invalid="ignore"):
            ok = np.asarray(self.guard_kernel(_cm(x), self.pvec), dtype=bool)
            ok = ok & np.all(np.isfinite(x), axis=-1)
        return bool(ok) if ok.ndim == 0 else ok

    def bivector(self, multiplier: ScalarField | None = None) -> BivectorField:
        """The Poisson bivector built from the Pfaffian data and a multiplier."""
        if "bivector" in self.extras and multiplier is None:
            return self.extras["bivector"]
        mult = self.multiplier if multiplier is None else multiplier
        if self.dim == 4:
            return build_r4(self.pfaffian, mult)
        return build_r5(self.pfaffian, mult)

    def hamiltonian_vf(self, multiplier: ScalarField | None = None) -> VectorField:
        return hamiltonian_vf(self.bivector(multiplier), self.energy)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` random interior points of the declared domain."""
        return self.sampler(rng, n)

    def equilibrium_residual(self, x):
        return equilibrium_residual(self, x)


def equilibrium_residual(spec: SystemSpec, x):
    """Max-norm of the vector field; zero exactly at equilibria."""
    v = spec.vf(x)
    r = np.max(np.abs(v), axis=-1)
    return float(r) if np.ndim(r) == 0 else r


def domain_guard(spec: SystemSpec, x):
    return spec.domain_guard(x)


def bivector_max(L: BivectorField, x):
    """Largest |W^ij| at ``x``."""
    W = L.matrix(x)
    return np.max(np.abs(W.reshape(W.shape[:-2] + (-1,))), axis=-1)


__all__ = ["SystemSpec", "kernel_scalar", "kernel_vector", "batch_guard", "params_from",
           "equilibrium_residual", "domain_guard", "VARIANTS", "max_abs_component"]
