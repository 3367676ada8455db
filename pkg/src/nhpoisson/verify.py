"""The invariant suite behind ``nhpoisson verify``.

Every check evaluates a residual at seeded random domain points (or fixed
fixtures) and compares its maximum with a tolerance.  Points are drawn from
``numpy.random.Generator(numpy.random.Philox(seed))``, a counter-based
generator whose streams are identical across platforms.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .errors import ConfigError
from .multivec import (VectorField, coordinate, max_abs_component, rank_at, scale,
                       schouten_pair, schouten_self, sharp, wedge)
from .pfaff import build_r4, build_r5, kernel_oneforms

DEFAULT_TOLERANCES = {
    "jacobi": 1e-8,
    "kernel": 1e-10,
    "hamiltonian": 1e-10,
    "conservation": 1e-10,
    "rank_zero": 1e-12,
    "scaling": 1e-15,
    "frobenius": 1e-8,
    "restriction": 1e-9,
    "fd_gradient": 1e-6,
    "generator": 1e-9,
}

PENCIL_LAMBDAS = (-1.0, 0.5, 2.0)
REMIX_LAMBDAS = (0.0, 1.0, 2.0)


@dataclass
class CheckResult:
    name: str
    system: str
    variant: str
    samples: int
    max_residual: float
    tolerance: float
    passed: bool

    def as_dict(self):
        return asdict(self)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def _result(name, spec, samples, residual, tol):
    r = float(np.max(residual)) if np.size(residual) else 0.0
    return CheckResult(name, spec.name, spec.variant, int(samples), r, float(tol),
                       bool(np.isfinite(r) and r < tol))


def _sup(a):
    return np.max(np.abs(a), axis=-1)


def _wmax(W):
    return np.max(np.abs(W.reshape(W.shape[:-2] + (-1,))), axis=-1)


# -- individual checks ----------------------------------------------------

def jacobi_residual(L, x):
    return max_abs_component(schouten_self(L, x))


def kernel_residual(L, forms, x):
    W = L.matrix(x)
    worst = np.zeros(x.shape[:-1])
    for form in forms:
        th = np.stack([c(x) for c in form], axis=-1)
        worst = np.maximum(worst, _sup(np.einsum("...ij,...j->...i", W, th))
                           / (1.0 + _wmax(W)))
    return worst


def hamiltonian_residual(spec, L, x):
    v = spec.vf(x)
    w = sharp(L, spec.energy.gradient(x), x)
    return _sup(v - w) / (1.0 + _sup(v))


def conservation_residual(spec, field, x):
    v = spec.vf(x)
    g = field.gradient(x)
    return np.abs(np.sum(v * g, axis=-1)) / (1.0 + _sup(v) * _sup(g))


def scaling_residual(spec, a, x):
    L = spec.bivector()
    if spec.dim == 4:
        L2 = build_r4(spec.pfaffian, a * spec.multiplier)
    else:
        L2 = build_r5(spec.pfaffian, a * spec.multiplier)
    W1 = scale(L, a).matrix(x)
    W2 = L2.matrix(x)
    return _wmax(W1 - W2) / np.maximum(_wmax(W1), np.finfo(float).tiny)


def restriction_residual(spec5, spec4, x4):
    x5 = spec5.extras["lift"](x4)
    return _sup(spec5.vf(x5)[..., :4] - spec4.vf(x4))


def fd_gradient_residual(field, x):
    """Analytic vs central-difference gradient, relative to ``max(1, |grad|)``;
    the difference error grows with the third derivative near the boundary."""
    g = field.gradient(x)
    return _sup(g - field.fd_gradient(x)) / np.maximum(1.0, _sup(g))


def _scaling_function(dim):
    x1 = coordinate(0, dim)
    return 1.0 + x1 * x1


# -- suites ---------------------------------------------------------------

def check_system(spec, n: int = 1000, seed: int = 0, tolerances=None,
                 inject_sign_flip: bool = False, companion=None):
    """Run the invariant suite for one system variant.

    ``companion`` is the reduced4 variant of the same system, used for the
    restriction check of an extended5 spec.  ``inject_sign_flip`` replaces
    the multiplier by its negative (a mutation the Hamiltonian check must
    catch).
    """
    tol = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
    rng = make_rng(seed)
    x = spec.sample(rng, n)
    mult = -spec.multiplier if inject_sign_flip else None
    L = spec.bivector(mult)
    out = []
    a = _scaling_function(spec.dim)

    out.append(_result("jacobi", spec, n, jacobi_residual(L, x), tol["jacobi"]))
    out.append(_result("jacobi_scaled", spec, n, jacobi_residual(scale(L, a), x),
                       tol["jacobi"]))
    forms = kernel_oneforms(spec.pfaffian, spec.dim).forms()
    out.append(_result("kernel", spec, n, kernel_residual(L, forms, x), tol["kernel"]))
    out.append(_result("hamiltonian", spec, n, hamiltonian_residual(spec, L, x),
                       tol["hamiltonian"]))
    out.append(_result("energy_conservation", spec, n,
                       conservation_residual(spec, spec.energy, x), tol["conservation"]))
    if spec.phi is not None:
        out.append(_result("phi_conservation", spec, n,
                           conservation_residual(spec, spec.phi, x), tol["conservation"]))
    ranks = np.atleast_1d(rank_at(L, x))
    out.append(_result("rank_two", spec, n, np.abs(ranks - 2).astype(float), 0.5))
    if spec.singular_fixtures:
        fx = np.array(spec.singular_fixtures)
        out.append(_result("rank_zero_fixtures", spec, len(fx), _wmax(L.matrix(fx)),
                           tol["rank_zero"]))
    if "bivector" not in spec.extras:
        out.append(_result("scaling_closure", spec, n, scaling_residual(spec, a, x),
                           tol["scaling"]))
    m = min(n, 100)
    frob = [_frobenius(spec, x[i]) for i in range(m)]
    out.append(_result("frobenius", spec, m, np.array(frob), tol["frobenius"]))
    fields = [spec.energy, spec.multiplier] + ([spec.phi] if spec.phi is not None else [])
    fdres = np.max([fd_gradient_residual(f, x[:m]) for f in fields], axis=0)
    out.append(_result("fd_gradient", spec, m, fdres, tol["fd_gradient"]))
    if spec.dim == 5 and companion is not None and "lift" in spec.extras:
        x4 = companion.sample(rng, min(n, 200))
        out.append(_result("restriction", spec, len(x4),
                           restriction_residual(spec, companion, x4), tol["restriction"]))
    if spec.name == "cylinder":
        out.extend(_cylinder_checks(spec, x, tol))
    return out


def _frobenius(spec, p):
    from .pfaff import frobenius_residual
    return frobenius_residual(spec.pfaffian, p)


def _cylinder_checks(spec, x, tol):
    from .systems import cylinder as cyl
    prm = spec.params
    n = len(x)
    L1, L2 = spec.extras["Lambda1"], spec.extras["Lambda2"]
    c1, c2, c3 = cyl.casimir_fields(prm)
    out = [
        _result("hamiltonian_Lambda1", spec, n, hamiltonian_residual(spec, L1, x),
                tol["hamiltonian"]),
        _result("hamiltonian_Lambda2", spec, n, hamiltonian_residual(spec, L2, x),
                tol["hamiltonian"]),
        _result("jacobi_Lambda2", spec, n, jacobi_residual(L2, x), tol["jacobi"]),
        _result("compatibility", spec, n, max_abs_component(schouten_pair(L1, L2, x)),
                tol["jacobi"]),
        _result("kernel_Lambda1", spec, n, kernel_residual(L1, [_grad_form(c1), _grad_form(c2)],
                                                           x), tol["kernel"]),
        _result("kernel_Lambda2", spec, n, kernel_residual(L2, [_grad_form(c1), _grad_form(c3)],
                                                           x), tol["kernel"]),
    ]
    for lam in PENCIL_LAMBDAS:
        P = cyl.cylinder_pencil(prm, lam)
        out.append(_result(f"hamiltonian_pencil[{lam:g}]", spec, n,
                           hamiltonian_residual(spec, P, x), tol["hamiltonian"]))
        out.append(_result(f"jacobi_pencil[{lam:g}]", spec, n, jacobi_residual(P, x),
                           tol["jacobi"]))
    v = spec.vf(x)
    al, r, rho = prm.alpha_in, prm.r, prm.rho
    g1 = sharp(L1, c3.gradient(x), x) - (2.0 * r * x[:, 3] / (al * r * r * rho))[:, None] * v
    g2 = sharp(L2, c2.gradient(x), x) + (x[:, 3] / (rho * prm.m * prm.g))[:, None] * v
    out.append(_result("generator_relations", spec, n,
                       np.maximum(_sup(g1), _sup(g2)) / (1.0 + _sup(v)), tol["generator"]))
    return out


def _grad_form(f):
    """The components of ``df`` as scalar fields."""
    return tuple(f.partial(i) for i in range(f.dim))


def heisenberg_bivector():
    """``X ^ Y`` with ``X = d/dx - y d/dz`` and ``Y = d/dy + x d/dz`` on R^3."""
    def X(p):
        return np.stack([np.ones(p.shape[:-1]), np.zeros(p.shape[:-1]), -p[..., 1]], axis=-1)

    def Y(p):
        return np.stack([np.zeros(p.shape[:-1]), np.ones(p.shape[:-1]), p[..., 0]], axis=-1)

    def JX(p):
        J = np.zeros(p.shape + (3,))
        J[..., 2, 1] = -1.0
        return J

    def JY(p):
        J = np.zeros(p.shape + (3,))
        J[..., 2, 0] = 1.0
        return J
    L = wedge(VectorField(X, 3, jacobian=JX, name="X"), VectorField(Y, 3, jacobian=JY, name="Y"))
    L.name = "heisenberg"
    return L


def check_heisenberg(n: int = 10, seed: int = 0, tolerances=None):
    """The Jacobi check on a rank-two bivector that is not Poisson; it fails."""
    tol = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
    x = make_rng(seed).uniform(-2.0, 2.0, size=(n, 3))
    S = schouten_self(heisenberg_bivector(), x)
    r = float(np.max(max_abs_component(S)))
    return [CheckResult("jacobi", "heisenberg", "r3", n, r, tol["jacobi"], r < tol["jacobi"])]


def run_verification(systems, n: int = 1000, seed: int = 0, tolerances=None,
                     inject_sign_flip=(), config_echo=None):
    """Run the suite over ``systems`` (a list of ``(name, params, variants)``).

    Returns a JSON-ready report; ``passed`` is true iff every check passed.
    """
    from .systems import make_system
    checks = []
    for name, params, variants in systems:
        if name == "heisenberg":
            checks.extend(check_heisenberg(min(n, 10), seed, tolerances))
            continue
        four = make_system(name, params, "reduced4")
        for variant in variants:
            spec = four if variant == "reduced4" else make_system(name, params, variant)
            flip = name in inject_sign_flip
            checks.extend(check_system(spec, n, seed, tolerances, flip,
                                       companion=four if variant == "extended5" else None))
    if not checks:
        raise ConfigError("no checks selected")
    return {
        "tool": "nhpoisson",
        "version": __version__,
        "seed": int(seed),
        "samples": int(n),
        "config": config_echo,
        "checks": [c.as_dict() for c in checks],
        "passed": all(c.passed for c in checks),
    }
