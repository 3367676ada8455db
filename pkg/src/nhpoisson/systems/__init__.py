"""The reduced nonholonomic systems and their Poisson data."""
from __future__ import annotations

from ..errors import ConfigError
from . import cylinder, disk, sphere, surface_ball
from .base import VARIANTS, SystemSpec, bivector_max, domain_guard, equilibrium_residual
from .cylinder import (CylinderParams, cylinder_analytic, cylinder_casimirs, cylinder_pencil,
                       cylinder_reconstruct)
from .disk import DiskParams
from .profiles import Profile, cosh_profile, custom, paraboloid, quartic
from .sphere import RouthSphereParams, jellet_integrals
from .surface_ball import SurfaceBallParams

_BUILDERS = {
    "disk": disk.make,
    "routh_sphere": sphere.make,
    "surface_ball": surface_ball.make,
    "cylinder": cylinder.make,
}

SYSTEMS = tuple(_BUILDERS)


def make_system(name: str, params=None, variant: str = "reduced4") -> SystemSpec:
    """Build system ``name`` with ``params`` (a mapping or parameter object)."""
    if name not in _BUILDERS:
        raise ConfigError(f"unknown system {name!r}; expected one of {', '.join(SYSTEMS)}")
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    return _BUILDERS[name](params, variant)


__all__ = ["make_system", "SYSTEMS", "VARIANTS", "SystemSpec", "equilibrium_residual",
           "domain_guard", "bivector_max", "DiskParams", "RouthSphereParams",
           "SurfaceBallParams", "CylinderParams", "Profile", "paraboloid", "quartic",
           "cosh_profile", "custom", "cylinder_analytic", "cylinder_casimirs",
           "cylinder_pencil", "cylinder_reconstruct", "jellet_integrals"]
