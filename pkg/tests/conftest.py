import sys

import numpy as np
import pytest

from nhpoisson.integrate import IntegratorConfig, integrate
from nhpoisson.systems import make_system

VARIANTS = [("disk", "reduced4"), ("disk", "extended5"),
            ("routh_sphere", "reduced4"), ("routh_sphere", "extended5"),
            ("surface_ball", "reduced4"), ("surface_ball", "extended5"),
            ("cylinder", "reduced4")]

FIXTURES = {
    "disk": (0.1, 0.0, 0.5, 0.5),
    "routh_sphere": (0.6, 0.0, 0.4, 1.0),
    "surface_ball": (0.5, 0.2, 0.2, 0.5),
    "cylinder": (0.0, 0.1, 0.2, 0.5),
}


def variant_id(pair):
    return "-".join(pair)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jitted right-hand sides once, so timed tests measure runs."""
    cfg = IntegratorConfig(t_end=2e-3, dt=1e-3, monitors=())
    for name, variant in VARIANTS:
        spec = make_system(name, None, variant)
        x0 = np.array(FIXTURES[name], dtype=float)
        if variant == "extended5":
            x0 = spec.extras["lift"](x0)
        integrate(spec, x0, cfg)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240611))


@pytest.fixture(params=VARIANTS, ids=variant_id)
def spec(request):
    name, variant = request.param
    return make_system(name, None, variant)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
