"""Fixed-step RK4 and adaptive DOPRI5 integration of the reduced systems, with
invariant monitors evaluated at every accepted step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _accel, _kernels, _rk, linflow
from .errors import ContractError, DomainError
from .multivec import ScalarField, as_points, sharp

METHODS = ("rk4", "adaptive")
MONITORS = ("energy", "phi", "casimirs", "hamiltonian_residual")
MAX_BISECTIONS = 10_000


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``dt`` is the RK4 step (and the initial step for ``adaptive``, if set).
    ``reverse`` integrates the time-reversed flow; trajectory times are then
    the elapsed time ``|t|``.  ``casimir_base`` is the base point ``x1_0``
    of the linear-flow Casimirs (default: the initial ``x1``).
    """

    method: str = "rk4"
    t_end: float = 10.0
    dt: float | None = 1e-3
    rtol: float = 1e-9
    atol: float = 1e-12
    dt_min: float = 1e-12
    dt_max: float = np.inf
    monitors: tuple = ("energy",)
    custom: Mapping[str, ScalarField] = field(default_factory=dict)
    reverse: bool = False
    casimir_base: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.t_end > 0:
            raise ContractError("t_end must be positive")
        if self.method == "rk4" and not (self.dt is not None and self.dt > 0):
            raise ContractError("rk4 needs a positive dt")
        if self.dt is not None and not self.dt > 0:
            raise ContractError("dt must be positive")
        if not (self.rtol > 0 and self.atol > 0 and self.dt_min > 0):
            raise ContractError("rtol, atol and dt_min must be positive")
        if not self.dt_max >= self.dt_min:
            raise ContractError("dt_max must be at least dt_min")
        bad = [m for m in self.monitors if m not in MONITORS and m not in self.custom]
        if bad:
            raise ContractError(f"unknown monitor(s): {', '.join(bad)}")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    monitors: dict
    termination: str
    coords: tuple = ()
    reverse: bool = False

    def __len__(self):
        return len(self.times)


_compiled = {}


def _compiled_kernels(spec):
    key = (spec.rhs_kernel, spec.guard_kernel)
    if key not in _compiled:
        nb = _accel.numba
        _compiled[key] = (nb.njit(spec.rhs_kernel), nb.njit(spec.guard_kernel))
    return _compiled[key]


def _kernels_for(spec):
    """``(rhs, guard, loop)`` for the fastest available path."""
    if _accel.USE_NUMBA and spec.jit_ok:
        rhs, guard = _compiled_kernels(spec)
        return rhs, guard, _kernels.rk4_loop
    return spec.rhs_kernel, spec.guard_kernel, _kernels.rk4_loop_numpy


def _step_count(t_end, dt):
    n = int(round(t_end / dt))
    if abs(n * dt - t_end) <= 1e-9 * t_end:
        return n, 0.0
    n = int(np.floor(t_end / dt))
    return n, t_end - n * dt


def _inside(guard, x, p):
    return bool(np.all(np.isfinite(x))) and bool(guard(x, p))


def _integrate_rk4(spec, x0, cfg):
    rhs, guard, loop = _kernels_for(spec)
    p = spec.pvec
    sign = -1.0 if cfg.reverse else 1.0
    dt = cfg.dt
    n, rest = _step_count(cfg.t_end, dt)
    out, k = loop(rhs, guard, x0, p, sign * dt, n)
    times = list(dt * np.arange(k + 1))
    states = list(out[:k + 1])
    if k == n and rest > 0.0:
        o2, k2 = loop(rhs, guard, out[n], p, sign * rest, 1)
        if k2 == 1:
            return np.array(times + [cfg.t_end]), np.array(states + [o2[1]]), _rk.REACHED
        dt = rest
    elif k == n:
        return np.array(times), np.array(states), _rk.REACHED
    # the next step would leave the domain: bisect it down to dt_min
    t, x, h = times[-1], states[-1], 0.5 * dt
    for _ in range(MAX_BISECTIONS):
        if h < cfg.dt_min:
            break
        o2, k2 = loop(rhs, guard, x, p, sign * h, 1)
        if k2 == 1:
            t, x = t + h, o2[1]
            times.append(t)
            states.append(x)
        else:
            h *= 0.5
    return np.array(times), np.array(states), _rk.LEFT_DOMAIN


def _integrate_adaptive(spec, x0, cfg):
    rhs, guard = spec.rhs_kernel, spec.guard_kernel
    if _accel.USE_NUMBA and spec.jit_ok:
        rhs, guard = _compiled_kernels(spec)
    p = spec.pvec
    sign = -1.0 if cfg.reverse else 1.0
    res = _rk.solve_adaptive(lambda t, y: np.asarray(rhs(y, p)), 0.0, x0, sign * cfg.t_end,
                             cfg.rtol, cfg.atol, dt_min=cfg.dt_min, dt_max=cfg.dt_max,
                             dt_init=cfg.dt, accept=lambda y: bool(guard(y, p)))
    return np.abs(res.times), res.states, res.status


def casimir_columns(spec, states, base=None) -> dict:
    """Casimir values along ``states``: closed forms for the cylinder, the
    linear-flow pair ``(c1, c2)`` otherwise (plus Jellet's ``j, k`` for Routh's
    sphere)."""
    states = np.asarray(states, dtype=float)
    if spec.name == "cylinder":
        from .systems.cylinder import cylinder_casimirs
        c1, c2, c3 = cylinder_casimirs(spec.params, states)
        return {"c1": c1, "c2": c2, "c3": c3}
    curve = linflow.CoefficientCurve.from_system(spec)
    x1_0 = states[0, 0] if base is None else base
    c = linflow.casimir_values(curve, x1_0, states)
    cols = {"c1": c[:, 0], "c2": c[:, 1]}
    if spec.name == "routh_sphere":
        from .systems.sphere import jellet_integrals
        cols["j"], cols["k"] = jellet_integrals(spec.params, states)
    return cols


def compute_monitors(spec, states, names=("energy",), custom=None, casimir_base=None) -> dict:
    """Evaluate the named monitors on an array of states."""
    states = np.asarray(states, dtype=float)
    custom = custom or {}
    out = {}
    for name in names:
        if name == "energy":
            out["energy"] = spec.energy(states)
        elif name == "phi":
            if spec.phi is not None:
                out["phi"] = spec.phi(states)
        elif name == "casimirs":
            out.update(casimir_columns(spec, states, casimir_base))
        elif name == "hamiltonian_residual":
            v = spec.vf(states)
            w = sharp(spec.bivector(), spec.energy.gradient(states), states)
            out["hamiltonian_residual"] = np.max(np.abs(v - w), axis=-1)
        elif name in custom:
            out[name] = custom[name](states)
        else:
            raise ContractError(f"unknown monitor {name!r}")
    return out


def integrate(spec, x0, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate ``spec.vf`` from ``x0``.

    Stops early with ``termination == "left_domain"`` when no step down to
    ``dt_min`` stays in the domain, or ``"step_underflow"`` when the adaptive
    controller cannot meet the tolerance.
    """
    cfg = cfg or IntegratorConfig()
    x0 = np.array(as_points(x0, spec.dim), dtype=float)
    if x0.ndim != 1:
        raise ContractError("x0 must be a single point")
    if not spec.domain_guard(x0):
        raise DomainError(f"initial state {x0.tolist()} is outside the domain of {spec.name}")
    if cfg.method == "rk4":
        times, states, status = _integrate_rk4(spec, x0, cfg)
    else:
        times, states, status = _integrate_adaptive(spec, x0, cfg)
    mons = compute_monitors(spec, states, cfg.monitors, cfg.custom, cfg.casimir_base)
    return Trajectory(times, states, mons, status, spec.coords, cfg.reverse)


def monitor_report(traj: Trajectory, threshold: float = 1e-6) -> dict:
    """Per-monitor drift from the initial value.

    Relative drift divides by ``max(1, |initial|)``; ``flagged`` marks
    monitors whose relative drift exceeds ``threshold``.  The Hamiltonian
    residual is reported by its maximum instead.
    """
    if len(traj.times) == 0:
        raise ContractError("empty trajectory")
    report = {}
    for name, vals in traj.monitors.items():
        vals = np.asarray(vals, dtype=float)
        if name == "hamiltonian_residual":
            m = float(np.max(vals))
            report[name] = {"max": m, "flagged": bool(m > threshold)}
            continue
        v0 = float(vals[0])
        drift = float(np.max(np.abs(vals - v0)))
        rel = drift / max(1.0, abs(v0))
        report[name] = {"initial": v0, "max_abs_drift": drift, "max_rel_drift": rel,
                        "flagged": bool(rel > threshold or not np.isfinite(rel))}
    return report
