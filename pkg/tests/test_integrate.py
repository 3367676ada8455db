import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from nhpoisson import _rk
from nhpoisson.errors import ContractError, DomainError
from nhpoisson.integrate import (IntegratorConfig, Trajectory, compute_monitors, integrate,
                                 monitor_report)
from nhpoisson.multivec import coordinate
from nhpoisson.systems import cylinder_analytic, make_system

from conftest import FIXTURES

CYL_X0 = [0.0, 0.1, 0.2, 0.5]


def _cyl_error(dt, t_end=1.0):
    spec = make_system("cylinder")
    traj = integrate(spec, CYL_X0, IntegratorConfig(t_end=t_end, dt=dt, monitors=()))
    exact = cylinder_analytic(spec.params, CYL_X0, traj.times)
    return np.max(np.abs(traj.states - np.asarray(exact)))


@pytest.mark.parametrize("name,variant", [("disk", "reduced4"), ("disk", "extended5")])
def test_equilibrium_is_constant(name, variant):
    spec = make_system(name, None, variant)
    x0 = np.zeros(spec.dim)
    assert spec.equilibrium_residual(x0) == 0.0
    traj = integrate(spec, x0, IntegratorConfig(t_end=1.0, dt=1e-2))
    assert_array_equal(traj.states, np.broadcast_to(x0, traj.states.shape))
    assert monitor_report(traj)["energy"]["max_abs_drift"] == 0.0


def test_cylinder_relative_equilibrium():
    spec = make_system("cylinder")
    prm = spec.params
    x0 = np.array([0.3, 0.0, -prm.m * prm.g * prm.rho / (prm.M * 0.5), 0.5])
    traj = integrate(spec, x0, IntegratorConfig(t_end=2.0, dt=1e-2))
    assert np.max(np.abs(traj.states - x0)) < 1e-12


def test_cylinder_matches_analytic():
    assert _cyl_error(1e-3, 10.0) < 1e-6


def test_rk4_order():
    factor = _cyl_error(0.02) / _cyl_error(0.01)
    assert 12.0 <= factor <= 20.0


def test_disk_energy_conserved():
    spec = make_system("disk")
    cfg = IntegratorConfig(method="adaptive", t_end=10.0, rtol=1e-11, atol=1e-13, dt_max=1e-2)
    rep = monitor_report(integrate(spec, FIXTURES["disk"], cfg))
    assert rep["energy"]["max_rel_drift"] < 1e-6
    assert not rep["energy"]["flagged"]


@pytest.mark.parametrize("name", ["disk", "routh_sphere", "surface_ball", "cylinder"])
@pytest.mark.parametrize("rtol", [1e-8, 1e-9])
def test_adaptive_matches_fine_rk4(name, rtol):
    spec = make_system(name)
    x0 = FIXTURES[name]
    for t_end in (0.25, 0.5, 1.0):
        ref = integrate(spec, x0, IntegratorConfig(t_end=t_end, dt=1e-4, monitors=()))
        ada = integrate(spec, x0, IntegratorConfig(method="adaptive", t_end=t_end, rtol=rtol,
                                                   atol=rtol * 1e-3, monitors=()))
        assert ada.termination == "reached_t_end"
        assert ada.times[-1] == t_end
        err = np.max(np.abs(ada.states[-1] - ref.states[-1]))
        assert err < 10 * rtol * max(1.0, np.max(np.abs(ref.states[-1])))


@pytest.mark.parametrize("name", ["cylinder", "disk"])
def test_time_reversal(name):
    spec = make_system(name)
    x0 = np.array(FIXTURES[name])
    fwd = integrate(spec, x0, IntegratorConfig(t_end=1.0, dt=1e-3, monitors=()))
    back = integrate(spec, fwd.states[-1], IntegratorConfig(t_end=1.0, dt=1e-3, monitors=(),
                                                            reverse=True))
    assert back.reverse
    assert np.all(np.diff(back.times) > 0)
    assert np.max(np.abs(back.states[-1] - x0)) < 1e-7


def test_adaptive_reverse():
    spec = make_system("routh_sphere")
    x0 = np.array(FIXTURES["routh_sphere"])
    cfg = IntegratorConfig(method="adaptive", t_end=1.0, rtol=1e-11, atol=1e-13, monitors=())
    fwd = integrate(spec, x0, cfg)
    back = integrate(spec, fwd.states[-1], dataclasses.replace(cfg, reverse=True))
    assert back.times[-1] == 1.0
    assert np.max(np.abs(back.states[-1] - x0)) < 1e-8


def _fenced_disk(limit):
    spec = make_system("disk")
    return dataclasses.replace(spec, guard_kernel=lambda x, p: x[0] < limit, jit_ok=False)


@pytest.mark.parametrize("method", ["rk4", "adaptive"])
def test_left_domain_bisects_to_boundary(method):
    spec = _fenced_disk(0.5)
    cfg = IntegratorConfig(method=method, t_end=10.0, dt=1e-2, dt_min=1e-9, monitors=())
    traj = integrate(spec, FIXTURES["disk"], cfg)
    assert traj.termination == "left_domain"
    assert np.all(traj.states[:, 0] < 0.5)
    assert 0.5 - traj.states[-1, 0] < 1e-6
    assert np.all(np.diff(traj.times) > 0)


def test_rk4_left_domain_stops_near_exit_time():
    full = integrate(make_system("disk"), FIXTURES["disk"],
                     IntegratorConfig(t_end=10.0, dt=1e-3, monitors=()))
    exit_idx = np.argmax(full.states[:, 0] >= 0.5)
    cut = integrate(_fenced_disk(0.5), FIXTURES["disk"],
                    IntegratorConfig(t_end=10.0, dt=1e-3, dt_min=1e-10, monitors=()))
    assert full.times[exit_idx - 1] <= cut.times[-1] < full.times[exit_idx]


def test_step_underflow():
    spec = make_system("disk")
    cfg = IntegratorConfig(method="adaptive", t_end=10.0, rtol=1e-14, atol=1e-16, dt=0.5,
                           dt_min=0.1, monitors=("energy",))
    traj = integrate(spec, FIXTURES["disk"], cfg)
    assert traj.termination == "step_underflow"
    assert len(traj.monitors["energy"]) == len(traj.times)


def test_solver_underflow_and_stops():
    res = _rk.solve_adaptive(lambda t, y: -y, 0.0, [1.0], 2.0, 1e-10, 1e-12, stops=(0.5, 1.5))
    assert res.status == _rk.REACHED
    assert {0.5, 1.5, 2.0} <= set(res.times.tolist())
    assert abs(res.states[-1, 0] - np.exp(-2.0)) < 1e-9
    res = _rk.solve_adaptive(lambda t, y: y * y, 0.0, [1.0], 2.0, 1e-10, 1e-12)
    assert res.status in (_rk.UNDERFLOW, _rk.LEFT_DOMAIN)
    assert res.times[-1] < 1.0


def test_rk4_step_exact_for_cubic():
    y = _rk.rk4_step(lambda t, y: np.array([3 * t * t]), 1.0, np.array([1.0]), 0.5)
    assert_allclose(y, [1.0 + 1.5 ** 3 - 1.0], rtol=1e-15)


def test_partial_final_step():
    traj = integrate(make_system("cylinder"), CYL_X0, IntegratorConfig(t_end=0.105, dt=0.01))
    assert traj.times[-1] == 0.105
    assert_allclose(np.diff(traj.times)[:-1], 0.01, rtol=1e-12)


def test_x0_outside_domain():
    with pytest.raises(DomainError):
        integrate(make_system("disk"), [1.5, 0.0, 0.1, 0.1])
    with pytest.raises(ContractError):
        integrate(make_system("disk"), [np.nan, 0.0, 0.1, 0.1])
    with pytest.raises(ContractError):
        integrate(make_system("disk"), [[0.1, 0.0, 0.1, 0.1]] * 2)


@pytest.mark.parametrize("kwargs", [dict(dt=0.0), dict(dt=-1e-3), dict(t_end=0.0),
                                    dict(method="euler"), dict(rtol=0.0), dict(atol=-1.0),
                                    dict(dt_min=0.0), dict(dt_max=1e-15),
                                    dict(method="rk4", dt=None), dict(monitors=("nope",))])
def test_config_validation(kwargs):
    with pytest.raises(ContractError):
        IntegratorConfig(**kwargs)


@pytest.mark.parametrize("name,variant", [("disk", "reduced4"), ("disk", "extended5"),
                                          ("surface_ball", "extended5"), ("cylinder", "reduced4")])
def test_trajectory_shape_and_guard(name, variant):
    spec = make_system(name, None, variant)
    x0 = np.array(FIXTURES[name])
    if variant == "extended5":
        x0 = spec.extras["lift"](x0)
    traj = integrate(spec, x0, IntegratorConfig(t_end=0.5, dt=1e-2,
                                                monitors=("energy", "phi", "casimirs",
                                                          "hamiltonian_residual")))
    assert traj.termination == "reached_t_end"
    assert np.all(np.diff(traj.times) > 0)
    assert traj.states.shape == (len(traj), spec.dim)
    assert np.all(spec.domain_guard(traj.states))
    assert all(len(v) == len(traj) for v in traj.monitors.values())
    assert ("phi" in traj.monitors) == (variant == "extended5")
    assert np.max(traj.monitors["hamiltonian_residual"]) < 1e-9


def test_custom_monitor():
    spec = make_system("cylinder")
    s4 = coordinate(3, 4)
    traj = integrate(spec, CYL_X0, IntegratorConfig(t_end=1.0, dt=1e-2,
                                                    monitors=("spin",), custom={"spin": s4}))
    assert_allclose(traj.monitors["spin"], 0.5, rtol=0, atol=1e-15)
    with pytest.raises(ContractError):
        compute_monitors(spec, traj.states, ("spin",))


def test_monitor_report_examples():
    x = np.tile([0.1, 0.0, 0.5, 0.5], (5, 1))
    traj = Trajectory(np.arange(5.0), x, {"energy": np.full(5, 2.5)}, "reached_t_end")
    rep = monitor_report(traj)
    assert rep["energy"]["max_abs_drift"] == 0.0 and rep["energy"]["max_rel_drift"] == 0.0
    assert not rep["energy"]["flagged"]

    spec = make_system("disk")
    good = integrate(spec, FIXTURES["disk"], IntegratorConfig(t_end=1.0, dt=1e-3))
    bad = good.states.copy()
    bad[len(bad) // 2, 3] += 1e-3
    e = compute_monitors(spec, bad)["energy"]
    rep = monitor_report(Trajectory(good.times, bad, {"energy": e}, good.termination))
    assert rep["energy"]["flagged"] and rep["energy"]["max_abs_drift"] > 1e-5
    # relative drift uses max(1, |initial|)
    small = Trajectory(np.arange(2.0), x[:2], {"m": np.array([1e-3, 2e-3])}, "reached_t_end")
    assert monitor_report(small)["m"]["max_rel_drift"] == pytest.approx(1e-3)
    with pytest.raises(ContractError):
        monitor_report(Trajectory(np.array([]), np.zeros((0, 4)), {}, "reached_t_end"))
