"""Explicit Runge-Kutta steppers: classical RK4 and Dormand-Prince 5(4).

The adaptive driver is written here rather than taken from scipy because it
must reject steps that leave a domain, shrink towards a floor ``dt_min`` and
report an underflow instead of raising.
"""
from __future__ import annotations

import numpy as np

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100,
                1 / 40])
_E = _B - _B4

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0

REACHED = "reached_t_end"
LEFT_DOMAIN = "left_domain"
UNDERFLOW = "step_underflow"


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def dopri_step(f, t, y, h, k1):
    """One DOPRI5 step; returns ``(y_new, error_estimate, f(t + h, y_new))``."""
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(f(t + _C[i] * h, yi))
    y_new = y + h * sum(b * k for b, k in zip(_B[:6], ks[:6]))
    err = h * sum(e * k for e, k in zip(_E, ks))
    return y_new, err, ks[6]


def _error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def _initial_step(f, t0, y0, f0, direction, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = f(t0 + direction * h0, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1)


class AdaptiveResult:
    """Accepted nodes of an adaptive solve."""

    def __init__(self, times, states, status, n_rejected, h_last):
        self.times = np.asarray(times)
        self.states = np.asarray(states)
        self.status = status
        self.n_rejected = n_rejected
        self.h_last = h_last


def solve_adaptive(f, t0, y0, t_end, rtol, atol, dt_min=1e-12, dt_max=np.inf, dt_init=None,
                   accept=None, stops=(), max_steps=10_000_000):
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t_end`` with DOPRI5.

    Every accepted step is recorded.  Steps are shortened to land exactly on
    each time in ``stops`` and on ``t_end``.  A trial state for which
    ``accept(y)`` is false (or that is not finite) is rejected and the step
    halved; once the step would fall below ``dt_min`` the solve stops with
    status ``left_domain`` (domain) or ``step_underflow`` (accuracy).
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    span = float(t_end) - t
    times, states = [t], [y.copy()]
    if span == 0.0:
        return AdaptiveResult(times, states, REACHED, 0, 0.0)
    direction = 1.0 if span > 0 else -1.0
    targets = sorted({float(s) for s in stops if (s - t) * direction > 0
                      and (float(t_end) - s) * direction > 0} | {float(t_end)},
                     key=lambda s: direction * s)
    k1 = f(t, y)
    h = abs(dt_init) if dt_init else _initial_step(f, t, y, k1, direction, rtol, atol)
    h = min(max(h, dt_min), dt_max, abs(span))
    n_rej = 0
    ti = 0
    for _ in range(max_steps):
        target = targets[ti]
        remaining = abs(target - t)
        step = min(h, remaining)
        land = step == remaining
        hs = direction * step
        y_new, err, k_new = dopri_step(f, t, y, hs, k1)
        inside = bool(np.all(np.isfinite(y_new))) and (accept is None or bool(accept(y_new)))
        if not inside:
            n_rej += 1
            h = 0.5 * step
            if h < dt_min:
                return AdaptiveResult(times, states, LEFT_DOMAIN, n_rej, step)
            continue
        en = _error_norm(err, y, y_new, rtol, atol)
        if en <= 1.0:
            t = target if land else t + hs
            y = y_new
            k1 = k_new
            times.append(t)
            states.append(y.copy())
            fac = FAC_MAX if en == 0.0 else min(FAC_MAX, max(FAC_MIN, SAFETY * en ** -0.2))
            h = min(max(step * fac, dt_min), dt_max) if not land else max(h, dt_min)
            if land:
                ti += 1
                if ti == len(targets):
                    return AdaptiveResult(times, states, REACHED, n_rej, step)
        else:
            n_rej += 1
            h = step * max(FAC_MIN, SAFETY * en ** -0.2)
            if h < dt_min:
                return AdaptiveResult(times, states, UNDERFLOW, n_rej, step)
    return AdaptiveResult(times, states, UNDERFLOW, n_rej, h)
