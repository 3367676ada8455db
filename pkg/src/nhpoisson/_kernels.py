"""Hot loops: the Schouten contraction and the fixed-step RK4 driver.

Both have a numba version and a numpy version; ``_accel.USE_NUMBA`` picks
one at import time.  The numpy versions are always importable as
``*_numpy`` so benchmarks and tests can compare the two.
"""
import numpy as np

from . import _accel


def schouten_contract_numpy(W, D):
    """2 * cyclic sum of ``W^il D^jk_l`` over a batch.

    ``W`` is ``(B, n, n)``, ``D[b, j, k, l] = d_l W^jk`` is ``(B, n, n, n)``.
    The sum over ``l`` runs in the same order as the compiled loop so both
    paths round identically.
    """
    B, n = W.shape[0], W.shape[1]
    acc = np.zeros((B, n, n, n))
    for l in range(n):
        Dl = D[:, :, :, l]
        a = W[:, :, None, None, l] * Dl[:, None, :, :]
        b = W[:, None, :, None, l] * Dl.transpose(0, 2, 1)[:, :, None, :]
        c = W[:, None, None, :, l] * Dl[:, :, :, None]
        acc += a + b + c
    out = np.zeros((B, n, n, n))
    i, j, k = _upper(n)
    v = 2.0 * acc[:, i, j, k]
    for p, s in (((i, j, k), 1.0), ((j, k, i), 1.0), ((k, i, j), 1.0),
                 ((j, i, k), -1.0), ((i, k, j), -1.0), ((k, j, i), -1.0)):
        out[:, p[0], p[1], p[2]] = s * v
    return out


def _upper(n):
    """Index arrays of the triples ``i < j < k``."""
    t = [(i, j, k) for i in range(n) for j in range(i + 1, n) for k in range(j + 1, n)]
    return tuple(np.array(c, dtype=int) for c in zip(*t)) if t else (np.zeros(0, int),) * 3


def _schouten_loops(W, D):
    B = W.shape[0]
    n = W.shape[1]
    out = np.zeros((B, n, n, n))
    for b in range(B):
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    acc = 0.0
                    for l in range(n):
                        acc += (W[b, i, l] * D[b, j, k, l] + W[b, j, l] * D[b, k, i, l]
                                + W[b, k, l] * D[b, i, j, l])
                    v = 2.0 * acc
                    # fill the six signed permutations
                    out[b, i, j, k] = v
                    out[b, j, k, i] = v
                    out[b, k, i, j] = v
                    out[b, j, i, k] = -v
                    out[b, i, k, j] = -v
                    out[b, k, j, i] = -v
    return out


def rk4_loop_numpy(rhs, guard, x0, p, dt, n_steps):
    """Classical RK4 from ``x0`` for ``n_steps`` steps of size ``dt``.

    Returns ``(states, k)`` where ``states[:k + 1]`` are valid.  Stops early
    when a new state fails ``guard`` or is not finite.
    """
    n = x0.shape[0]
    out = np.empty((n_steps + 1, n))
    out[0] = x0
    x = x0.copy()
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for k in range(n_steps):
        k1 = rhs(x, p)
        k2 = rhs(x + h2 * k1, p)
        k3 = rhs(x + h2 * k2, p)
        k4 = rhs(x + dt * k3, p)
        xn = x + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(xn)) or not guard(xn, p):
            return out, k
        out[k + 1] = xn
        x = xn
    return out, n_steps


if _accel.USE_NUMBA:
    schouten_contract = _accel.numba.njit(cache=True)(_schouten_loops)
    rk4_loop = _accel.numba.njit(rk4_loop_numpy)
else:
    schouten_contract = schouten_contract_numpy
    rk4_loop = rk4_loop_numpy
