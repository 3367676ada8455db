"""Compare the numba kernels with the pure-numpy fallback.

Each variant runs in a fresh interpreter because the backend is chosen at
import time from ``NHPOISSON_DISABLE_NUMBA``.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from nhpoisson import _accel, _kernels
from nhpoisson.integrate import _kernels_for
from nhpoisson.systems import make_system

repeat = int(sys.argv[1])


def best(fn):
    fn()  # warm-up (includes compilation)
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return min(ts)


out = {"numba": _accel.USE_NUMBA}
for name, x0 in (("cylinder", [0.0, 0.1, 0.2, 0.5]), ("routh_sphere", [0.2, 0.1, 0.3, 1.0])):
    spec = make_system(name)
    rhs, guard, loop = _kernels_for(spec)
    x = np.array(x0)
    out[f"rk4_{name}_10k_steps"] = best(lambda: loop(rhs, guard, x, spec.pvec, 1e-3, 10_000))

rng = np.random.default_rng(0)
for B in (1_000, 20_000):
    W = rng.normal(size=(B, 5, 5))
    W = W - W.transpose(0, 2, 1)
    D = rng.normal(size=(B, 5, 5, 5))
    out[f"schouten_{B}_points"] = best(lambda: _kernels.schouten_contract(W, D))
print(json.dumps(out))
"""


def run(disable, repeat):
    env = dict(os.environ)
    env.pop("NHPOISSON_DISABLE_NUMBA", None)
    if disable:
        env["NHPOISSON_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", CHILD, str(repeat)], env=env, check=True,
                         capture_output=True, text=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    if not fast.pop("numba"):
        print("numba is not importable; both runs use numpy")
    slow.pop("numba")
    print(f"{'kernel':32s} {'numba [s]':>12s} {'numpy [s]':>12s} {'speed-up':>9s}")
    for key in fast:
        print(f"{key:32s} {fast[key]:12.5f} {slow[key]:12.5f} {slow[key] / fast[key]:8.1f}x")


if __name__ == "__main__":
    main()
