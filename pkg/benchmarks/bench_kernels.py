"""Compare the compiled kernels against the NumPy/pure-Python fallback.

Run:  python3 benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from equiwave import _kernels
from equiwave._kernels import _ref

try:
    from equiwave._kernels import _core
except ImportError:
    _core = None


def _setup(n=2000, l=1):
    h = math.pi / n
    rc = (np.arange(n) + 0.5) * h
    fc, dfc = np.sin(rc), np.cos(rc)
    phi = rc.copy()
    u = np.stack([np.sin(phi), np.zeros(n), np.cos(phi)], axis=1)
    v = 0.5 * np.stack([-u[:, 1], u[:, 0], np.zeros(n)], axis=1)
    return u, v, fc, dfc, h


def bench_leapfrog(mod, nsteps=2000, repeats=3):
    u, v, fc, dfc, h = _setup()
    dt = 0.4 * h / 2.0
    best = math.inf
    for _ in range(repeats):
        uu, vv = u.copy(), v.copy()
        t0 = time.perf_counter()
        mod.leapfrog_steps(uu, vv, fc, dfc, h, dt, 1, nsteps)
        best = min(best, time.perf_counter() - t0)
    return best, uu


def bench_trace(mod, shots=2000, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        acc = 0.0
        for i in range(shots):
            psi = 0.2 + 1e-4 * i
            acc += mod.trace_polar(0.3, psi, 1.2, 256, 1, 0.05)[0]
        best = min(best, time.perf_counter() - t0)
    return best, acc


def main():
    print(f"selected kernel implementation: {_kernels.IMPL}")
    t_ref, u_ref = bench_leapfrog(_ref)
    print(f"leapfrog 2000 steps x 2000 cells  python: {t_ref:8.3f} s")
    if _core is not None:
        t_c, u_c = bench_leapfrog(_core)
        err = float(np.max(np.abs(u_ref - u_c)))
        print(f"                                  cython: {t_c:8.3f} s "
              f"(x{t_ref / t_c:.1f}, max diff {err:.2e})")

    t_ref, a_ref = bench_trace(_ref)
    print(f"geodesic shots 2000 x 256 steps   python: {t_ref:8.3f} s")
    if _core is not None:
        t_c, a_c = bench_trace(_core)
        print(f"                                  cython: {t_c:8.3f} s "
              f"(x{t_ref / t_c:.1f}, diff {abs(a_ref - a_c):.2e})")


if __name__ == "__main__":
    main()
