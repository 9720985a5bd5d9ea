"""Compare the compiled and pure-Python kernels on representative workloads.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both backends are called with identical inputs; the script checks that they
agree and prints the median wall time of each.
"""
from __future__ import annotations

import argparse
import math
import statistics
import time

import numpy as np

from fastdiff import _pykernels
from fastdiff.parabolic import AnnulusGrid
from fastdiff.params import Params, derive
from fastdiff.profile import MAX_LOG_STEP, default_rho0, taylor_init
from fastdiff.reference import BarenblattSolution

try:
    from fastdiff import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def profile_case():
    p = Params(n=3, m=0.1, rho1=1.0, beta=1.0, lam=1.0)
    c = derive(p)
    tol = 1e-10
    rho0 = default_rho0(p, c, tol)
    w, wr = taylor_init(p, c, rho0)
    h0 = min(MAX_LOG_STEP, 0.5 * rho0 / (c.a2 * w ** (1 - p.m)))
    args = (math.log(rho0), math.log(1e3), math.log(w), rho0 * wr / w,
            c.a1, c.a2, c.a3, p.m, tol, tol, h0, MAX_LOG_STEP, 10_000_000)
    return args, lambda out: out[2][-1]


def newton_case(nr=401):
    p = Params(n=3, m=0.2, rho1=1.0, beta=1.0, lam=1.0)
    bar = BarenblattSolution(p, 1.0, 1.0)
    g = AnnulusGrid(0.1, 5.0, nr, 0.5, 50)
    cm, cp = g.coefficients(p.n)
    dt = g.dt
    u0 = bar(g.r, 0.0)
    guess = u0.copy()
    guess[[0, -1]] = bar(g.r[[0, -1]], dt)
    return (u0, guess, cm, cp, dt, p.m, 1e-10, 25), lambda out: out[1]


def timed(fn, args, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    cases = [("profile_dp45 (rho to 1e3, tol 1e-10)", "profile_dp45", profile_case()),
             ("implicit_euler_step (401 nodes)", "implicit_euler_step", newton_case())]
    print(f"{'kernel':<40}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max rel diff':>14}")
    for label, name, (fargs, key) in cases:
        t_py, out_py = timed(getattr(_pykernels, name), fargs, args.repeat)
        if _ckernels is None:
            print(f"{label:<40}{t_py:>12.4g}{'n/a':>12}")
            continue
        t_c, out_c = timed(getattr(_ckernels, name), fargs, args.repeat)
        a, b = np.asarray(key(out_py)), np.asarray(key(out_c))
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        print(f"{label:<40}{t_py:>12.4g}{t_c:>12.4g}{t_py / t_c:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
