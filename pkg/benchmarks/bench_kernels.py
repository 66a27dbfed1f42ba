"""Benchmark the compiled kernels against the pure-Python reference.

Usage:  python benchmarks/bench_kernels.py [--repeat N]

Covers the three hot loops: cyclic Jacobi sweeps, LU factor+solve, and the
RK4 steppers for the closed loop and the reduced model.
"""

import argparse
import time

import numpy as np

from rank1stab._kernels import pyref

try:
    from rank1stab._kernels import _core
except ImportError:
    _core = None

from rank1stab.agc import AreaSpec, GeneratorSpec, NetworkSpec, TieLine
from rank1stab.reduced import build_reduced


def two_area_pack():
    gens = tuple(
        GeneratorSpec(0.1, 0.5, 1.0, (0.5, 1.5), p, True) for p in (0.6, 0.4)
    )
    areas = tuple(
        AreaSpec(f"area{k + 1}", 10.0, 1.0, gens, 21.0, 100.0,
                 load_dev=0.1 if k == 0 else 0.0)
        for k in range(2)
    )
    return NetworkSpec(areas, (TieLine("area1", "area2", 5.0),), np.zeros(2))


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_jacobi(mod, n, repeat):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((n, n))
    a = np.ascontiguousarray(a + a.T)
    thr = 1e-12 * np.linalg.norm(a)

    def run():
        w = a.copy()
        v = np.eye(n)
        mod.jacobi_eig(w, v, thr, 100)

    return timeit(run, repeat)


def bench_lu(mod, n, repeat):
    rng = np.random.default_rng(1)
    a = rng.standard_normal((n, n))
    b = rng.standard_normal(n)

    def run():
        lu = a.copy()
        piv = np.empty(n, dtype=np.int64)
        mod.lu_factor(lu, piv, 1e-300)
        x = b.copy()
        mod.lu_solve(lu, piv, x)

    return timeit(run, repeat)


def bench_rk4_full(mod, n_steps, repeat):
    net = two_area_pack()
    p = net.arrays()
    dim = 5 * net.n_areas + net.n_gens
    rec = np.empty((n_steps // 100 + 1, dim))
    args = (p["m_inv"], p["d_damp"], p["bias"], p["inv_tau"], p["load"],
            p["gen_area"], p["inv_r"], p["inv_tt"], p["alpha"], p["lo"],
            p["hi"], p["tie_a"], p["tie_b"], p["tie_k"], p["inv_ftc"])

    def run():
        mod.rk4_full(np.zeros(dim), *args, 0.01, n_steps, 100, rec)

    return timeit(run, repeat)


def bench_rk4_reduced(mod, n_steps, repeat):
    model = build_reduced(two_area_pack())
    gen_area = np.array([0, 0, 1, 1], dtype=np.int64)
    alphas = np.concatenate([p.alphas for p in model.phi])
    lo = np.concatenate([p.lo for p in model.phi])
    hi = np.concatenate([p.hi for p in model.phi])
    rec = np.empty((n_steps // 10 + 1, 2))

    def run():
        mod.rk4_reduced(np.zeros(2), model.b_matrix.copy(),
                        model.tau_seconds(), model.load_dev, gen_area,
                        alphas, lo, hi, 1.0, n_steps, 10, rec)

    return timeit(run, repeat)


CASES = [
    ("jacobi_eig n=8", lambda m, r: bench_jacobi(m, 8, r)),
    ("jacobi_eig n=24", lambda m, r: bench_jacobi(m, 24, r)),
    ("lu n=60", lambda m, r: bench_lu(m, 60, r)),
    ("rk4_full 20k steps", lambda m, r: bench_rk4_full(m, 20_000, r)),
    ("rk4_reduced 20k steps", lambda m, r: bench_rk4_reduced(m, 20_000, r)),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    print(f"{'case':24s} {'python':>12s} {'compiled':>12s} {'speedup':>9s}")
    for name, fn in CASES:
        t_py = fn(pyref, args.repeat)
        if _core is None:
            print(f"{name:24s} {t_py * 1e3:10.2f}ms {'n/a':>12s} {'n/a':>9s}")
            continue
        t_c = fn(_core, args.repeat)
        print(f"{name:24s} {t_py * 1e3:10.2f}ms {t_c * 1e3:10.2f}ms "
              f"{t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
