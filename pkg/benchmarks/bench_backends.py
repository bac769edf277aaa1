"""Compare the compiled kernel core against the pure-numpy fallback.

Times the three hot kernels in isolation and one full driver run per
backend, printing a table with speedup ratios.  Results are value-equal
across backends up to float reduction order; bit-level determinism holds
within a backend.

Usage: python benchmarks/bench_backends.py [--iters N]
"""
import argparse
import time

import numpy as np

import fedsaddle as fs
from fedsaddle import kernels


def _timeit(fn, iters):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(iters):
        fn()
    return (time.perf_counter() - t0) / iters


def kernel_benchmarks(iters):
    rng = np.random.default_rng(0)
    d1 = d2 = 20
    n, b = 8, 2
    hess = rng.standard_normal((d1, d1))
    hess = np.ascontiguousarray(0.5 * (hess + hess.T))
    lin = np.ascontiguousarray(rng.standard_normal((n, d1)))
    coup = np.ascontiguousarray(rng.standard_normal((d1, d2)))
    X = rng.standard_normal((n, d1))
    Y = rng.standard_normal((n, d2))
    PX, PY = X.copy(), Y.copy()
    U = rng.standard_normal((n, d1))
    V = rng.standard_normal((n, d2))
    noise1 = rng.standard_normal((b, d1 + d2))
    noise = rng.standard_normal((n, b, d1 + d2))
    cases = {
        "batch_grads (d=20, b=2)": lambda: kernels.quad_batch_grads(
            hess, lin[0], coup, 1.0, 0.1, X[0], Y[0], noise1),
        "vr_update (d=20, b=2)": lambda: kernels.quad_vr_update(
            hess, lin[0], coup, 1.0, 0.1, X[0], Y[0], PX[0], PY[0],
            U[0], V[0], noise1, 0.1, 0.1),
        "vr_round (8 clients)": lambda: kernels.quad_vr_round(
            hess, lin, coup, 1.0, 0.1, X, Y, PX, PY, U, V, noise,
            0.1, 0.1, 1e-6, 1e-6, 1),
    }
    return {name: _timeit(fn, iters) for name, fn in cases.items()}


def driver_benchmark():
    problem = fs.make_quadratic_saddle(d1=20, d2=20, num_clients=8, kappa=10.0,
                                       mu=1.0, noise_sigma=0.005, zeta=1.0, seed=1)
    hp = fs.theorem_schedule_ncpl(kappa=10.0, L=10.0, N=8, b=10, nu=1.0, T0=64).replace(T=2000)
    opts = fs.RecordingOptions(every=100)
    t0 = time.perf_counter()
    fs.fedsgda_m(problem, hp, seed=0, opts=opts)
    return time.perf_counter() - t0, hp.T


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--iters", type=int, default=20000)
    args = parser.parse_args()

    results = {}
    for backend in kernels.available_backends():
        with kernels.forced_backend(backend):
            rows = kernel_benchmarks(args.iters)
            drv, T = driver_benchmark()
            rows[f"vr driver ({T} iters, N=8, b=10)"] = drv
            results[backend] = rows

    names = list(next(iter(results.values())))
    width = max(len(n) for n in names)
    header = f"{'case':<{width}}" + "".join(f"  {b:>12}" for b in results)
    if len(results) > 1:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name in names:
        line = f"{name:<{width}}"
        times = [results[b][name] for b in results]
        for t in times:
            line += f"  {t * 1e6:>10.2f}us" if t < 0.1 else f"  {t:>11.3f}s"
        if len(times) > 1:
            slow = max(times)
            fast = min(times)
            line += f"  {slow / fast:>7.1f}x"
        print(line)
    if "compiled" not in results:
        print("\ncompiled core not built; only the pure backend was timed")


if __name__ == "__main__":
    main()
