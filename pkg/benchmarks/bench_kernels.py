"""Time the numba and numpy forms of each hot kernel on identical inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5] [--size 1.0]

Results are checked for agreement before timing. The first numba call (JIT
compilation or cache load) is excluded.
"""
import argparse
import time

import numpy as np

from diracwidth import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(size, rng):
    x = rng.uniform(1e-3, 30.0, int(200_000 * size))
    P = rng.normal(size=(int(200_000 * size), 3)) * 5.0
    Pf = rng.normal(size=(int(20_000 * size), 3)) * 4.0
    W = rng.uniform(size=len(Pf))
    A = rng.normal(size=(len(Pf), 4)) + 1j * rng.normal(size=(len(Pf), 4))
    X = rng.normal(size=(64, 3))
    return {
        "k01": (lambda: kernels.k01_numba(x), lambda: kernels.k01_numpy(x), len(x)),
        "spinor_and_gradient": (lambda: kernels.spinor_and_gradient_numba(P, 1.0),
                                lambda: kernels.spinor_and_gradient_numpy(P, 1.0), len(P)),
        "fourier_sum": (lambda: kernels.fourier_sum_numba(Pf, W, A, X),
                        lambda: kernels.fourier_sum_numpy(Pf, W, A, X), len(Pf) * len(X)),
    }


def max_rel_diff(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return max(float(np.max(np.abs(u - v)) / max(np.max(np.abs(v)), 1e-300)) for u, v in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=float, default=1.0, help="problem size multiplier")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<22}{'work':>12}{'numba [ms]':>13}{'numpy [ms]':>13}{'speedup':>10}{'max rel diff':>15}")
    for name, (fast, slow, work) in cases(args.size, rng).items():
        diff = max_rel_diff(fast(), slow())  # also triggers compilation
        tn = best_of(fast, args.repeat)
        tp = best_of(slow, args.repeat)
        print(f"{name:<22}{work:>12d}{tn * 1e3:>13.2f}{tp * 1e3:>13.2f}{tp / tn:>10.1f}{diff:>15.1e}")


if __name__ == "__main__":
    main()
