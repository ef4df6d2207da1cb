"""Compare the numba and numpy implementations of the hot kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Both paths are always importable; ``HS2_NUMBA=0`` only changes which one the
package dispatches to.
"""

import argparse
import time

import numpy as np

from hs2 import kernels


def best_of(fn, repeat):
    fn()  # warm-up (JIT compilation, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    for n, n_pts in ((256, 64), (4096, 64), (32768, 65)):
        coef = np.fft.rfft(rng.normal(size=n))
        coef[n // 3 + 1:] = 0.0
        pts = rng.uniform(0, 1, n_pts)
        yield (f"trig_eval n={n} points={n_pts}",
               lambda c=coef, n=n, p=pts: kernels.trig_eval_numba(c, n, p),
               lambda c=coef, n=n, p=pts: kernels.trig_eval_numpy(c, n, p))
    for seeds in (64, 256):
        y0 = np.column_stack([rng.uniform(-1, 1, seeds), rng.uniform(0.1, 2, seeds),
                              np.zeros(seeds)])
        t = np.linspace(0, 5, 51)
        yield (f"dopri_seeds seeds={seeds} t=0..5",
               lambda y=y0, t=t: kernels.dopri_seeds_numba(y, 1, -0.75, t, 1e-10, 1e-10),
               lambda y=y0, t=t: kernels.dopri_seeds_numpy(y, 1, -0.75, t, 1e-10, 1e-10))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speed-up':>9s}")
    for name, fast, slow in cases(rng):
        a, b = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:40s} {1e3 * a:12.3f} {1e3 * b:12.3f} {b / a:9.1f}")


if __name__ == "__main__":
    main()
