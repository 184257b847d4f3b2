"""Compare the compiled and numpy power-ascent kernels.

    python benchmarks/bench_kernels.py [--sizes 4 8 16 32] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from banachrig import _kernels_py

try:
    from banachrig import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def bench(mod, A, x0, p, repeat):
    stmt = lambda: mod.power_ascent(A, p, p, x0, 200, 1e-13)  # noqa: E731
    return min(timeit.repeat(stmt, number=20, repeat=repeat)) / 20


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32])
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'N':>4} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8} {'agree':>6}")
    for n in args.sizes:
        A = rng.standard_normal((n, n))
        x0 = rng.standard_normal(n)
        t_py = bench(_kernels_py, A, x0, args.p, args.repeat)
        if _kernels_c is None:
            print(f"{n:>4} {t_py * 1e3:>12.3f} {'n/a':>12} {'n/a':>8} {'n/a':>6}")
            continue
        t_c = bench(_kernels_c, A, x0, args.p, args.repeat)
        v_py = _kernels_py.power_ascent(A, args.p, args.p, x0, 200, 1e-13)[0]
        v_c = _kernels_c.power_ascent(A, args.p, args.p, x0, 200, 1e-13)[0]
        agree = abs(v_py - v_c) <= 1e-12 * abs(v_py)
        print(f"{n:>4} {t_py * 1e3:>12.3f} {t_c * 1e3:>12.3f} {t_py / t_c:>8.1f} {str(agree):>6}")


if __name__ == "__main__":
    main()
