"""Time the compiled kernels against the pure-Python fallback.

Usage: ``python benchmarks/bench_kernels.py [--repeat N]``.
"""

import argparse
import timeit

from gmpy2 import mpq

from wtr import _kernels_py as py

try:
    from wtr import _kernels as cy
except ImportError:
    cy = None


def cases():
    a = [mpq(k + 1, k + 2) for k in range(40)]
    b = [mpq(2 * k - 3, 5) for k in range(40)]
    return {
        "cauchy_product[40]": lambda m: m.cauchy_product(a, b, 40),
        "series_inverse[40]": lambda m: m.series_inverse(a, 40, 1 / a[0]),
        "lambert_sum[200]": lambda m: m.lambert_sum(0.02 + 0.05j, 5, 200),
        "p2_double[60]": lambda m: m.p2_double(0.21 + 0.17j, 0.3 + 1.2j, 60),
    }


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--repeat", type=int, default=200)
    args = p.parse_args()
    print(f"{'kernel':<22}{'python (us)':>14}{'cython (us)':>14}{'speedup':>10}")
    for name, fn in cases().items():
        tp = min(timeit.repeat(lambda: fn(py), number=args.repeat, repeat=3)) / args.repeat * 1e6
        if cy is None:
            print(f"{name:<22}{tp:>14.1f}{'n/a':>14}{'':>10}")
            continue
        tc = min(timeit.repeat(lambda: fn(cy), number=args.repeat, repeat=3)) / args.repeat * 1e6
        print(f"{name:<22}{tp:>14.1f}{tc:>14.1f}{tp / tc:>9.2f}x")


if __name__ == "__main__":
    main()
