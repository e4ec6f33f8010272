"""Benchmark the numba-jitted covariance kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Both backends are imported directly, so the PROXSIM_JIT flag does not
matter here. The numba path is warmed up before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from proxsim import _kernels_numpy

try:
    from proxsim import _kernels_numba
except ImportError:
    _kernels_numba = None

CASES = [
    # (n, m, D) for kernel-matrix shapes; gradient sums use the n x n block
    (100, 100, 2),
    (200, 200, 4),
    (500, 500, 8),
    (10_000, 100, 2),
    (10_000, 100, 16),
]


def _time(fn, *args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = [("numpy", _kernels_numpy)]
    if _kernels_numba is not None:
        _kernels_numba.warmup()
        backends.append(("numba", _kernels_numba))
    else:
        print("numba unavailable; benchmarking the numpy path only")

    rng = np.random.default_rng(0)
    header = f"{'case':<28}" + "".join(f"{name + ' (ms)':>14}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"

    for op in ("se_kernel_matrix", "weighted_sqdiff_sums"):
        print(f"\n== {op} ==")
        print(header)
        for n, m, d in CASES:
            XA = rng.random((n, d))
            ls = rng.uniform(0.2, 2.0, size=d)
            if op == "se_kernel_matrix":
                XB = rng.random((m, d))
                calls = [(getattr(mod, op), (XA, XB, ls, 1.5)) for _, mod in backends]
                label = f"{n}x{m}, D={d}"
            else:
                W = rng.standard_normal((n, n))
                calls = [(getattr(mod, op), (XA, W, ls)) for _, mod in backends]
                label = f"{n}x{n}, D={d}"
            times = [_time(fn, *fargs, repeats=args.repeats) for fn, fargs in calls]
            row = f"{label:<28}" + "".join(f"{t * 1e3:>14.2f}" for t in times)
            if len(times) == 2:
                row += f"{times[0] / times[1]:>9.1f}x"
            print(row)

        # sanity: both paths agree
        if len(backends) == 2:
            XA = rng.random((50, 3))
            XB = rng.random((40, 3))
            ls = rng.uniform(0.2, 2.0, size=3)
            a = backends[0][1].se_kernel_matrix(XA, XB, ls, 2.0)
            b = backends[1][1].se_kernel_matrix(XA, XB, ls, 2.0)
            assert np.allclose(a, b, rtol=1e-12), "backend results diverged"


if __name__ == "__main__":
    main()
