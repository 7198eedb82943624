"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_backends.py [--repeat 5] [--max-rank 20]

Times the in-place Walsh-Hadamard transform on single rows and on row
batches, and the batched Cesàro kernel sampler used by the surveys, and
checks that both backends return identical arrays.
"""

import argparse
import timeit

import numpy as np

from dyadiclab import _kernels
from dyadiclab.cesaro import cesaro_numbers
from dyadiclab.systems import perm_table


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_fwht(rows, m, repeat):
    base = np.random.default_rng(0).standard_normal((rows, 1 << m))
    out, times = {}, {}
    for name in _kernels.BACKENDS:
        _kernels.set_backend(name)
        out[name] = _kernels.fwht_rows(base.copy())  # also warms the JIT
        times[name] = best_of(lambda: _kernels.fwht_rows(base.copy()), repeat)
    return times, np.array_equal(out["numba"], out["numpy"])


def bench_kernels(count, m, repeat):
    ns = np.arange(1 << (m - 1), (1 << (m - 1)) + count)
    weights = cesaro_numbers(int(ns.max()), 0.5)
    perm = perm_table(m)
    out, times = {}, {}
    for name in _kernels.BACKENDS:
        _kernels.set_backend(name)
        out[name] = _kernels.kernel_rows(ns, weights, perm, m)
        times[name] = best_of(lambda: _kernels.kernel_rows(ns, weights, perm, m), repeat)
    return times, np.array_equal(out["numba"], out["numpy"])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--max-rank", type=int, default=20)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    if args.threads:
        _kernels.set_threads(args.threads)

    cases = []
    for m in range(10, args.max_rank + 1, 2):
        cases.append((f"fwht 1 x 2^{m}", bench_fwht(1, m, args.repeat)))
    cases.append(("fwht 256 x 2^12", bench_fwht(256, 12, args.repeat)))
    for m in (10, 12, 14):
        cases.append((f"kernel rows 256 x 2^{m}", bench_kernels(256, m, args.repeat)))

    print(f"{'case':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}  identical")
    for label, (t, same) in cases:
        print(f"{label:<24}{t['numba']:>12.5f}{t['numpy']:>12.5f}{t['numpy'] / t['numba']:>9.1f}x  {same}")


if __name__ == "__main__":
    main()
