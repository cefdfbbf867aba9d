"""Compare the numba and numpy jet kernels.

    python3 benchmarks/bench_jet.py [--rows 2000] [--repeat 5]

Times batched truncated products and series composition for several
(dimension, order) bases, after checking that both backends agree.
"""
import argparse
import time

import numpy as np

from riemcompat import _kernels
from riemcompat.jets import basis


def _best(fn, repeat):
    fn()  # warm-up, triggers compilation
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.NUMBA_ENABLED:
        print("numba backend disabled (RIEMCOMPAT_DISABLE_NUMBA set or numba missing); numpy only")

    rng = np.random.default_rng(0)
    series = 1.0 / np.array([1, 1, 2, 6, 24], dtype=float)  # exp
    print(f"{'n':>2} {'order':>5} {'K':>4} {'op':>8} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for n, order in ((2, 4), (3, 4), (4, 2), (4, 4)):
        b = basis(n, order)
        a = rng.normal(size=(args.rows, b.size))
        c = rng.normal(size=(args.rows, b.size))
        h = a.copy()
        h[:, 0] = 0.0
        ops = {
            "mul": lambda be: _kernels.mul(a, c, b, backend=be),
            "compose": lambda be: _kernels.compose(h, series, b, backend=be),
        }
        for name, op in ops.items():
            t_np = _best(lambda: op("numpy"), args.repeat)
            if _kernels.NUMBA_ENABLED:
                diff = np.abs(op("numba") - op("numpy")).max()
                assert diff < 1e-10, f"backends disagree by {diff}"
                t_nb = _best(lambda: op("numba"), args.repeat)
                print(f"{n:>2} {order:>5} {b.size:>4} {name:>8} {1e3 * t_np:>10.3f} {1e3 * t_nb:>10.3f} {t_np / t_nb:>7.1f}x")
            else:
                print(f"{n:>2} {order:>5} {b.size:>4} {name:>8} {1e3 * t_np:>10.3f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
