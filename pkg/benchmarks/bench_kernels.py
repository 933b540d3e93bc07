"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row reports the best of N wall-clock runs (after one warm-up call, so
JIT compilation is excluded) and the max absolute difference between paths.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from we_kit import _kernels as k
from we_kit.lemma_f import C, COT_C, f_eval


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def cases():
    targets = f_eval(np.linspace(1e-3, C - 1e-3, 100_000))
    yield ("level_bisect (1e5 targets)",
           lambda: k.level_bisect_numpy(targets, C, math.pi, COT_C, False),
           lambda: k.level_bisect_numba(targets, C, math.pi, COT_C, False))

    roots = np.exp((2 * np.arange(-20, 20) + 1) * math.pi / k.SQRT7)
    lo, hi = np.repeat(roots * 0.97, 250), np.repeat(roots * 1.03, 250)
    yield ("q_root_bisect (1e4 brackets)",
           lambda: k.q_root_bisect_numpy(lo, hi, 0.0, 0.0, 1, 1.0, 0.0),
           lambda: k.q_root_bisect_numba(lo, hi, 0.0, 0.0, 1, 1.0, 0.0))

    rng = np.random.default_rng(0)
    X, Y = rng.normal(size=(2, 6, 6, 6, 6))
    yield ("contract3 (n=6, x200)",
           lambda: [k.contract3_numpy(X, Y) for _ in range(200)][-1],
           lambda: [k.contract3_numba(X, Y) for _ in range(200)][-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not k.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':32s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max diff':>9s}")
    for name, slow, fast in cases():
        t_np, a = best_of(slow, args.repeat)
        t_nb, b = best_of(fast, args.repeat)
        diff = float(np.abs(np.asarray(a) - np.asarray(b)).max())
        print(f"{name:32s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
