#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the three hot loops (raycasting, particle scoring, map updates) on a
realistic workload: a 100x100 occupancy grid, a 90-beam subsampled scan,
and a 300-particle filter, matching the default SLAM configuration.

Run: python3 benchmarks/kernel_benchmark.py [--repeats N]
"""

import argparse
import importlib
import math
import time

import numpy as np


def make_workload(seed=0):
    rng = np.random.default_rng(seed)
    cells = np.zeros((100, 100), dtype=np.int8)
    cells[0, :] = cells[-1, :] = cells[:, 0] = cells[:, -1] = 127
    for _ in range(12):  # scatter some interior clutter
        r, c = rng.integers(10, 90, 2)
        cells[r:r + 3, c:c + 3] = 127
    poses = np.column_stack([rng.uniform(2, 8, 300), rng.uniform(2, 8, 300),
                             rng.uniform(-math.pi, math.pi, 300)])
    bearings = np.linspace(0, 2 * math.pi, 90, endpoint=False)
    ranges = rng.uniform(0.3, 8.0, 90)
    return cells, poses, ranges, bearings


def time_call(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(module, repeats):
    cells, poses, ranges, bearings = make_workload()
    log_floor = math.log(0.01)
    results = {}
    results["raycast_bearings (360 beams)"] = time_call(
        lambda: module.raycast_bearings(
            cells, 0.0, 0.0, 0.1, 5.0, 5.0, 0.3,
            np.linspace(0, 2 * math.pi, 360, endpoint=False), 8.0, 64),
        repeats)
    results["score_particles (300 x 90 beams)"] = time_call(
        lambda: module.score_particles(cells, 0.0, 0.0, 0.1, poses,
                                       ranges, bearings, 8.0, 0.1,
                                       log_floor, 0),
        repeats)
    scratch = cells.copy()
    results["update_map_cells (360 beams)"] = time_call(
        lambda: module.update_map_cells(
            scratch, 0.0, 0.0, 0.1, 5.0, 5.0, 0.3,
            np.linspace(0.3, 7.5, 360),
            np.linspace(0, 2 * math.pi, 360, endpoint=False), 8.0, 3, 1),
        repeats)
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per kernel (best-of is reported)")
    args = parser.parse_args()

    from mbot_stack.kernels import _fallback
    backends = {"python": _fallback}
    try:
        backends["cython"] = importlib.import_module("mbot_stack.kernels._core")
    except ImportError:
        print("compiled kernels not built; benchmarking fallback only\n")

    timings = {name: bench_backend(mod, args.repeats)
               for name, mod in backends.items()}
    kernels = list(next(iter(timings.values())))
    width = max(len(k) for k in kernels)
    header = f"{'kernel'.ljust(width)}  " + "  ".join(
        f"{n:>12}" for n in timings)
    if len(timings) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for k in kernels:
        row = f"{k.ljust(width)}  " + "  ".join(
            f"{timings[n][k] * 1e3:>9.3f} ms" for n in timings)
        if len(timings) == 2:
            row += f"  {timings['python'][k] / timings['cython'][k]:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
