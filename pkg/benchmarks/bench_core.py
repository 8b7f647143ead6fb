"""Compare the compiled and numpy recurrence kernels.

Run with ``python benchmarks/bench_core.py [--horizons 1000 5000 20000]``.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from vomap import _backend, _fallback
from vomap.simulator import MapConfig, OrderSchedule, simulate


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--horizons", type=int, nargs="+", default=[1000, 5000, 20000])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--alphas", type=float, nargs="+", default=[0.2, 0.4, 0.6])
    args = parser.parse_args(argv)

    schedule = OrderSchedule(tuple(args.alphas))
    compiled = _backend.run_recurrence if _backend.BACKEND == "cython" else None
    print(f"schedule {schedule.alphas}, active backend: {_backend.BACKEND}")
    print(f"{'horizon':>8} {'numpy [s]':>11} {'cython [s]':>11} {'speedup':>8} {'max diff':>10}")
    for n in args.horizons:
        cfg = MapConfig(r=0.8, horizon=n)
        t_py = best_of(lambda: simulate(cfg, schedule, kernel=_fallback.run_recurrence),
                       args.repeat)
        ref = simulate(cfg, schedule, kernel=_fallback.run_recurrence).values
        if compiled is None:
            print(f"{n:>8} {t_py:>11.4f} {'n/a':>11} {'n/a':>8} {'n/a':>10}")
            continue
        t_cy = best_of(lambda: simulate(cfg, schedule, kernel=compiled), args.repeat)
        diff = np.max(np.abs(simulate(cfg, schedule, kernel=compiled).values - ref))
        print(f"{n:>8} {t_py:>11.4f} {t_cy:>11.4f} {t_py / t_cy:>8.1f} {diff:>10.1e}")


if __name__ == "__main__":
    main()
