#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--units 20000] [--days 5] [--repeat 5]

Both implementations are fed identical arrays derived from a synthetic log
of realistic shape; the table reports the best wall time of each.
"""

import argparse
import time

import numpy as np

from mesview import kernels
from mesview.metrics import _unit_major
from mesview.synthgen import generate_log, preset_paperlike


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--units", type=int, default=20000, help="units per day")
    parser.add_argument("--days", type=int, default=5)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not kernels._HAVE_NUMBA:
        print("numba not importable; nothing to compare")
        return

    print(f"generating log: {args.units} units/day x {args.days} days ...")
    log = generate_log(
        preset_paperlike(n_units_per_day=args.units, n_days=args.days, seed=99)
    )
    print(f"{len(log):,} events, {len(log.unit_ids):,} units\n")

    order, offsets = _unit_major(log)
    ts = np.ascontiguousarray(log.ts[order])
    step = np.ascontiguousarray(log.step[order])
    action = np.ascontiguousarray(log.action[order])

    local = log.local_index()
    n_dates = int(local.day.max() - local.day.min()) + 1
    date_idx = (local.day - local.day.min()).astype(np.int64)
    bin_idx = local.bin.astype(np.int64)
    values = np.random.default_rng(0).lognormal(1.0, 1.5, size=len(log))

    stack = np.random.default_rng(1).normal(size=(5000, 48))
    stack[np.random.default_rng(2).random(stack.shape) < 0.3] = np.nan

    cases = [
        (
            "trace_scan",
            lambda: kernels._nb_trace_scan(ts, step, action, offsets, 7),
            lambda: kernels._np_trace_scan(ts, step, action, offsets, 7),
        ),
        (
            "accumulate_counts",
            lambda: kernels._nb_accumulate_counts(date_idx, bin_idx, n_dates, 48),
            lambda: kernels._np_accumulate_counts(date_idx, bin_idx, n_dates, 48),
        ),
        (
            "accumulate_means",
            lambda: kernels._nb_accumulate_means(date_idx, bin_idx, values, n_dates, 48),
            lambda: kernels._np_accumulate_means(date_idx, bin_idx, values, n_dates, 48),
        ),
        (
            "moving_average (5000x48)",
            lambda: kernels._nb_moving_average(stack, 3),
            lambda: kernels._np_moving_average(stack, 3),
        ),
    ]

    # trigger compilation outside the timed region
    for _, nb, _np in cases:
        nb()

    print(f"{'kernel':<28}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    print("-" * 62)
    for name, nb, np_ in cases:
        t_nb = best_time(nb, args.repeat)
        t_np = best_time(np_, args.repeat)
        print(
            f"{name:<28}{t_nb * 1e3:>10.2f}ms{t_np * 1e3:>10.2f}ms"
            f"{t_np / t_nb:>9.1f}x"
        )


if __name__ == "__main__":
    main()
