"""Hot numeric kernels with numba-accelerated and pure-numpy implementations.

Every kernel exists twice: a ``_nb_*`` version compiled with ``numba.njit``
and a ``_np_*`` fallback written in plain numpy.  Both produce identical
output (bit-for-bit, same row order); the active backend is chosen once at
import time from the ``MESVIEW_NUMBA`` environment variable:

    MESVIEW_NUMBA=auto   use numba when importable (default)
    MESVIEW_NUMBA=1      require numba, fail if missing
    MESVIEW_NUMBA=0      force the numpy fallback

``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

# Action codes shared with mesview.events (kept as plain ints so the njit
# kernels do not depend on the enum type).
START = 0
COMPLETE = 1
SCRAP = 2
DELAY = 3

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

_MODE = os.environ.get("MESVIEW_NUMBA", "auto").strip().lower()
if _MODE in ("0", "false", "no", "off", "numpy"):
    _USE_NUMBA = False
elif _MODE in ("1", "true", "yes", "on", "numba"):
    if not _HAVE_NUMBA:  # pragma: no cover
        raise ImportError("MESVIEW_NUMBA=1 but numba is not importable")
    _USE_NUMBA = True
else:
    _USE_NUMBA = _HAVE_NUMBA


def active_backend() -> str:
    """Name of the backend selected at import time."""
    return "numba" if _USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# trace scan: per-unit walk emitting idle gaps and per-step duration windows
# ---------------------------------------------------------------------------
#
# Inputs are unit-major arrays: events of unit u occupy rows
# offsets[u]:offsets[u+1], time-ordered within the segment.
#
# Idle rule: the last Complete before a Start pairs with that Start; a Scrap
# or another Start clears the pending Complete; Delay events are transparent.
# Duration rule: per (unit, step) record the first Start and last Complete.

def _np_trace_scan(ts, step, action, offsets, n_steps):
    n = ts.shape[0]
    n_units = offsets.shape[0] - 1
    useg = np.repeat(np.arange(n_units, dtype=np.int32), np.diff(offsets))

    # Idle pairing: among start/complete/scrap events, a Start whose
    # immediate predecessor (same unit) is a Complete closes an idle gap.
    keep = action != DELAY
    idx = np.flatnonzero(keep)
    a = action[idx]
    u = useg[idx]
    pair = np.zeros(idx.shape[0], dtype=bool)
    if idx.shape[0] > 1:
        pair[1:] = (a[1:] == START) & (a[:-1] == COMPLETE) & (u[1:] == u[:-1])
    j = np.flatnonzero(pair)
    i_start = idx[j]
    i_comp = idx[j - 1]
    ok = ts[i_start] >= ts[i_comp]
    i_start = i_start[ok]
    i_comp = i_comp[ok]
    idle = (
        useg[i_start],
        step[i_comp].astype(np.int16),
        step[i_start].astype(np.int16),
        (ts[i_start] - ts[i_comp]).astype(np.int64),
        ts[i_start].astype(np.int64),
    )

    # Duration windows keyed by (unit, step).
    key = useg.astype(np.int64) * n_steps + (step.astype(np.int64) - 1)
    smask = action == START
    cmask = action == COMPLETE
    nkeys = n_units * n_steps
    first_start = np.full(nkeys, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(first_start, key[smask], ts[smask])
    last_complete = np.full(nkeys, np.iinfo(np.int64).min, dtype=np.int64)
    np.maximum.at(last_complete, key[cmask], ts[cmask])
    sel = np.flatnonzero(first_start != np.iinfo(np.int64).max)
    has_c = last_complete[sel] != np.iinfo(np.int64).min
    dur = (
        (sel // n_steps).astype(np.int32),
        (sel % n_steps + 1).astype(np.int16),
        first_start[sel],
        np.where(has_c, last_complete[sel], 0).astype(np.int64),
        has_c.astype(np.uint8),
    )
    return idle, dur


def _nb_trace_scan_impl(ts, step, action, offsets, n_steps):  # pragma: no cover
    n = ts.shape[0]
    n_units = offsets.shape[0] - 1

    idle_unit = np.empty(n, dtype=np.int32)
    idle_from = np.empty(n, dtype=np.int16)
    idle_to = np.empty(n, dtype=np.int16)
    idle_s = np.empty(n, dtype=np.int64)
    idle_at = np.empty(n, dtype=np.int64)
    k = 0

    dur_unit = np.empty(n, dtype=np.int32)
    dur_step = np.empty(n, dtype=np.int16)
    dur_fs = np.empty(n, dtype=np.int64)
    dur_lc = np.empty(n, dtype=np.int64)
    dur_has = np.empty(n, dtype=np.uint8)
    m = 0

    fs = np.empty(n_steps, dtype=np.int64)
    lc = np.empty(n_steps, dtype=np.int64)
    seen_s = np.empty(n_steps, dtype=np.uint8)
    seen_c = np.empty(n_steps, dtype=np.uint8)

    for uu in range(n_units):
        pend_step = -1
        pend_ts = 0
        for s in range(n_steps):
            seen_s[s] = 0
            seen_c[s] = 0
        for i in range(offsets[uu], offsets[uu + 1]):
            a = action[i]
            st = step[i] - 1
            if a == START:
                if pend_step >= 0 and ts[i] >= pend_ts:
                    idle_unit[k] = uu
                    idle_from[k] = pend_step
                    idle_to[k] = step[i]
                    idle_s[k] = ts[i] - pend_ts
                    idle_at[k] = ts[i]
                    k += 1
                pend_step = -1
                if seen_s[st] == 0:
                    seen_s[st] = 1
                    fs[st] = ts[i]
            elif a == COMPLETE:
                pend_step = step[i]
                pend_ts = ts[i]
                seen_c[st] = 1
                lc[st] = ts[i]
            elif a == SCRAP:
                pend_step = -1
        for s in range(n_steps):
            if seen_s[s] == 1:
                dur_unit[m] = uu
                dur_step[m] = s + 1
                dur_fs[m] = fs[s]
                dur_lc[m] = lc[s] if seen_c[s] == 1 else 0
                dur_has[m] = seen_c[s]
                m += 1

    idle = (idle_unit[:k], idle_from[:k], idle_to[:k], idle_s[:k], idle_at[:k])
    dur = (dur_unit[:m], dur_step[:m], dur_fs[:m], dur_lc[:m], dur_has[:m])
    return idle, dur


# ---------------------------------------------------------------------------
# binning accumulators over (date, bin) cells
# ---------------------------------------------------------------------------

def _np_accumulate_counts(date_idx, bin_idx, n_dates, n_bins):
    flat = np.bincount(
        date_idx.astype(np.int64) * n_bins + bin_idx, minlength=n_dates * n_bins
    )
    return flat.reshape(n_dates, n_bins).astype(np.float64)


def _nb_accumulate_counts_impl(date_idx, bin_idx, n_dates, n_bins):  # pragma: no cover
    out = np.zeros((n_dates, n_bins), dtype=np.float64)
    for i in range(date_idx.shape[0]):
        out[date_idx[i], bin_idx[i]] += 1.0
    return out


def _np_accumulate_means(date_idx, bin_idx, values, n_dates, n_bins):
    flat = date_idx.astype(np.int64) * n_bins + bin_idx
    sums = np.bincount(flat, weights=values, minlength=n_dates * n_bins)
    counts = np.bincount(flat, minlength=n_dates * n_bins)
    return (
        sums.reshape(n_dates, n_bins),
        counts.reshape(n_dates, n_bins).astype(np.int64),
    )


def _nb_accumulate_means_impl(date_idx, bin_idx, values, n_dates, n_bins):  # pragma: no cover
    sums = np.zeros((n_dates, n_bins), dtype=np.float64)
    counts = np.zeros((n_dates, n_bins), dtype=np.int64)
    for i in range(date_idx.shape[0]):
        sums[date_idx[i], bin_idx[i]] += values[i]
        counts[date_idx[i], bin_idx[i]] += 1
    return sums, counts


# ---------------------------------------------------------------------------
# moving average over rows of a (series, bins) stack; NaN marks absent slots
# ---------------------------------------------------------------------------
#
# Window slots are summed in ascending index order in both implementations so
# results agree bit-for-bit.

def _np_moving_average(values, order):
    m, n = values.shape
    half = order // 2
    present = ~np.isnan(values)
    filled = np.where(present, values, 0.0)
    sums = np.zeros((m, n), dtype=np.float64)
    cnts = np.zeros((m, n), dtype=np.int64)
    for off in range(-half, half + 1):
        lo = max(0, -off)
        hi = min(n, n - off)
        sums[:, lo:hi] += filled[:, lo + off : hi + off]
        cnts[:, lo:hi] += present[:, lo + off : hi + off]
    with np.errstate(invalid="ignore"):
        out = np.where(cnts > 0, sums / np.maximum(cnts, 1), np.nan)
    return out


def _nb_moving_average_impl(values, order):  # pragma: no cover
    m, n = values.shape
    half = order // 2
    out = np.empty((m, n), dtype=np.float64)
    for r in range(m):
        for i in range(n):
            s = 0.0
            c = 0
            lo = i - half
            if lo < 0:
                lo = 0
            hi = i + half
            if hi > n - 1:
                hi = n - 1
            for j in range(lo, hi + 1):
                v = values[r, j]
                if not np.isnan(v):
                    s += v
                    c += 1
            out[r, i] = s / c if c > 0 else np.nan
    return out


if _HAVE_NUMBA:
    _nb_trace_scan = njit(cache=True)(_nb_trace_scan_impl)
    _nb_accumulate_counts = njit(cache=True)(_nb_accumulate_counts_impl)
    _nb_accumulate_means = njit(cache=True)(_nb_accumulate_means_impl)
    _nb_moving_average = njit(cache=True)(_nb_moving_average_impl)
else:  # pragma: no cover
    _nb_trace_scan = _nb_accumulate_counts = None
    _nb_accumulate_means = _nb_moving_average = None


def trace_scan(ts, step, action, offsets, n_steps):
    """Scan unit-major event arrays.

    Returns ``(idle, durations)`` where idle is
    ``(unit, from_step, to_step, idle_seconds, at_ts)`` and durations is
    ``(unit, step, first_start_ts, last_complete_ts, has_complete)``.
    """
    ts = np.ascontiguousarray(ts, dtype=np.int64)
    step = np.ascontiguousarray(step, dtype=np.int16)
    action = np.ascontiguousarray(action, dtype=np.int8)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    if _USE_NUMBA:
        return _nb_trace_scan(ts, step, action, offsets, n_steps)
    return _np_trace_scan(ts, step, action, offsets, n_steps)


def accumulate_counts(date_idx, bin_idx, n_dates, n_bins):
    """Count events per (date, bin) cell; returns float64 (n_dates, n_bins)."""
    date_idx = np.ascontiguousarray(date_idx, dtype=np.int64)
    bin_idx = np.ascontiguousarray(bin_idx, dtype=np.int64)
    if _USE_NUMBA:
        return _nb_accumulate_counts(date_idx, bin_idx, n_dates, n_bins)
    return _np_accumulate_counts(date_idx, bin_idx, n_dates, n_bins)


def accumulate_means(date_idx, bin_idx, values, n_dates, n_bins):
    """Sum and count observations per (date, bin) cell."""
    date_idx = np.ascontiguousarray(date_idx, dtype=np.int64)
    bin_idx = np.ascontiguousarray(bin_idx, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if _USE_NUMBA:
        return _nb_accumulate_means(date_idx, bin_idx, values, n_dates, n_bins)
    return _np_accumulate_means(date_idx, bin_idx, values, n_dates, n_bins)


def moving_average_stack(values, order):
    """Centered moving average of each row; truncated windows at the edges.

    A slot is NaN iff every input slot of its window is NaN.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    if _USE_NUMBA:
        return _nb_moving_average(values, order)
    return _np_moving_average(values, order)


def warmup() -> None:
    """Trigger JIT compilation of all kernels (no-op on the numpy backend)."""
    ts = np.array([0, 10, 20, 30], dtype=np.int64)
    step = np.array([1, 1, 2, 2], dtype=np.int16)
    action = np.array([START, COMPLETE, START, COMPLETE], dtype=np.int8)
    offsets = np.array([0, 4], dtype=np.int64)
    trace_scan(ts, step, action, offsets, 7)
    di = np.array([0, 0], dtype=np.int64)
    bi = np.array([0, 1], dtype=np.int64)
    accumulate_counts(di, bi, 1, 48)
    accumulate_means(di, bi, np.array([1.0, 2.0]), 1, 48)
    moving_average_stack(np.array([[1.0, np.nan, 3.0]]), 3)
