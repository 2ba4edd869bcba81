"""Statistical control: compare a day to its template and color daily gauges.

Gauge colors depend only on where today's value ranks against the history of
daily values, with distinct bands for quantities where high is good (starts,
completes) and where low is good (scraps, idle, duration).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from enum import Enum

import numpy as np

from .events import EventLog, day_number
from .metrics import UnitMetrics, compute_unit_metrics
from .timeseries import (
    BinSeries,
    Comparison,
    Quantity,
    TemplateDay,
    bin_series,
    matching_dates,
    moving_average,
)

GAUGE_ORDER = (
    Quantity.STARTS,
    Quantity.COMPLETES,
    Quantity.SCRAPS,
    Quantity.MEAN_IDLE,
    Quantity.MEAN_DURATION,
)


class BinFlag(str, Enum):
    BELOW = "below"
    WITHIN = "within"
    ABOVE = "above"
    NO_DATA = "no_data"


class GaugeColor(str, Enum):
    GREEN = "green"
    ORANGE = "orange"
    RED = "red"


class NoHistoryError(ValueError):
    """No historical days available for the requested comparison."""


@dataclass(frozen=True)
class GaugeThresholds:
    """Percentile cut points for gauge colors.

    For higher-is-better metrics the bands are red below ``count_red``,
    orange up to ``count_orange``, green above.  For lower-is-better metrics:
    green up to ``inverse_orange_lo``, orange up to ``inverse_red_lo``, red
    above.  Boundary ranks take the less severe color.
    """

    count_red: float = 20.0
    count_orange: float = 40.0
    inverse_orange_lo: float = 60.0
    inverse_red_lo: float = 80.0

    def color(self, kind: Quantity, rank: float) -> GaugeColor:
        if kind.lower_is_better:
            if rank <= self.inverse_orange_lo:
                return GaugeColor.GREEN
            if rank <= self.inverse_red_lo:
                return GaugeColor.ORANGE
            return GaugeColor.RED
        if rank >= self.count_orange:
            return GaugeColor.GREEN
        if rank >= self.count_red:
            return GaugeColor.ORANGE
        return GaugeColor.RED


@dataclass(frozen=True)
class ExceedanceReport:
    step: int
    quantity: Quantity
    flags: tuple[BinFlag, ...]
    exceedance_fraction: float
    n_data_bins: int

    @property
    def n_exceed(self) -> int:
        return sum(1 for f in self.flags if f in (BinFlag.BELOW, BinFlag.ABOVE))


@dataclass(frozen=True)
class DailyKpis:
    date: date
    step: int
    n_start: int
    n_complete: int
    n_scrap: int
    mean_idle: float | None
    mean_duration: float | None

    def value(self, kind: Quantity) -> float | None:
        return {
            Quantity.STARTS: float(self.n_start),
            Quantity.COMPLETES: float(self.n_complete),
            Quantity.SCRAPS: float(self.n_scrap),
            Quantity.MEAN_IDLE: self.mean_idle,
            Quantity.MEAN_DURATION: self.mean_duration,
        }[kind]


@dataclass(frozen=True)
class GaugeState:
    kind: Quantity
    today_value: float | None
    percentile_rank: float | None
    color: GaugeColor
    history_n: int


def compare_today(
    today: BinSeries, template: TemplateDay, ma_order: int = 3
) -> ExceedanceReport:
    """Flag each bin of today's smoothed curve against the template band.

    Containment is closed-interval: a value equal to a bound is within.
    Bins missing on either side are flagged no-data and excluded from the
    exceedance fraction.
    """
    if today.step != template.step or today.quantity != template.quantity:
        raise ValueError(
            f"mismatched series: today is step {today.step}/{today.quantity.value}, "
            f"template is step {template.step}/{template.quantity.value}"
        )
    smoothed = moving_average(today.values, ma_order)
    flags = []
    n_exceed = 0
    n_data = 0
    for i in range(template.n_bins):
        v = smoothed[i]
        if np.isnan(v) or np.isnan(template.lower[i]) or np.isnan(template.upper[i]):
            flags.append(BinFlag.NO_DATA)
            continue
        n_data += 1
        if v < template.lower[i]:
            flags.append(BinFlag.BELOW)
            n_exceed += 1
        elif v > template.upper[i]:
            flags.append(BinFlag.ABOVE)
            n_exceed += 1
        else:
            flags.append(BinFlag.WITHIN)
    fraction = n_exceed / n_data if n_data else 0.0
    return ExceedanceReport(
        step=today.step,
        quantity=today.quantity,
        flags=tuple(flags),
        exceedance_fraction=fraction,
        n_data_bins=n_data,
    )


def daily_kpis(
    log: EventLog,
    day: date,
    step: int,
    tz: str = "UTC",
    metrics: UnitMetrics | None = None,
) -> DailyKpis:
    """Counts and mean idle/duration attributed to one local day and step."""
    if metrics is None:
        metrics = compute_unit_metrics(log)
    values = _daily_value_matrix(log, [day], step, tz, metrics)
    means = values["means"]
    return DailyKpis(
        date=day,
        step=step,
        n_start=int(values["starts"][0]),
        n_complete=int(values["completes"][0]),
        n_scrap=int(values["scraps"][0]),
        mean_idle=None if np.isnan(means["idle"][0]) else float(means["idle"][0]),
        mean_duration=None
        if np.isnan(means["duration"][0])
        else float(means["duration"][0]),
    )


def _daily_value_matrix(log, days, step, tz, metrics):
    """Per-day KPI values for a step: counts plus mean idle/duration."""
    from .events import _utc_offsets  # local import to keep module deps flat

    day_nums = np.asarray([day_number(d) for d in days], dtype=np.int64)
    order = np.argsort(day_nums, kind="stable")
    sorted_nums = day_nums[order]

    def day_rows(ts):
        local_day = (ts + _utc_offsets(ts, tz)) // 86400
        pos = np.searchsorted(sorted_nums, local_day)
        ok = (pos < sorted_nums.shape[0]) & (
            sorted_nums[np.minimum(pos, sorted_nums.shape[0] - 1)] == local_day
        )
        return order[pos[ok]], ok

    out = {"means": {}}
    for q in (Quantity.STARTS, Quantity.COMPLETES, Quantity.SCRAPS):
        mask = (log.step == step) & (log.action == q.count_action)
        rows, _ = day_rows(log.ts[mask])
        out[q.value] = np.bincount(rows, minlength=len(days)).astype(np.int64)
    idle_sel = metrics.idle_to == step
    rows, ok = day_rows(metrics.idle_at_ts[idle_sel])
    out["means"]["idle"] = _mean_by_row(rows, metrics.idle_seconds[idle_sel][ok], len(days))
    dur_sel = (metrics.dur_step == step) & metrics.dur_ok
    rows, ok = day_rows(metrics.dur_start_ts[dur_sel])
    out["means"]["duration"] = _mean_by_row(
        rows, metrics.dur_seconds[dur_sel][ok], len(days)
    )
    return out


def _mean_by_row(rows, values, n):
    sums = np.bincount(rows, weights=values, minlength=n)
    counts = np.bincount(rows, minlength=n)
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def percentile_rank(value: float, history: np.ndarray) -> float:
    """Rank of a value in [0, 100]: fraction strictly below plus half of ties."""
    history = np.asarray(history, dtype=np.float64)
    n = history.shape[0]
    less = int(np.count_nonzero(history < value))
    equal = int(np.count_nonzero(history == value))
    return 100.0 * (less + 0.5 * equal) / n


def gauge_color(
    kind: Quantity,
    today_value: float,
    history,
    thresholds: GaugeThresholds | None = None,
) -> GaugeState:
    """Rank today's value against history and color it."""
    history = np.asarray(history, dtype=np.float64)
    if history.size == 0:
        raise NoHistoryError(f"gauge for {kind.value} has an empty history")
    thresholds = thresholds or GaugeThresholds()
    rank = percentile_rank(float(today_value), history)
    return GaugeState(
        kind=kind,
        today_value=float(today_value),
        percentile_rank=rank,
        color=thresholds.color(kind, rank),
        history_n=int(history.size),
    )


def homepage_state(
    log: EventLog,
    day: date,
    step: int,
    comparison: Comparison,
    tz: str = "UTC",
    thresholds: GaugeThresholds | None = None,
    metrics: UnitMetrics | None = None,
) -> list[GaugeState]:
    """One gauge per KPI for a chosen day, ranked against historical days.

    History is one KPI value per matching historical day; the chosen day is
    never part of its own history.  Mean gauges skip history days without
    observations; when today itself has no observation the gauge is reported
    neutral (green, no rank).
    """
    if metrics is None:
        metrics = compute_unit_metrics(log)
    history_days = [d for d in matching_dates(log, comparison, tz) if d != day]
    if not history_days:
        raise NoHistoryError(
            f"no historical days for comparison {comparison.label!r} "
            f"(chosen day {day.isoformat()} is excluded)"
        )
    hist = _daily_value_matrix(log, history_days, step, tz, metrics)
    today = daily_kpis(log, day, step, tz, metrics)
    gauges = []
    for kind in GAUGE_ORDER:
        today_value = today.value(kind)
        if kind.is_count:
            series = hist[kind.value].astype(np.float64)
        else:
            series = hist["means"]["idle" if kind is Quantity.MEAN_IDLE else "duration"]
            series = series[~np.isnan(series)]
        if today_value is None or series.size == 0:
            gauges.append(
                GaugeState(
                    kind=kind,
                    today_value=today_value,
                    percentile_rank=None,
                    color=GaugeColor.GREEN,
                    history_n=int(series.size),
                )
            )
            continue
        gauges.append(gauge_color(kind, today_value, series, thresholds))
    return gauges
