"""Time-of-day binning, order-3 moving averages, and template days.

A template day is the statistical baseline for one (step, quantity): the
smoothed mean curve over historical days plus percentile bounds.  Bounds come
from pooling the raw per-date bin values of each bin and its neighbors, so a
95% band marks where 95% of historical raw values fell.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, time
from enum import Enum

import numpy as np

from . import kernels
from .events import Action, EventLog, _utc_offsets, day_number
from .metrics import UnitMetrics, compute_unit_metrics

WEEKDAY_NAMES = (
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
)


class NoMatchingDatesError(ValueError):
    """The log holds no dates satisfying the requested comparison."""


class Quantity(str, Enum):
    """The five per-bin quantities tracked per process step."""

    STARTS = "starts"
    COMPLETES = "completes"
    SCRAPS = "scraps"
    MEAN_IDLE = "idle"
    MEAN_DURATION = "duration"

    @property
    def count_action(self) -> Action | None:
        return {
            Quantity.STARTS: Action.START,
            Quantity.COMPLETES: Action.COMPLETE,
            Quantity.SCRAPS: Action.SCRAP,
        }.get(self)

    @property
    def is_count(self) -> bool:
        return self.count_action is not None

    @property
    def lower_is_better(self) -> bool:
        """Gauge direction: scraps, idle and duration should be low."""
        return self in (Quantity.SCRAPS, Quantity.MEAN_IDLE, Quantity.MEAN_DURATION)

    @classmethod
    def parse(cls, text: str) -> "Quantity":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(q.value for q in cls)
            raise ValueError(f"unknown quantity {text!r} (valid: {valid})") from None


@dataclass(frozen=True)
class Comparison:
    """Which historical days a computation draws on.

    ``weekday=None`` means all days; otherwise only days falling on the given
    weekday (Monday=0) are used.
    """

    weekday: int | None = None

    @classmethod
    def all_days(cls) -> "Comparison":
        return cls(None)

    @classmethod
    def same_weekday(cls, weekday: int) -> "Comparison":
        if not 0 <= weekday <= 6:
            raise ValueError(f"weekday must be 0..6, got {weekday}")
        return cls(weekday)

    @classmethod
    def parse(cls, text: str, reference_date: date | None = None) -> "Comparison":
        key = text.strip().lower()
        if key in ("all", "overall", "all_days"):
            return cls.all_days()
        if key in ("same_weekday", "weekday"):
            if reference_date is None:
                raise ValueError("comparison 'same_weekday' needs a date")
            return cls.same_weekday(reference_date.weekday())
        for i, name in enumerate(WEEKDAY_NAMES):
            if key == name or key == name[:3]:
                return cls.same_weekday(i)
        raise ValueError(f"unknown comparison {text!r}")

    @property
    def label(self) -> str:
        if self.weekday is None:
            return "all"
        return WEEKDAY_NAMES[self.weekday]


@dataclass(frozen=True)
class Shift:
    name: str
    start_minute: int  # minute of local day, inclusive
    end_minute: int  # exclusive; < start_minute when the shift wraps midnight

    @property
    def length(self) -> int:
        if self.end_minute == self.start_minute:
            return 1440
        return (self.end_minute - self.start_minute) % 1440

    def contains(self, minute: int) -> bool:
        if self.end_minute == self.start_minute:
            return True
        if self.start_minute < self.end_minute:
            return self.start_minute <= minute < self.end_minute
        return minute >= self.start_minute or minute < self.end_minute


@dataclass(frozen=True)
class ShiftSchedule:
    shifts: tuple[Shift, ...]

    def __post_init__(self):
        if not self.shifts:
            raise ValueError("schedule needs at least one shift")
        if sum(s.length for s in self.shifts) != 1440:
            raise ValueError("shifts must cover exactly 24 hours")
        ordered = sorted(self.shifts, key=lambda s: s.start_minute)
        for cur, nxt in zip(ordered, ordered[1:] + ordered[:1]):
            if len(self.shifts) > 1 and cur.end_minute % 1440 != nxt.start_minute % 1440:
                raise ValueError("shifts must be contiguous")

    def check_bin_alignment(self, bin_minutes: int) -> None:
        for s in self.shifts:
            if s.start_minute % bin_minutes or s.end_minute % bin_minutes:
                raise ValueError(
                    f"shift {s.name!r} boundaries must align to {bin_minutes}-minute bins"
                )

    def shift_of(self, when: time | int) -> Shift:
        minute = when if isinstance(when, int) else when.hour * 60 + when.minute
        minute %= 1440
        for s in self.shifts:
            if s.contains(minute):
                return s
        raise AssertionError("schedule does not cover the day")  # unreachable

    def boundaries(self) -> list[int]:
        return sorted(s.start_minute for s in self.shifts)

    @classmethod
    def default(cls) -> "ShiftSchedule":
        # Shift 1 starts shortly before midnight so its early stage covers
        # the midnight workload peak.
        return cls(
            (
                Shift("Shift 1", 23 * 60 + 30, 7 * 60 + 30),
                Shift("Shift 2", 7 * 60 + 30, 15 * 60 + 30),
                Shift("Shift 3", 15 * 60 + 30, 23 * 60 + 30),
            )
        )

    @classmethod
    def from_spec(cls, spec) -> "ShiftSchedule":
        """Build a schedule from config data.

        Accepts a list of ``{name, start, end}`` mappings with HH:MM times,
        or the compact string form ``"Shift 1=23:30-07:30;Shift 2=..."``.
        """
        if isinstance(spec, ShiftSchedule):
            return spec
        if isinstance(spec, str):
            entries = []
            for chunk in spec.split(";"):
                name, _, window = chunk.strip().partition("=")
                start, _, end = window.partition("-")
                entries.append({"name": name.strip(), "start": start, "end": end})
            spec = entries
        shifts = tuple(
            Shift(str(e["name"]), _parse_minute(e["start"]), _parse_minute(e["end"]))
            for e in spec
        )
        return cls(shifts)


def _parse_minute(text) -> int:
    hh, _, mm = str(text).strip().partition(":")
    minute = int(hh) * 60 + int(mm or 0)
    if not 0 <= minute < 1440:
        raise ValueError(f"time of day out of range: {text!r}")
    return minute


def shift_of(when: time | int, schedule: ShiftSchedule) -> Shift:
    """The unique shift whose [start, end) window contains the time of day."""
    return schedule.shift_of(when)


@dataclass(frozen=True)
class BinSeries:
    """One day's per-bin values for a (step, quantity).

    Counts are dense (zero when nothing happened); mean quantities are NaN in
    bins without observations.
    """

    date: date
    step: int
    quantity: Quantity
    values: np.ndarray
    bin_minutes: int = 30

    @property
    def n_bins(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class TemplateDay:
    """Baseline curve for a (step, quantity): smoothed mean plus bounds."""

    step: int
    quantity: Quantity
    comparison: Comparison
    ma_mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    support: np.ndarray  # pooled sample size per bin
    n_dates: int
    bin_minutes: int = 30

    @property
    def n_bins(self) -> int:
        return int(self.ma_mean.shape[0])

    def to_csv_text(self) -> str:
        lines = ["bin_start,ma_mean,lower,upper,support"]
        for i in range(self.n_bins):
            minute = i * self.bin_minutes
            stamp = f"{minute // 60:02d}:{minute % 60:02d}"
            if self.support[i] > 0:
                lines.append(
                    f"{stamp},{self.ma_mean[i]!r},{self.lower[i]!r},"
                    f"{self.upper[i]!r},{int(self.support[i])}"
                )
            else:
                lines.append(f"{stamp},,,,0")
        return "\n".join(lines) + "\n"


def matching_dates(log: EventLog, comparison: Comparison, tz: str = "UTC") -> list[date]:
    """Distinct local dates in the log selected by the comparison."""
    dates = log.dates(tz)
    if comparison.weekday is not None:
        dates = [d for d in dates if d.weekday() == comparison.weekday]
    return dates


def _observation_points(
    log: EventLog,
    step: int,
    quantity: Quantity,
    metrics: UnitMetrics | None,
):
    """(epoch ts, value) pairs feeding a binned quantity at one step."""
    action = quantity.count_action
    if action is not None:
        mask = (log.step == step) & (log.action == action)
        return log.ts[mask], None
    if metrics is None:
        metrics = compute_unit_metrics(log)
    if quantity is Quantity.MEAN_IDLE:
        sel = metrics.idle_to == step
        return metrics.idle_at_ts[sel], metrics.idle_seconds[sel]
    sel = (metrics.dur_step == step) & metrics.dur_ok
    return metrics.dur_start_ts[sel], metrics.dur_seconds[sel]


def _local_day_bin(ts: np.ndarray, tz: str, bin_minutes: int):
    local = ts + _utc_offsets(ts, tz)
    return local // 86400, (local % 86400) // (bin_minutes * 60)


def bin_matrix(
    log: EventLog,
    step: int,
    quantity: Quantity,
    dates: list[date],
    tz: str = "UTC",
    bin_minutes: int = 30,
    metrics: UnitMetrics | None = None,
) -> np.ndarray:
    """Per-(date, bin) values as a (len(dates), n_bins) float array."""
    n_bins = 1440 // bin_minutes
    day_nums = np.asarray([day_number(d) for d in dates], dtype=np.int64)
    if not np.all(np.diff(day_nums) > 0):
        raise ValueError("dates must be strictly increasing")
    ts, values = _observation_points(log, step, quantity, metrics)
    day, bins = _local_day_bin(ts, tz, bin_minutes)
    pos = np.searchsorted(day_nums, day)
    pos_ok = (pos < day_nums.shape[0]) & (day_nums[np.minimum(pos, day_nums.shape[0] - 1)] == day)
    day_idx = pos[pos_ok]
    bin_idx = bins[pos_ok]
    if quantity.is_count:
        return kernels.accumulate_counts(day_idx, bin_idx, len(dates), n_bins)
    sums, counts = kernels.accumulate_means(
        day_idx, bin_idx, values[pos_ok], len(dates), n_bins
    )
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def bin_series(
    log: EventLog,
    day: date,
    step: int,
    quantity: Quantity,
    tz: str = "UTC",
    bin_minutes: int = 30,
    metrics: UnitMetrics | None = None,
) -> BinSeries:
    """Bin one local day's observations for a (step, quantity)."""
    matrix = bin_matrix(log, step, quantity, [day], tz, bin_minutes, metrics)
    return BinSeries(
        date=day, step=step, quantity=quantity, values=matrix[0], bin_minutes=bin_minutes
    )


def moving_average(bins, order: int = 3) -> np.ndarray:
    """Centered moving average with truncated edge windows.

    Accepts a sequence where missing slots are None or NaN; a result slot is
    NaN only when its whole window is missing.
    """
    if order < 1 or order % 2 == 0:
        raise ValueError(f"order must be odd and >= 1, got {order}")
    arr = np.asarray(
        [np.nan if v is None else float(v) for v in bins], dtype=np.float64
    )
    return kernels.moving_average_stack(arr.reshape(1, -1), order)[0]


def template_day(
    log: EventLog,
    step: int,
    quantity: Quantity,
    comparison: Comparison,
    schedule: ShiftSchedule | None = None,
    tz: str = "UTC",
    bin_minutes: int = 30,
    ma_order: int = 3,
    lower_pct: float = 2.5,
    upper_pct: float = 97.5,
    metrics: UnitMetrics | None = None,
) -> TemplateDay:
    """Build the template curves by pooling raw bin values across dates.

    For bin i the pool is every matching date's raw value at bins
    i-k..i+k (k = ma_order//2, truncated at the day's edges); the mean of the
    pool is the smoothed mean and the percentile levels give the bounds.
    """
    if schedule is not None:
        schedule.check_bin_alignment(bin_minutes)
    dates = matching_dates(log, comparison, tz)
    if not dates:
        raise NoMatchingDatesError(
            f"no dates matching comparison {comparison.label!r} in the log"
        )
    matrix = bin_matrix(log, step, quantity, dates, tz, bin_minutes, metrics)
    n_bins = matrix.shape[1]
    half = ma_order // 2
    ma_mean = np.full(n_bins, np.nan)
    lower = np.full(n_bins, np.nan)
    upper = np.full(n_bins, np.nan)
    support = np.zeros(n_bins, dtype=np.int64)
    for i in range(n_bins):
        window = matrix[:, max(0, i - half) : min(n_bins, i + half + 1)]
        pool = window[~np.isnan(window)]
        support[i] = pool.size
        if pool.size:
            ma_mean[i] = pool.mean()
            lower[i], upper[i] = np.percentile(pool, [lower_pct, upper_pct])
    return TemplateDay(
        step=step,
        quantity=quantity,
        comparison=comparison,
        ma_mean=ma_mean,
        lower=lower,
        upper=upper,
        support=support,
        n_dates=len(dates),
        bin_minutes=bin_minutes,
    )
