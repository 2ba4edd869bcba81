"""Unit-level metrics: idle time between steps, step durations, summaries.

Idle time pairs the last Complete of a unit with its next Start (at whatever
step the unit goes to next); a Scrap clears the pending Complete so scrapped
units produce no trailing intervals.  Duration of a step spans the first
Start to the last Complete, which by construction includes any revisit
excursion recorded in between.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import kernels
from .events import Action, EventLog, ProcessEvent


@dataclass(frozen=True)
class UnitTrace:
    """Time-ordered events of a single unit."""

    unit_id: str
    ts: np.ndarray
    step: np.ndarray
    action: np.ndarray

    def __len__(self) -> int:
        return int(self.ts.shape[0])

    @property
    def events(self) -> list[ProcessEvent]:
        return [
            ProcessEvent(
                timestamp=datetime.fromtimestamp(int(t), tz=timezone.utc),
                unit_id=self.unit_id,
                step=int(s),
                action=Action(int(a)),
            )
            for t, s, a in zip(self.ts, self.step, self.action)
        ]


@dataclass(frozen=True)
class IdleInterval:
    unit_id: str
    from_step: int
    to_step: int
    idle_seconds: float
    started_at: datetime  # the Start that ends the idle gap


@dataclass(frozen=True)
class StepDuration:
    unit_id: str
    step: int
    duration_seconds: float | None
    complete_flag: bool
    started_at: datetime  # first Start at the step


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    sd: float
    median: float
    p2_5: float
    p97_5: float
    n: int


@dataclass(frozen=True)
class UnitMetrics:
    """Column-wise idle intervals and duration windows for a whole log."""

    idle_unit: np.ndarray  # unit codes
    idle_from: np.ndarray
    idle_to: np.ndarray
    idle_seconds: np.ndarray
    idle_at_ts: np.ndarray  # epoch of the Start ending the gap
    dur_unit: np.ndarray
    dur_step: np.ndarray
    dur_seconds: np.ndarray  # valid only where dur_ok
    dur_ok: np.ndarray  # bool: has a Complete and a non-negative window
    dur_start_ts: np.ndarray  # epoch of the first Start
    n_steps: int

    @property
    def n_idle(self) -> int:
        return int(self.idle_seconds.shape[0])


def _unit_major(log: EventLog):
    """Reorder the log unit-major (stable, so time order survives per unit)."""
    order = np.argsort(log.unit_code, kind="stable")
    counts = np.bincount(log.unit_code, minlength=len(log.unit_ids))
    offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    return order, offsets


def compute_unit_metrics(log: EventLog) -> UnitMetrics:
    """Scan the whole log once and extract all idle gaps and durations."""
    order, offsets = _unit_major(log)
    idle, dur = kernels.trace_scan(
        log.ts[order], log.step[order], log.action[order], offsets, log.n_steps
    )
    idle_unit, idle_from, idle_to, idle_s, idle_at = idle
    dur_unit, dur_step, dur_fs, dur_lc, dur_has = dur
    dur_sec = (dur_lc - dur_fs).astype(np.float64)
    dur_ok = (dur_has == 1) & (dur_sec >= 0)
    return UnitMetrics(
        idle_unit=idle_unit,
        idle_from=idle_from,
        idle_to=idle_to,
        idle_seconds=idle_s.astype(np.float64),
        idle_at_ts=idle_at,
        dur_unit=dur_unit,
        dur_step=dur_step,
        dur_seconds=dur_sec,
        dur_ok=dur_ok,
        dur_start_ts=dur_fs,
        n_steps=log.n_steps,
    )


def unit_traces(log: EventLog) -> list[UnitTrace]:
    """Partition the log by unit; traces keep per-unit time order."""
    order, offsets = _unit_major(log)
    ts = log.ts[order]
    step = log.step[order]
    action = log.action[order]
    traces = []
    for u, unit_id in enumerate(log.unit_ids):
        lo, hi = offsets[u], offsets[u + 1]
        traces.append(UnitTrace(unit_id, ts[lo:hi], step[lo:hi], action[lo:hi]))
    return traces


def idle_times(trace: UnitTrace) -> list[IdleInterval]:
    """Idle gaps of one unit: last Complete -> next Start."""
    offsets = np.array([0, len(trace)], dtype=np.int64)
    n_steps = int(trace.step.max()) if len(trace) else 1
    idle, _ = kernels.trace_scan(trace.ts, trace.step, trace.action, offsets, n_steps)
    _, idle_from, idle_to, idle_s, idle_at = idle
    return [
        IdleInterval(
            unit_id=trace.unit_id,
            from_step=int(f),
            to_step=int(t),
            idle_seconds=float(s),
            started_at=datetime.fromtimestamp(int(at), tz=timezone.utc),
        )
        for f, t, s, at in zip(idle_from, idle_to, idle_s, idle_at)
    ]


def step_duration(trace: UnitTrace, step: int) -> StepDuration:
    """Duration at a step: first Start to last Complete, revisits included."""
    at_step = trace.step == step
    starts = trace.ts[at_step & (trace.action == Action.START)]
    if starts.shape[0] == 0:
        raise ValueError(f"unit {trace.unit_id!r} has no start at step {step}")
    completes = trace.ts[at_step & (trace.action == Action.COMPLETE)]
    first_start = int(starts[0])
    started_at = datetime.fromtimestamp(first_start, tz=timezone.utc)
    if completes.shape[0] == 0 or int(completes[-1]) < first_start:
        return StepDuration(trace.unit_id, step, None, False, started_at)
    return StepDuration(
        trace.unit_id,
        step,
        float(int(completes[-1]) - first_start),
        True,
        started_at,
    )


def summarize(values) -> SummaryStats:
    """Mean, sample SD and the 2.5/50/97.5 percentiles of a sample.

    Percentiles interpolate linearly between closest order statistics.
    """
    arr = np.sort(np.asarray(values, dtype=np.float64))  # permutation-invariant
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample")
    sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    p2_5, median, p97_5 = np.percentile(arr, [2.5, 50.0, 97.5])
    return SummaryStats(
        mean=float(np.mean(arr)),
        sd=sd,
        median=float(median),
        p2_5=float(p2_5),
        p97_5=float(p97_5),
        n=int(arr.size),
    )


def rescale(values) -> np.ndarray:
    """Divide by the sample mean, producing dimensionless multiples of it."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot rescale an empty sample")
    mean = float(np.mean(arr))
    if mean <= 0:
        raise ValueError(f"rescaling requires a positive mean, got {mean}")
    return arr / mean


@dataclass(frozen=True)
class ActionBreakdown:
    """Counts per (step, action) and each action's split across steps."""

    counts: np.ndarray  # (n_steps, 4) int64
    n_steps: int

    def count(self, step: int, action: Action) -> int:
        return int(self.counts[step - 1, int(action)])

    def proportion(self, step: int, action: Action) -> float:
        total = int(self.counts[:, int(action)].sum())
        if total == 0:
            return 0.0
        return self.count(step, action) / total

    def rows(self) -> list[dict]:
        out = []
        for step in range(1, self.n_steps + 1):
            for action in Action:
                out.append(
                    {
                        "step": step,
                        "action": action.name.lower(),
                        "count": self.count(step, action),
                        "proportion": self.proportion(step, action),
                    }
                )
        return out


def action_breakdown(log: EventLog) -> ActionBreakdown:
    counts = np.zeros((log.n_steps, 4), dtype=np.int64)
    flat = (log.step.astype(np.int64) - 1) * 4 + log.action
    counts.ravel()[:] = np.bincount(flat, minlength=log.n_steps * 4)
    return ActionBreakdown(counts=counts, n_steps=log.n_steps)


def idle_values_for_step(metrics: UnitMetrics, step: int) -> np.ndarray:
    """Idle gaps attributed to a step (the step the unit is about to start)."""
    return metrics.idle_seconds[metrics.idle_to == step]

def duration_values_for_step(metrics: UnitMetrics, step: int) -> np.ndarray:
    """Completed durations at a step; incomplete visits are excluded."""
    return metrics.dur_seconds[(metrics.dur_step == step) & metrics.dur_ok]


def summary_table(
    metrics: UnitMetrics, quantity: str, rescaled: bool = True
) -> list[tuple[int, SummaryStats]]:
    """Per-step summary rows for idle or duration values.

    Steps with no observations are omitted.  With ``rescaled`` each step's
    sample is divided by its own mean first.
    """
    if quantity not in ("idle", "duration"):
        raise ValueError(f"unknown summary quantity {quantity!r}")
    rows = []
    for step in range(1, metrics.n_steps + 1):
        if quantity == "idle":
            vals = idle_values_for_step(metrics, step)
        else:
            vals = duration_values_for_step(metrics, step)
        if vals.size == 0:
            continue
        if rescaled:
            vals = rescale(vals) if float(np.mean(vals)) > 0 else vals
        rows.append((step, summarize(vals)))
    return rows
