"""Canonical in-memory event store for MES process logs.

The wire format is delimited text: a header line ``timestamp,unit_id,step,action``
followed by one event per line.  Timestamps are ISO-8601 at second resolution
and interpreted as UTC when no offset is given; actions are case-insensitive.
Malformed rows are skipped and reported, never fatal.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from enum import IntEnum
from typing import Iterable, Iterator, Sequence
from zoneinfo import ZoneInfo

import numpy as np

HEADER = "timestamp,unit_id,step,action"
DEFAULT_N_STEPS = 7

_EPOCH_ORDINAL = date(1970, 1, 1).toordinal()


class Action(IntEnum):
    START = 0
    COMPLETE = 1
    SCRAP = 2
    DELAY = 3


ACTION_NAMES = ("start", "complete", "scrap", "delay")
_ACTION_BY_NAME = {name: Action(i) for i, name in enumerate(ACTION_NAMES)}


class LogFormatError(ValueError):
    """Unreadable source or missing/incorrect header."""


@dataclass(frozen=True)
class ProcessEvent:
    """One log row: what happened to a unit, where, and when."""

    timestamp: datetime
    unit_id: str
    step: int
    action: Action


@dataclass(frozen=True)
class RecordError:
    line: int
    reason: str


@dataclass(frozen=True)
class Anomaly:
    kind: str  # "duplicate" or "order"
    unit_id: str
    step: int
    index: int
    detail: str


@dataclass
class ValidationReport:
    record_errors: list[RecordError] = field(default_factory=list)
    anomalies: list[Anomaly] = field(default_factory=list)

    @property
    def n_rejected(self) -> int:
        return len(self.record_errors)

    def to_dict(self) -> dict:
        return {
            "record_errors": [
                {"line": e.line, "reason": e.reason} for e in self.record_errors
            ],
            "anomalies": [
                {
                    "kind": a.kind,
                    "unit_id": a.unit_id,
                    "step": a.step,
                    "index": a.index,
                    "detail": a.detail,
                }
                for a in self.anomalies
            ],
        }


def day_number(d: date) -> int:
    """Days since 1970-01-01 for a calendar date."""
    return d.toordinal() - _EPOCH_ORDINAL


def date_of(day_num: int) -> date:
    return date.fromordinal(int(day_num) + _EPOCH_ORDINAL)


@dataclass(frozen=True)
class LocalIndex:
    """Per-event local-time decomposition under a site timezone."""

    day: np.ndarray  # days since epoch, local calendar
    second: np.ndarray  # second of local day
    bin: np.ndarray  # 30-minute (or configured) bin index
    weekday: np.ndarray  # Monday=0
    bin_minutes: int

    @property
    def n_bins(self) -> int:
        return 1440 // self.bin_minutes


def _utc_offsets(ts: np.ndarray, tz: str) -> np.ndarray:
    if tz in ("UTC", "utc", "Etc/UTC"):
        return np.zeros(ts.shape[0], dtype=np.int64)
    zone = ZoneInfo(tz)
    # Offsets only change on 15-minute boundaries, so one lookup per
    # 15-minute bucket covers DST transitions.
    bucket = ts // 900
    uniq, inv = np.unique(bucket, return_inverse=True)
    offs = np.empty(uniq.shape[0], dtype=np.int64)
    for i, b in enumerate(uniq):
        local = datetime.fromtimestamp(int(b) * 900, tz=zone)
        offs[i] = int(local.utcoffset().total_seconds())
    return offs[inv]


class EventLog:
    """Immutable, normalized sequence of process events.

    Events are stored column-wise (epoch seconds, unit codes, steps, action
    codes) and sorted by (timestamp, unit_id, original input order).
    """

    def __init__(
        self,
        ts: np.ndarray,
        unit_code: np.ndarray,
        step: np.ndarray,
        action: np.ndarray,
        unit_ids: Sequence[str],
        n_steps: int = DEFAULT_N_STEPS,
        provenance: str = "",
        _normalized: bool = False,
    ):
        ts = np.asarray(ts, dtype=np.int64)
        unit_code = np.asarray(unit_code, dtype=np.int32)
        step = np.asarray(step, dtype=np.int16)
        action = np.asarray(action, dtype=np.int8)
        if not _normalized and ts.shape[0] > 1:
            order = np.lexsort((np.arange(ts.shape[0]), unit_code, ts))
            ts, unit_code, step, action = (
                ts[order],
                unit_code[order],
                step[order],
                action[order],
            )
        for arr in (ts, unit_code, step, action):
            arr.flags.writeable = False
        self.ts = ts
        self.unit_code = unit_code
        self.step = step
        self.action = action
        self.unit_ids = tuple(unit_ids)
        self.n_steps = n_steps
        self.provenance = provenance
        self._local_cache: dict[tuple[str, int], LocalIndex] = {}

    # -- construction -------------------------------------------------------

    @classmethod
    def from_events(
        cls,
        events: Iterable[tuple[datetime, str, int, Action]],
        n_steps: int = DEFAULT_N_STEPS,
        provenance: str = "",
    ) -> "EventLog":
        ts_list, units, steps, actions = [], [], [], []
        for when, unit, step, action in events:
            ts_list.append(_to_epoch(when))
            units.append(unit)
            steps.append(step)
            actions.append(int(action))
        if units:
            unit_ids, codes = np.unique(np.asarray(units, dtype=object), return_inverse=True)
        else:
            unit_ids, codes = np.empty(0, dtype=object), np.empty(0, dtype=np.int32)
        return cls(
            np.asarray(ts_list, dtype=np.int64),
            codes.astype(np.int32),
            np.asarray(steps, dtype=np.int16),
            np.asarray(actions, dtype=np.int8),
            [str(u) for u in unit_ids],
            n_steps=n_steps,
            provenance=provenance,
        )

    # -- sequence protocol ---------------------------------------------------

    def __len__(self) -> int:
        return int(self.ts.shape[0])

    def event(self, i: int) -> ProcessEvent:
        return ProcessEvent(
            timestamp=datetime.fromtimestamp(int(self.ts[i]), tz=timezone.utc),
            unit_id=self.unit_ids[self.unit_code[i]],
            step=int(self.step[i]),
            action=Action(int(self.action[i])),
        )

    def __iter__(self) -> Iterator[ProcessEvent]:
        for i in range(len(self)):
            yield self.event(i)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return (
            len(self) == len(other)
            and np.array_equal(self.ts, other.ts)
            and np.array_equal(self.step, other.step)
            and np.array_equal(self.action, other.action)
            and all(
                self.unit_ids[c] == other.unit_ids[oc]
                for c, oc in zip(self.unit_code, other.unit_code)
            )
        )

    # -- local time ----------------------------------------------------------

    def local_index(self, tz: str = "UTC", bin_minutes: int = 30) -> LocalIndex:
        key = (tz, bin_minutes)
        cached = self._local_cache.get(key)
        if cached is not None:
            return cached
        local_ts = self.ts + _utc_offsets(self.ts, tz)
        day = local_ts // 86400
        second = (local_ts % 86400).astype(np.int32)
        idx = LocalIndex(
            day=day,
            second=second,
            bin=(second // (bin_minutes * 60)).astype(np.int16),
            weekday=((day + 3) % 7).astype(np.int8),  # 1970-01-01 was a Thursday
            bin_minutes=bin_minutes,
        )
        self._local_cache[key] = idx
        return idx

    def dates(self, tz: str = "UTC") -> list[date]:
        """Distinct local calendar dates with at least one event, sorted."""
        if len(self) == 0:
            return []
        days = np.unique(self.local_index(tz).day)
        return [date_of(d) for d in days]

    # -- serialization -------------------------------------------------------

    def to_csv_text(self) -> str:
        out = [HEADER]
        for i in range(len(self)):
            when = datetime.fromtimestamp(int(self.ts[i]), tz=timezone.utc)
            out.append(
                f"{when.strftime('%Y-%m-%dT%H:%M:%S')},"
                f"{self.unit_ids[self.unit_code[i]]},"
                f"{int(self.step[i])},"
                f"{ACTION_NAMES[self.action[i]]}"
            )
        return "\n".join(out) + "\n"

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv_text())


def _to_epoch(when: datetime) -> int:
    if when.tzinfo is None:
        when = when.replace(tzinfo=timezone.utc)
    return int(when.timestamp())


def _parse_timestamp(text: str) -> int:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    when = datetime.fromisoformat(text)
    return _to_epoch(when)


def parse_event_log(
    source, n_steps: int = DEFAULT_N_STEPS, provenance: str | None = None
) -> tuple[EventLog, ValidationReport]:
    """Parse delimited text into a normalized EventLog plus a report.

    ``source`` may be bytes, str, a path, or a readable file object.  Every
    well-formed row becomes one event; malformed rows are skipped and listed
    in the report with their physical line number (header is line 1).
    """
    text, origin = _read_source(source, provenance)
    lines = text.splitlines()
    if not lines or lines[0].strip().lower() != HEADER:
        raise LogFormatError(f"missing or invalid header; expected '{HEADER}'")

    report = ValidationReport()
    ts_list: list[int] = []
    units: list[str] = []
    steps: list[int] = []
    actions: list[int] = []

    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            report.record_errors.append(
                RecordError(lineno, f"expected 4 fields, got {len(parts)}")
            )
            continue
        ts_text, unit, step_text, action_text = (p.strip() for p in parts)
        try:
            epoch = _parse_timestamp(ts_text)
        except ValueError:
            report.record_errors.append(
                RecordError(lineno, f"bad timestamp {ts_text!r}")
            )
            continue
        if not unit:
            report.record_errors.append(RecordError(lineno, "empty unit_id"))
            continue
        try:
            step = int(step_text)
        except ValueError:
            report.record_errors.append(
                RecordError(lineno, f"bad step {step_text!r}")
            )
            continue
        if not 1 <= step <= n_steps:
            report.record_errors.append(
                RecordError(lineno, f"unknown step {step} (valid: 1..{n_steps})")
            )
            continue
        action = _ACTION_BY_NAME.get(action_text.lower())
        if action is None:
            report.record_errors.append(
                RecordError(lineno, f"unknown action {action_text!r}")
            )
            continue
        ts_list.append(epoch)
        units.append(unit)
        steps.append(step)
        actions.append(int(action))

    if units:
        unit_ids, codes = np.unique(np.asarray(units, dtype=object), return_inverse=True)
    else:
        unit_ids, codes = np.empty(0, dtype=object), np.empty(0, dtype=np.int32)
    log = EventLog(
        np.asarray(ts_list, dtype=np.int64),
        codes.astype(np.int32),
        np.asarray(steps, dtype=np.int16),
        np.asarray(actions, dtype=np.int8),
        [str(u) for u in unit_ids],
        n_steps=n_steps,
        provenance=origin,
    )
    return log, report


def _read_source(source, provenance: str | None) -> tuple[str, str]:
    if isinstance(source, bytes):
        try:
            return source.decode("utf-8-sig"), provenance or "<bytes>"
        except UnicodeDecodeError as exc:
            raise LogFormatError(f"source is not valid UTF-8: {exc}") from exc
    if isinstance(source, str) and "\n" not in source and os.path.exists(source):
        with open(source, "rb") as fh:
            return _read_source(fh.read(), provenance or str(source))
    if isinstance(source, str):
        return source.lstrip("\ufeff"), provenance or "<text>"
    if isinstance(source, os.PathLike):
        with open(source, "rb") as fh:
            return _read_source(fh.read(), provenance or str(source))
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            return data.lstrip("\ufeff"), provenance or "<stream>"
        return _read_source(data, provenance or "<stream>")
    raise LogFormatError(f"unreadable source type {type(source).__name__}")


def validate_log(log: EventLog) -> ValidationReport:
    """Report exact duplicates and Complete-before-Start ordering anomalies."""
    report = ValidationReport()
    n = len(log)
    if n == 0:
        return report

    rows = np.stack(
        [log.ts, log.unit_code.astype(np.int64), log.step.astype(np.int64),
         log.action.astype(np.int64)],
        axis=1,
    )
    order = np.lexsort((rows[:, 3], rows[:, 2], rows[:, 1], rows[:, 0]))
    srows = rows[order]
    dup = np.flatnonzero((srows[1:] == srows[:-1]).all(axis=1)) + 1
    for pos in dup:
        i = int(order[pos])
        report.anomalies.append(
            Anomaly(
                kind="duplicate",
                unit_id=log.unit_ids[log.unit_code[i]],
                step=int(log.step[i]),
                index=i,
                detail="exact duplicate of an earlier event",
            )
        )

    # Complete with no prior Start at the same (unit, step).  Group events
    # by (unit, step) keeping log order inside each group, then flag
    # completes with zero starts earlier in their group.
    grp_order = np.lexsort((np.arange(n), log.step, log.unit_code))
    u2 = log.unit_code[grp_order]
    s2 = log.step[grp_order]
    a2 = log.action[grp_order]
    new_group = np.ones(n, dtype=bool)
    new_group[1:] = (u2[1:] != u2[:-1]) | (s2[1:] != s2[:-1])
    group_first = np.maximum.accumulate(np.where(new_group, np.arange(n), 0))
    is_start = (a2 == Action.START).astype(np.int64)
    cs = np.cumsum(is_start)
    before_group = np.where(group_first > 0, cs[np.maximum(group_first - 1, 0)], 0)
    prior_starts = cs - is_start - before_group
    bad = np.flatnonzero((a2 == Action.COMPLETE) & (prior_starts == 0))
    for i in sorted(int(grp_order[p]) for p in bad):
        report.anomalies.append(
            Anomaly(
                kind="order",
                unit_id=log.unit_ids[log.unit_code[i]],
                step=int(log.step[i]),
                index=i,
                detail="complete before any start at this step",
            )
        )
    return report


def filter_log(
    log: EventLog,
    date_range: tuple[date | None, date | None] | None = None,
    steps: Iterable[int] | None = None,
    weekdays: Iterable[int] | None = None,
    tz: str = "UTC",
) -> EventLog:
    """Subset of the log matching all given filters, order preserved.

    ``date_range`` bounds are inclusive local dates; ``weekdays`` uses
    Monday=0.  ``None`` leaves a dimension unfiltered.
    """
    mask = np.ones(len(log), dtype=bool)
    if date_range is not None:
        lo, hi = date_range
        local = log.local_index(tz)
        if lo is not None:
            mask &= local.day >= day_number(lo)
        if hi is not None:
            mask &= local.day <= day_number(hi)
    if steps is not None:
        mask &= np.isin(log.step, np.asarray(sorted(set(steps)), dtype=np.int16))
    if weekdays is not None:
        local = log.local_index(tz)
        mask &= np.isin(local.weekday, np.asarray(sorted(set(weekdays)), dtype=np.int8))
    idx = np.flatnonzero(mask)
    kept_codes = log.unit_code[idx]
    uniq_codes, new_codes = np.unique(kept_codes, return_inverse=True)
    return EventLog(
        log.ts[idx],
        new_codes.astype(np.int32),
        log.step[idx],
        log.action[idx],
        [log.unit_ids[c] for c in uniq_codes],
        n_steps=log.n_steps,
        provenance=log.provenance,
        _normalized=True,
    )
