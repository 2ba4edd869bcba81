"""HTTP/JSON API over a durable, append-only event store.

Persistence is the canonical delimited log re-read at startup; every response
is a pure function of (persisted events, config, query).  All values leave
the API rescaled to dimensionless multiples of the store mean for their
(step, quantity), so clients never see absolute time units.
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass
from datetime import date

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from . import kernels
from .config import AppConfig
from .control import (
    GAUGE_ORDER,
    NoHistoryError,
    compare_today,
    daily_kpis,
    homepage_state,
)
from .events import EventLog, LogFormatError, parse_event_log, validate_log
from .metrics import UnitMetrics, action_breakdown, compute_unit_metrics
from .timeseries import (
    Comparison,
    NoMatchingDatesError,
    Quantity,
    bin_series,
    moving_average,
    template_day,
)

LOG_FILENAME = "events.csv"


@dataclass(frozen=True)
class Rescaler:
    """Full-store means per (step, quantity) used as rescaling divisors."""

    unit_means: dict  # (step, quantity) -> mean of unit-level values
    bin_means: dict  # (step, quantity) -> mean count per (date, bin) cell
    daily_means: dict  # (step, quantity) -> mean count per date

    @classmethod
    def compute(cls, log: EventLog, metrics: UnitMetrics, tz: str, bin_minutes: int):
        n_dates = len(log.dates(tz))
        n_bins = 1440 // bin_minutes
        unit_means, bin_means, daily_means = {}, {}, {}
        for step in range(1, log.n_steps + 1):
            for q in Quantity:
                if q.is_count:
                    total = int(
                        np.count_nonzero(
                            (log.step == step) & (log.action == q.count_action)
                        )
                    )
                    if n_dates:
                        bin_means[(step, q)] = total / (n_dates * n_bins)
                        daily_means[(step, q)] = total / n_dates
                elif q is Quantity.MEAN_IDLE:
                    vals = metrics.idle_seconds[metrics.idle_to == step]
                    if vals.size:
                        unit_means[(step, q)] = float(vals.mean())
                else:
                    sel = (metrics.dur_step == step) & metrics.dur_ok
                    vals = metrics.dur_seconds[sel]
                    if vals.size:
                        unit_means[(step, q)] = float(vals.mean())
        return cls(unit_means, bin_means, daily_means)

    def divisor(self, step: int, quantity: Quantity, granularity: str) -> float:
        table = {
            "unit": self.unit_means,
            "bin": self.bin_means,
            "day": self.daily_means,
        }[granularity]
        if quantity.is_count:
            mean = table.get((step, quantity), 0.0) if granularity != "unit" else 0.0
        else:
            mean = self.unit_means.get((step, quantity), 0.0)
        return mean if mean > 0 else 0.0

    def scale(self, value, step: int, quantity: Quantity, granularity: str):
        div = self.divisor(step, quantity, granularity)
        if div <= 0:
            return value
        if isinstance(value, np.ndarray):
            return value / div
        return None if value is None else value / div


@dataclass(frozen=True)
class StoreSnapshot:
    log: EventLog
    metrics: UnitMetrics
    scaler: Rescaler
    dates: list[date]


class EventStore:
    """Append-only persisted log plus derived in-memory state.

    Ingestion is serialized; readers always see a complete snapshot because
    the snapshot reference is swapped in a single assignment.
    """

    def __init__(self, config: AppConfig):
        self.config = config
        os.makedirs(config.data_dir, exist_ok=True)
        self.path = os.path.join(config.data_dir, LOG_FILENAME)
        self._lock = threading.Lock()
        if os.path.exists(self.path):
            log, _ = parse_event_log(self.path, n_steps=config.n_steps)
        else:
            log, _ = parse_event_log(
                "timestamp,unit_id,step,action\n", n_steps=config.n_steps
            )
        kernels.warmup()
        self._snap = self._build_snapshot(log)

    def _build_snapshot(self, log: EventLog) -> StoreSnapshot:
        metrics = compute_unit_metrics(log)
        scaler = Rescaler.compute(
            log, metrics, self.config.timezone, self.config.bin_minutes
        )
        return StoreSnapshot(
            log=log, metrics=metrics, scaler=scaler, dates=log.dates(self.config.timezone)
        )

    def snapshot(self) -> StoreSnapshot:
        return self._snap

    def ingest(self, body: bytes):
        incoming, report = parse_event_log(body, n_steps=self.config.n_steps)
        report.anomalies = validate_log(incoming).anomalies
        with self._lock:
            merged = _concat_logs(self._snap.log, incoming)
            snap = self._build_snapshot(merged)
            if len(incoming):
                header_needed = not os.path.exists(self.path)
                text = incoming.to_csv_text()
                with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                    fh.write(text if header_needed else text.split("\n", 1)[1])
            elif not os.path.exists(self.path):
                with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write("timestamp,unit_id,step,action\n")
            self._snap = snap
        return report, len(incoming)


def _concat_logs(a: EventLog, b: EventLog) -> EventLog:
    if len(a) == 0:
        return b
    if len(b) == 0:
        return a
    ids_a = np.asarray(a.unit_ids, dtype=object)[a.unit_code]
    ids_b = np.asarray(b.unit_ids, dtype=object)[b.unit_code]
    unit_ids, codes = np.unique(np.concatenate([ids_a, ids_b]), return_inverse=True)
    return EventLog(
        np.concatenate([a.ts, b.ts]),
        codes.astype(np.int32),
        np.concatenate([a.step, b.step]),
        np.concatenate([a.action, b.action]),
        [str(u) for u in unit_ids],
        n_steps=a.n_steps,
        provenance=a.provenance,
    )


def _fnum(x):
    """JSON-safe number: NaN and None become null."""
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def _flist(arr):
    return [_fnum(v) for v in arr]


def create_app(config: AppConfig | None = None, store: EventStore | None = None) -> FastAPI:
    config = config or AppConfig()
    config.validate()
    store = store or EventStore(config)
    app = FastAPI(title="mesview", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store
    app.state.config = config

    def check_step(step: int):
        if not 1 <= step <= config.n_steps:
            raise HTTPException(
                status_code=404,
                detail=f"unknown step {step} (valid: 1..{config.n_steps})",
            )

    def parse_date(text: str) -> date:
        try:
            return date.fromisoformat(text)
        except ValueError:
            raise HTTPException(status_code=422, detail=f"bad date {text!r}") from None

    def parse_quantity(text: str) -> Quantity:
        try:
            return Quantity.parse(text)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None

    def parse_comparison(text: str, reference: date | None) -> Comparison:
        try:
            return Comparison.parse(text, reference)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None

    @app.post("/ingest")
    async def ingest(request: Request):
        body = await request.body()
        if not body.strip():
            return JSONResponse(
                {"accepted": 0, "rejected": 0, "errors": [], "anomalies": []}
            )
        try:
            report, accepted = store.ingest(body)
        except LogFormatError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return JSONResponse(
            {
                "accepted": accepted,
                "rejected": report.n_rejected,
                "errors": [
                    {"line": e.line, "reason": e.reason} for e in report.record_errors
                ],
                "anomalies": [
                    {
                        "kind": a.kind,
                        "unit_id": a.unit_id,
                        "step": a.step,
                        "detail": a.detail,
                    }
                    for a in report.anomalies
                ],
            }
        )

    @app.get("/kpis")
    def kpis(
        date_: str = Query(alias="date"),
        step: int = Query(),
        comparison: str = Query(default="all"),
    ):
        check_step(step)
        day = parse_date(date_)
        comp = parse_comparison(comparison, day)
        snap = store.snapshot()
        tz = config.timezone
        today = daily_kpis(snap.log, day, step, tz, snap.metrics)
        try:
            gauges = homepage_state(
                snap.log, day, step, comp, tz, config.thresholds, snap.metrics
            )
        except NoHistoryError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        scaler = snap.scaler

        def scale_kpi(kind: Quantity, value):
            grain = "day" if kind.is_count else "unit"
            return _fnum(scaler.scale(value, step, kind, grain))

        return JSONResponse(
            {
                "date": day.isoformat(),
                "step": step,
                "comparison": comp.label,
                "kpis": {
                    "starts": scale_kpi(Quantity.STARTS, float(today.n_start)),
                    "completes": scale_kpi(Quantity.COMPLETES, float(today.n_complete)),
                    "scraps": scale_kpi(Quantity.SCRAPS, float(today.n_scrap)),
                    "mean_idle": scale_kpi(Quantity.MEAN_IDLE, today.mean_idle),
                    "mean_duration": scale_kpi(
                        Quantity.MEAN_DURATION, today.mean_duration
                    ),
                },
                "gauges": [
                    {
                        "metric": g.kind.value,
                        "today": scale_kpi(g.kind, g.today_value),
                        "rank": _fnum(g.percentile_rank),
                        "color": g.color.value,
                        "history_n": g.history_n,
                    }
                    for g in gauges
                ],
            }
        )

    @app.get("/template")
    def template(
        step: int = Query(),
        quantity: str = Query(),
        comparison: str = Query(default="all"),
        date_: str | None = Query(default=None, alias="date"),
    ):
        check_step(step)
        q = parse_quantity(quantity)
        ref = parse_date(date_) if date_ else None
        comp = parse_comparison(comparison, ref)
        snap = store.snapshot()
        try:
            tpl = template_day(
                snap.log,
                step,
                q,
                comp,
                schedule=config.shifts,
                tz=config.timezone,
                bin_minutes=config.bin_minutes,
                ma_order=config.ma_order,
                lower_pct=config.lower_pct,
                upper_pct=config.upper_pct,
                metrics=snap.metrics,
            )
        except NoMatchingDatesError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        grain = "bin" if q.is_count else "unit"
        scale = lambda arr: _flist(snap.scaler.scale(arr, step, q, grain))  # noqa: E731
        return JSONResponse(
            {
                "step": step,
                "quantity": q.value,
                "comparison": comp.label,
                "n_dates": tpl.n_dates,
                "bin_minutes": tpl.bin_minutes,
                "ma_mean": scale(tpl.ma_mean),
                "lower": scale(tpl.lower),
                "upper": scale(tpl.upper),
                "support": [int(s) for s in tpl.support],
            }
        )

    @app.get("/series")
    def series(
        date_: str = Query(alias="date"),
        step: int = Query(),
        quantity: str = Query(),
    ):
        check_step(step)
        day = parse_date(date_)
        q = parse_quantity(quantity)
        snap = store.snapshot()
        today = bin_series(
            snap.log, day, step, q, config.timezone, config.bin_minutes, snap.metrics
        )
        smoothed = moving_average(today.values, config.ma_order)
        grain = "bin" if q.is_count else "unit"
        return JSONResponse(
            {
                "date": day.isoformat(),
                "step": step,
                "quantity": q.value,
                "bin_minutes": config.bin_minutes,
                "raw": _flist(snap.scaler.scale(today.values, step, q, grain)),
                "smoothed": _flist(snap.scaler.scale(smoothed, step, q, grain)),
            }
        )

    @app.get("/compare")
    def compare(
        date_: str = Query(alias="date"),
        step: int = Query(),
        quantity: str = Query(),
        comparison: str = Query(default="all"),
    ):
        check_step(step)
        day = parse_date(date_)
        q = parse_quantity(quantity)
        comp = parse_comparison(comparison, day)
        snap = store.snapshot()
        try:
            tpl = template_day(
                snap.log,
                step,
                q,
                comp,
                schedule=config.shifts,
                tz=config.timezone,
                bin_minutes=config.bin_minutes,
                ma_order=config.ma_order,
                lower_pct=config.lower_pct,
                upper_pct=config.upper_pct,
                metrics=snap.metrics,
            )
        except NoMatchingDatesError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        today = bin_series(
            snap.log, day, step, q, config.timezone, config.bin_minutes, snap.metrics
        )
        report = compare_today(today, tpl, config.ma_order)
        return JSONResponse(
            {
                "date": day.isoformat(),
                "step": step,
                "quantity": q.value,
                "comparison": comp.label,
                "flags": [f.value for f in report.flags],
                "exceedance_fraction": report.exceedance_fraction,
                "n_data_bins": report.n_data_bins,
            }
        )

    @app.get("/breakdown")
    def breakdown():
        snap = store.snapshot()
        return JSONResponse(
            {
                "n_steps": snap.log.n_steps,
                "rows": action_breakdown(snap.log).rows(),
            }
        )

    @app.get("/meta")
    def meta():
        snap = store.snapshot()
        dates = snap.dates
        return JSONResponse(
            {
                "steps": list(range(1, config.n_steps + 1)),
                "n_events": len(snap.log),
                "date_range": {
                    "start": dates[0].isoformat() if dates else None,
                    "end": dates[-1].isoformat() if dates else None,
                },
                "dates": [d.isoformat() for d in dates],
                "quantities": [q.value for q in Quantity],
                "gauge_order": [q.value for q in GAUGE_ORDER],
                "config": config.to_dict(),
            }
        )

    @app.get("/health")
    def health():
        return PlainTextResponse("ok")

    static_dir = config.static_dir
    if static_dir and os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")

    return app


def run(config: AppConfig) -> None:  # pragma: no cover - exercised manually
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
