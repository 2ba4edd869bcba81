from datetime import date

import numpy as np
import pytest

from mesview import (
    Comparison,
    GaugeColor,
    Quantity,
    TemplateDay,
    bin_series,
    compare_today,
    daily_kpis,
    gauge_color,
    homepage_state,
    moving_average,
)
from mesview.control import BinFlag, NoHistoryError, percentile_rank
from mesview.synthgen import generate_log, preset_paperlike
from mesview.timeseries import BinSeries

from .helpers import build_log


def wide_template(ma_mean, lower=-1e9, upper=1e9, step=1, quantity=Quantity.STARTS):
    n = len(ma_mean)
    return TemplateDay(
        step=step,
        quantity=quantity,
        comparison=Comparison.all_days(),
        ma_mean=np.asarray(ma_mean, dtype=float),
        lower=np.full(n, lower, dtype=float),
        upper=np.full(n, upper, dtype=float),
        support=np.full(n, 10, dtype=np.int64),
        n_dates=5,
    )


def series_of(values, step=1, quantity=Quantity.STARTS):
    return BinSeries(
        date=date(2020, 3, 4),
        step=step,
        quantity=quantity,
        values=np.asarray(values, dtype=float),
    )


# -- compare_today ---------------------------------------------------------------

def test_compare_mean_curve_within_wide_bounds():
    rng = np.random.default_rng(0)
    curve = rng.uniform(1, 5, size=48)
    tpl = wide_template(curve)
    report = compare_today(series_of(curve), tpl)
    assert report.exceedance_fraction == 0.0
    assert report.n_data_bins == 48
    assert all(f is BinFlag.WITHIN for f in report.flags)


def test_compare_above_everywhere():
    tpl = wide_template([1.0] * 48, lower=0.0, upper=2.0)
    report = compare_today(series_of([2.5] * 48), tpl)
    assert report.exceedance_fraction == 1.0
    assert all(f is BinFlag.ABOVE for f in report.flags)


def test_compare_bounds_are_closed():
    # a constant curve equal to the bound survives its own smoothing
    tpl = wide_template([1.0] * 48, lower=0.5, upper=2.0)
    assert compare_today(series_of([0.5] * 48), tpl).exceedance_fraction == 0.0
    assert compare_today(series_of([2.0] * 48), tpl).exceedance_fraction == 0.0
    below = compare_today(series_of([0.4999] * 48), tpl)
    assert below.exceedance_fraction == 1.0
    assert all(f is BinFlag.BELOW for f in below.flags)


def test_compare_no_data_bins():
    tpl = wide_template([1.0] * 48, lower=0.0, upper=2.0)
    tpl.lower[:4] = np.nan  # template has no data in the first four bins
    values = np.full(48, 1.0)
    report = compare_today(series_of(values), tpl)
    assert report.flags[0] is BinFlag.NO_DATA
    assert report.n_data_bins == 44
    # today absent in a window of bins -> no-data there too
    values2 = np.full(48, np.nan)
    values2[24:] = 1.0
    report2 = compare_today(series_of(values2), tpl)
    assert report2.flags[10] is BinFlag.NO_DATA
    assert report2.flags[30] is BinFlag.WITHIN


def test_compare_requires_matching_series():
    tpl = wide_template([1.0] * 48, quantity=Quantity.STARTS)
    with pytest.raises(ValueError):
        compare_today(series_of([1.0] * 48, quantity=Quantity.SCRAPS), tpl)


def test_compare_fraction_definition():
    tpl = wide_template([1.0] * 48, lower=0.0, upper=2.0)
    values = np.full(48, 1.0)
    values[:12] = 30.0  # smoothed, the first 13 bins exceed
    report = compare_today(series_of(values), tpl)
    n_out = sum(1 for f in report.flags if f in (BinFlag.ABOVE, BinFlag.BELOW))
    assert report.exceedance_fraction == pytest.approx(n_out / report.n_data_bins)


# -- daily KPIs -------------------------------------------------------------------

def test_daily_kpis_empty_day():
    log = build_log([("2020-03-04T10:00:00", "U1", 1, "start")])
    kpis = daily_kpis(log, date(2020, 3, 5), 1)
    assert (kpis.n_start, kpis.n_complete, kpis.n_scrap) == (0, 0, 0)
    assert kpis.mean_idle is None
    assert kpis.mean_duration is None


def test_daily_kpis_hand_count():
    # 5 starts, 4 completes, 1 scrap at step 2 on the day
    rows = []
    for i in range(5):
        rows.append((f"2020-03-04T08:0{i}:00", f"U{i}", 2, "start"))
    for i in range(4):
        rows.append((f"2020-03-04T09:0{i}:00", f"U{i}", 2, "complete"))
    rows.append(("2020-03-04T09:30:00", "U4", 2, "scrap"))
    # different day, should not count
    rows.append(("2020-03-05T08:00:00", "U9", 2, "start"))
    kpis = daily_kpis(build_log(rows), date(2020, 3, 4), 2)
    assert (kpis.n_start, kpis.n_complete, kpis.n_scrap) == (5, 4, 1)


def test_daily_kpis_mean_idle_45min():
    rows = [
        ("2020-03-04T10:00:00", "U1", 1, "complete"),
        ("2020-03-04T10:45:00", "U1", 2, "start"),
    ]
    kpis = daily_kpis(build_log(rows), date(2020, 3, 4), 2)
    assert kpis.mean_idle == pytest.approx(45 * 60)


# -- gauge colors -------------------------------------------------------------------

HISTORY = list(range(100))  # distinct values 0..99


@pytest.mark.parametrize(
    "kind,today,expected",
    [
        (Quantity.STARTS, 9.5, GaugeColor.RED),       # rank 10 < 20
        (Quantity.STARTS, 29.5, GaugeColor.ORANGE),   # 20 < rank 30 < 40
        (Quantity.STARTS, 49.5, GaugeColor.GREEN),    # rank 50 > 40
        (Quantity.COMPLETES, 49.5, GaugeColor.GREEN),
        (Quantity.SCRAPS, 49.5, GaugeColor.GREEN),    # rank 50 < 60
        (Quantity.SCRAPS, 69.5, GaugeColor.ORANGE),   # 60 < rank 70 < 80
        (Quantity.SCRAPS, 89.5, GaugeColor.RED),      # rank 90 > 80
        (Quantity.MEAN_IDLE, 89.5, GaugeColor.RED),
        (Quantity.MEAN_DURATION, 69.5, GaugeColor.ORANGE),
    ],
)
def test_gauge_table_bands(kind, today, expected):
    state = gauge_color(kind, today, HISTORY)
    assert state.color is expected


def test_gauge_boundaries_take_less_severe_color():
    history = list(range(10))  # ranks move in steps of 10
    assert gauge_color(Quantity.STARTS, 1.5, history).percentile_rank == 20.0
    assert gauge_color(Quantity.STARTS, 1.5, history).color is GaugeColor.ORANGE
    assert gauge_color(Quantity.STARTS, 3.5, history).color is GaugeColor.GREEN
    assert gauge_color(Quantity.SCRAPS, 5.5, history).percentile_rank == 60.0
    assert gauge_color(Quantity.SCRAPS, 5.5, history).color is GaugeColor.GREEN
    assert gauge_color(Quantity.SCRAPS, 7.5, history).color is GaugeColor.ORANGE


def test_gauge_tie_midpoint():
    # equal to every historical value -> rank 50 -> green for idle
    state = gauge_color(Quantity.MEAN_IDLE, 3.0, [3.0, 3.0, 3.0])
    assert state.percentile_rank == 50.0
    assert state.color is GaugeColor.GREEN


def test_gauge_empty_history_errors():
    with pytest.raises(NoHistoryError):
        gauge_color(Quantity.STARTS, 1.0, [])


def test_gauge_rank_invariance_under_monotone_maps():
    rng = np.random.default_rng(8)
    history = rng.normal(size=30).tolist()
    today = history[7]
    base = gauge_color(Quantity.SCRAPS, today, history)
    for _ in range(20):
        a = float(rng.uniform(0.1, 5.0))
        b = float(rng.uniform(0.1, 3.0))
        c = float(rng.normal())

        def f(x):
            return a * x**3 + b * x + c

        mapped = gauge_color(Quantity.SCRAPS, f(today), [f(h) for h in history])
        assert mapped.color is base.color
        assert mapped.percentile_rank == pytest.approx(base.percentile_rank)


def test_rank_partition_no_gaps():
    # every rank maps to exactly one color for both directions
    from mesview.control import GaugeThresholds

    thresholds = GaugeThresholds()
    for rank in np.linspace(0, 100, 1001):
        for kind in (Quantity.STARTS, Quantity.SCRAPS):
            color = thresholds.color(kind, float(rank))
            assert color in (GaugeColor.GREEN, GaugeColor.ORANGE, GaugeColor.RED)


def test_percentile_rank_definition():
    assert percentile_rank(5.0, np.array([1.0, 2.0, 3.0])) == 100.0
    assert percentile_rank(0.0, np.array([1.0, 2.0, 3.0])) == 0.0
    assert percentile_rank(2.0, np.array([1.0, 2.0, 3.0])) == 50.0


# -- homepage state ------------------------------------------------------------------

def two_identical_days():
    rows = []
    for day, unit in (("2020-03-03", "U1"), ("2020-03-04", "U2")):
        rows += [
            (f"{day}T08:00:00", unit, 1, "start"),
            (f"{day}T08:30:00", unit, 1, "complete"),
            (f"{day}T08:45:00", unit, 2, "start"),
            (f"{day}T09:15:00", unit, 2, "complete"),
        ]
    return build_log(rows)


def test_homepage_degenerate_history_all_green():
    log = two_identical_days()
    gauges = homepage_state(log, date(2020, 3, 4), 1, Comparison.all_days())
    assert len(gauges) == 5
    assert all(g.color is GaugeColor.GREEN for g in gauges)
    ranked = [g for g in gauges if g.percentile_rank is not None]
    assert all(g.percentile_rank == 50.0 for g in ranked)
    assert all(g.history_n == 1 for g in gauges if g.kind.is_count)


def test_homepage_excludes_chosen_date():
    log = two_identical_days()
    with pytest.raises(NoHistoryError):
        # only one other day exists; restricting to Tuesdays leaves nothing
        homepage_state(log, date(2020, 3, 3), 1, Comparison.same_weekday(1))


def test_homepage_scrap_maximum_is_red():
    log = generate_log(preset_paperlike(n_units_per_day=60, n_days=8, seed=13))
    dates = log.dates()
    # rank oracle: pick the day with the strictly largest scrap count at step 2
    from mesview.events import Action, day_number

    local = log.local_index("UTC")
    scrap_mask = (log.step == 2) & (log.action == Action.SCRAP)
    per_day = {
        d: int(np.count_nonzero(scrap_mask & (local.day == day_number(d))))
        for d in dates
    }
    top_day = max(per_day, key=per_day.get)
    others = [v for d, v in per_day.items() if d != top_day]
    if per_day[top_day] > max(others):
        gauges = homepage_state(log, top_day, 2, Comparison.all_days())
        scrap_gauge = next(g for g in gauges if g.kind is Quantity.SCRAPS)
        assert scrap_gauge.percentile_rank == 100.0
        assert scrap_gauge.color is GaugeColor.RED


def test_homepage_same_weekday_history_count():
    log = generate_log(
        preset_paperlike(n_units_per_day=20, n_days=15, seed=4,
                         start_date=date(2020, 3, 2))
    )
    # calendar oracle: Mar 2..Mar 16 2020 contains Wednesdays Mar 4 and Mar 11
    today = date(2020, 3, 11)
    gauges = homepage_state(log, today, 1, Comparison.same_weekday(2))
    count_gauges = [g for g in gauges if g.kind.is_count]
    assert all(g.history_n == 1 for g in count_gauges)
