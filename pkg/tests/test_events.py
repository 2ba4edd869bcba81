import io
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mesview import Action, filter_log, parse_event_log, validate_log
from mesview.events import LogFormatError, day_number, date_of

from .helpers import FIXTURE_20, build_log

HEADER = "timestamp,unit_id,step,action\n"


def test_parse_header_only():
    log, report = parse_event_log(HEADER)
    assert len(log) == 0
    assert report.n_rejected == 0
    assert report.anomalies == []


def test_parse_single_row():
    log, report = parse_event_log(HEADER + "2020-03-04T10:00:00,U001,3,start\n")
    assert len(log) == 1
    assert report.n_rejected == 0
    ev = log.event(0)
    assert ev.unit_id == "U001"
    assert ev.step == 3
    assert ev.action is Action.START


def test_parse_action_case_insensitive():
    log, _ = parse_event_log(HEADER + "2020-03-04T10:00:00,U001,3,StArT\n")
    assert log.event(0).action is Action.START


# Hand-count oracle: rows 3 and 7 carry action "begin" -> 8 events, 2 errors
# at physical lines 4 and 8 (header is line 1).
TEN_ROWS = HEADER + "".join(
    f"2020-03-04T10:{i:02d}:00,U{i},1,{action}\n"
    for i, action in enumerate(
        ["start", "complete", "begin", "start", "scrap", "delay", "begin",
         "complete", "start", "start"]
    )
)


def test_parse_bad_actions_reported():
    log, report = parse_event_log(TEN_ROWS)
    assert len(log) == 8
    assert report.n_rejected == 2
    assert [e.line for e in report.record_errors] == [4, 8]
    assert all("unknown action" in e.reason for e in report.record_errors)


def test_parse_conservation():
    # |accepted| + |rejected| = number of non-header input lines
    body = (
        "2020-03-04T10:00:00,U1,1,start\n"
        "not-a-timestamp,U2,1,start\n"
        "2020-03-04T10:00:00,U3,99,start\n"
        "2020-03-04T10:00:00,U4,1,start,extra\n"
        "2020-03-04T10:00:00,,1,start\n"
        "2020-03-04T10:00:00,U5,x,start\n"
        "2020-03-04T10:05:00,U6,2,complete\n"
    )
    log, report = parse_event_log(HEADER + body)
    assert len(log) + report.n_rejected == 7
    assert len(log) == 2


def test_parse_missing_header():
    with pytest.raises(LogFormatError):
        parse_event_log("2020-03-04T10:00:00,U001,3,start\n")


def test_parse_unreadable_source():
    with pytest.raises(LogFormatError):
        parse_event_log(b"\xff\xfe\x00bad")


def test_parse_crlf_and_bom():
    text = HEADER.replace("\n", "\r\n") + "2020-03-04T10:00:00,U1,1,start\r\n"
    log, report = parse_event_log(("﻿" + text).encode("utf-8"))
    assert len(log) == 1
    assert report.n_rejected == 0


def test_parse_file_and_stream(tmp_path):
    p = tmp_path / "log.csv"
    p.write_text(FIXTURE_20)
    log_a, _ = parse_event_log(str(p))
    log_b, _ = parse_event_log(io.BytesIO(FIXTURE_20.encode()))
    assert log_a == log_b
    assert len(log_a) == 20


def test_events_sorted_after_normalization():
    # shuffled input comes out ordered by (timestamp, unit_id)
    rows = (
        "2020-03-04T10:00:05,B,1,start\n"
        "2020-03-04T10:00:00,Z,1,start\n"
        "2020-03-04T10:00:05,A,1,start\n"
    )
    log, _ = parse_event_log(HEADER + rows)
    assert [e.unit_id for e in log] == ["Z", "A", "B"]


def test_round_trip():
    log, _ = parse_event_log(FIXTURE_20)
    text = log.to_csv_text()
    log2, report2 = parse_event_log(text)
    assert report2.n_rejected == 0
    assert log2 == log
    assert log2.to_csv_text() == text


def test_validate_duplicate():
    log, _ = parse_event_log(
        HEADER
        + "2020-03-04T10:00:00,U1,1,start\n"
        + "2020-03-04T10:00:00,U1,1,start\n"
    )
    report = validate_log(log)
    assert len(report.anomalies) == 1
    assert report.anomalies[0].kind == "duplicate"


def test_validate_complete_before_start():
    # hand-traced: complete at step 2 with no prior start at step 2
    log, _ = parse_event_log(
        HEADER
        + "2020-03-04T10:00:00,U1,1,start\n"
        + "2020-03-04T10:05:00,U1,1,complete\n"
        + "2020-03-04T10:10:00,U1,2,complete\n"
    )
    report = validate_log(log)
    assert len(report.anomalies) == 1
    anomaly = report.anomalies[0]
    assert anomaly.kind == "order"
    assert anomaly.step == 2
    assert anomaly.unit_id == "U1"


def test_validate_consistent_fixture():
    log, _ = parse_event_log(FIXTURE_20)
    assert validate_log(log).anomalies == []


def test_validate_does_not_mutate():
    log, _ = parse_event_log(FIXTURE_20)
    before = log.to_csv_text()
    validate_log(log)
    assert log.to_csv_text() == before


def test_filter_identity():
    log, _ = parse_event_log(FIXTURE_20)
    same = filter_log(log)
    assert same == log


def test_filter_step():
    log, _ = parse_event_log(FIXTURE_20)
    only3 = filter_log(log, steps={3})
    assert len(only3) == 3
    assert set(only3.step.tolist()) == {3}


def test_filter_weekday_calendar_oracle():
    # 2020-03-02 is a Monday, 2020-03-04 a Wednesday, 2020-03-11 a Wednesday
    rows = [
        ("2020-03-02T10:00:00", "U1", 1, "start"),
        ("2020-03-04T10:00:00", "U2", 1, "start"),
        ("2020-03-11T10:00:00", "U3", 1, "start"),
        ("2020-03-06T10:00:00", "U4", 1, "start"),
    ]
    log = build_log(rows)
    wednesdays = filter_log(log, weekdays={2})
    assert sorted(e.unit_id for e in wednesdays) == ["U2", "U3"]
    assert all(e.timestamp.weekday() == 2 for e in wednesdays)


def test_filter_date_range():
    log, _ = parse_event_log(FIXTURE_20)
    inside = filter_log(log, date_range=(date(2020, 3, 4), date(2020, 3, 4)))
    assert inside == log
    outside = filter_log(log, date_range=(date(2020, 3, 5), None))
    assert len(outside) == 0


@st.composite
def small_logs(draw):
    n = draw(st.integers(0, 30))
    rows = []
    for _ in range(n):
        t = draw(st.integers(0, 5 * 86400))
        unit = draw(st.sampled_from(["U1", "U2", "U3"]))
        step = draw(st.integers(1, 4))
        action = draw(st.sampled_from(["start", "complete", "scrap", "delay"]))
        day = date_of(t // 86400)
        hh, rem = divmod(t % 86400, 3600)
        mm, ss = divmod(rem, 60)
        rows.append((f"{day.isoformat()}T{hh:02d}:{mm:02d}:{ss:02d}", unit, step, action))
    return build_log(rows)


@settings(max_examples=40, deadline=None)
@given(
    log=small_logs(),
    steps_a=st.none() | st.sets(st.integers(1, 4)),
    steps_b=st.none() | st.sets(st.integers(1, 4)),
    wd_a=st.none() | st.sets(st.integers(0, 6)),
    wd_b=st.none() | st.sets(st.integers(0, 6)),
)
def test_filter_composition(log, steps_a, steps_b, wd_a, wd_b):
    # filter(filter(L, A), B) == filter(L, A n B)
    two_pass = filter_log(filter_log(log, steps=steps_a, weekdays=wd_a),
                          steps=steps_b, weekdays=wd_b)

    def meet(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return a & b

    one_pass = filter_log(log, steps=meet(steps_a, steps_b),
                          weekdays=meet(wd_a, wd_b))
    assert two_pass == one_pass


def test_day_number_round_trip():
    d = date(2020, 3, 4)
    assert date_of(day_number(d)) == d
    assert day_number(date(1970, 1, 1)) == 0


def test_local_index_timezone():
    # 01:00 UTC is 02:00 in Dublin summer time (IST, UTC+1)
    log = build_log([("2020-06-15T01:00:00", "U1", 1, "start")])
    utc_idx = log.local_index("UTC")
    dub_idx = log.local_index("Europe/Dublin")
    assert utc_idx.second[0] == 3600
    assert dub_idx.second[0] == 7200
    assert dub_idx.bin[0] == 4
