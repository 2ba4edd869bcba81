"""Shared fixtures and hand-traced oracles used across test modules."""

from datetime import datetime, timezone

from mesview import Action, EventLog

# ---------------------------------------------------------------------------
# 20-event fixture, hand-traced.
#
# Unit A re-enters step 4 while step 3 is open and only then completes
# step 3 (the classic revisit); unit B has a zero idle gap, a delay marker
# and an unfinished step; unit C is scrapped mid-process; unit D records two
# completes before its next start.
# ---------------------------------------------------------------------------

FIXTURE_20 = """\
timestamp,unit_id,step,action
2020-03-04T07:00:00,C,1,start
2020-03-04T07:04:00,C,1,complete
2020-03-04T07:06:00,C,2,start
2020-03-04T07:30:00,C,2,scrap
2020-03-04T08:00:00,B,1,start
2020-03-04T08:05:00,B,1,complete
2020-03-04T08:05:00,B,2,start
2020-03-04T08:20:00,B,2,delay
2020-03-04T08:45:00,B,2,complete
2020-03-04T09:00:00,A,3,start
2020-03-04T09:30:00,A,4,start
2020-03-04T09:30:00,B,3,start
2020-03-04T09:50:00,A,4,complete
2020-03-04T10:00:00,A,3,complete
2020-03-04T10:20:00,A,5,start
2020-03-04T10:50:00,A,5,complete
2020-03-04T11:00:00,D,1,start
2020-03-04T11:10:00,D,1,complete
2020-03-04T11:12:00,D,1,complete
2020-03-04T11:30:00,D,2,start
"""

# Hand-traced idle intervals per unit: (from_step, to_step, idle_seconds).
# Walk rule: the last Complete before a Start pairs with it; Scrap clears.
IDLE_ORACLE = {
    "A": [(3, 5, 1200)],  # complete step3 10:00 -> start step5 10:20
    "B": [(1, 2, 0), (2, 3, 2700)],  # 08:05->08:05 and 08:45->09:30
    "C": [(1, 2, 120)],  # 07:04->07:06; nothing after the scrap
    "D": [(1, 2, 1080)],  # last complete 11:12 -> start 11:30
}

# Hand-traced durations per unit: step -> (duration_seconds, complete_flag).
# First Start to last Complete; revisit excursions land inside the window.
DURATION_ORACLE = {
    "A": {3: (3600, True), 4: (1200, True), 5: (1800, True)},
    "B": {1: (300, True), 2: (2400, True), 3: (None, False)},
    "C": {1: (240, True), 2: (None, False)},
    "D": {1: (720, True), 2: (None, False)},
}


def ts(text: str) -> datetime:
    return datetime.fromisoformat(text).replace(tzinfo=timezone.utc)


def build_log(rows, n_steps: int = 7) -> EventLog:
    """EventLog from (iso_ts, unit, step, action_name) tuples."""
    return EventLog.from_events(
        (
            (ts(when), unit, step, getattr(Action, action.upper()))
            for when, unit, step, action in rows
        ),
        n_steps=n_steps,
    )
