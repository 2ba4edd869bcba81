"""Process-log analytics for MES data: unit metrics, template days, gauges."""

from .events import (
    Action,
    EventLog,
    ProcessEvent,
    ValidationReport,
    filter_log,
    parse_event_log,
    validate_log,
)
from .metrics import (
    ActionBreakdown,
    IdleInterval,
    StepDuration,
    SummaryStats,
    UnitTrace,
    action_breakdown,
    compute_unit_metrics,
    idle_times,
    rescale,
    step_duration,
    summarize,
    unit_traces,
)
from .timeseries import (
    BinSeries,
    Comparison,
    Quantity,
    Shift,
    ShiftSchedule,
    TemplateDay,
    bin_series,
    moving_average,
    shift_of,
    template_day,
)
from .control import (
    DailyKpis,
    ExceedanceReport,
    GaugeColor,
    GaugeState,
    GaugeThresholds,
    compare_today,
    daily_kpis,
    gauge_color,
    homepage_state,
)
from .synthgen import GeneratorConfig, generate_log, preset_paperlike

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionBreakdown",
    "BinSeries",
    "Comparison",
    "DailyKpis",
    "EventLog",
    "ExceedanceReport",
    "GaugeColor",
    "GaugeState",
    "GaugeThresholds",
    "GeneratorConfig",
    "IdleInterval",
    "ProcessEvent",
    "Quantity",
    "Shift",
    "ShiftSchedule",
    "StepDuration",
    "SummaryStats",
    "TemplateDay",
    "UnitTrace",
    "ValidationReport",
    "action_breakdown",
    "bin_series",
    "compare_today",
    "compute_unit_metrics",
    "daily_kpis",
    "filter_log",
    "gauge_color",
    "generate_log",
    "homepage_state",
    "idle_times",
    "moving_average",
    "parse_event_log",
    "preset_paperlike",
    "rescale",
    "shift_of",
    "step_duration",
    "summarize",
    "template_day",
    "unit_traces",
    "validate_log",
]
