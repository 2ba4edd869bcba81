"""Service configuration: file-based with environment-variable overrides.

Every field can be set in a YAML/JSON config file and overridden through a
``MESVIEW_*`` environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import yaml

from .control import GaugeThresholds
from .timeseries import ShiftSchedule

_ENV_PREFIX = "MESVIEW_"


@dataclass(frozen=True)
class AppConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    timezone: str = "UTC"
    bin_minutes: int = 30
    ma_order: int = 3
    lower_pct: float = 2.5
    upper_pct: float = 97.5
    thresholds: GaugeThresholds = field(default_factory=GaugeThresholds)
    shifts: ShiftSchedule = field(default_factory=ShiftSchedule.default)
    data_dir: str = "./data"
    n_steps: int = 7
    static_dir: str | None = None

    def validate(self) -> None:
        if self.ma_order < 1 or self.ma_order % 2 == 0:
            raise ValueError("ma_order must be odd and >= 1")
        if not 0 < self.lower_pct < self.upper_pct < 100:
            raise ValueError("percentile levels must satisfy 0 < lower < upper < 100")
        if self.bin_minutes < 1 or 1440 % self.bin_minutes:
            raise ValueError("bin_minutes must divide 24 hours")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        self.shifts.check_bin_alignment(self.bin_minutes)

    @property
    def n_bins(self) -> int:
        return 1440 // self.bin_minutes

    @classmethod
    def from_dict(cls, data: dict) -> "AppConfig":
        data = dict(data)
        if "shifts" in data:
            data["shifts"] = ShiftSchedule.from_spec(data["shifts"])
        if "thresholds" in data:
            data["thresholds"] = _parse_thresholds(data["thresholds"])
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "AppConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(yaml.safe_load(fh) or {})

    def with_env_overrides(self, environ=None) -> "AppConfig":
        env = os.environ if environ is None else environ
        updates: dict = {}

        def pick(name, conv=str):
            raw = env.get(_ENV_PREFIX + name)
            if raw is not None:
                return conv(raw)
            return None

        for key, name, conv in (
            ("host", "HOST", str),
            ("port", "PORT", int),
            ("timezone", "TIMEZONE", str),
            ("bin_minutes", "BIN_MINUTES", int),
            ("ma_order", "MA_ORDER", int),
            ("lower_pct", "PCT_LOWER", float),
            ("upper_pct", "PCT_UPPER", float),
            ("data_dir", "DATA_DIR", str),
            ("n_steps", "N_STEPS", int),
            ("static_dir", "STATIC_DIR", str),
        ):
            value = pick(name, conv)
            if value is not None:
                updates[key] = value
        shifts = pick("SHIFTS")
        if shifts is not None:
            updates["shifts"] = ShiftSchedule.from_spec(shifts)
        thresholds = pick("THRESHOLDS")
        if thresholds is not None:
            updates["thresholds"] = _parse_thresholds(thresholds)
        cfg = replace(self, **updates) if updates else self
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {
            "host": self.host,
            "port": self.port,
            "timezone": self.timezone,
            "bin_minutes": self.bin_minutes,
            "ma_order": self.ma_order,
            "lower_pct": self.lower_pct,
            "upper_pct": self.upper_pct,
            "thresholds": {
                "count_red": self.thresholds.count_red,
                "count_orange": self.thresholds.count_orange,
                "inverse_orange_lo": self.thresholds.inverse_orange_lo,
                "inverse_red_lo": self.thresholds.inverse_red_lo,
            },
            "shifts": [
                {
                    "name": s.name,
                    "start": f"{s.start_minute // 60:02d}:{s.start_minute % 60:02d}",
                    "end": f"{s.end_minute // 60:02d}:{s.end_minute % 60:02d}",
                }
                for s in self.shifts.shifts
            ],
            "data_dir": self.data_dir,
            "n_steps": self.n_steps,
        }


def _parse_thresholds(spec) -> GaugeThresholds:
    if isinstance(spec, GaugeThresholds):
        return spec
    if isinstance(spec, str):
        parts = [float(x) for x in spec.split(",")]
        if len(parts) != 4:
            raise ValueError("thresholds string must be 'red,orange,inv_orange,inv_red'")
        return GaugeThresholds(*parts)
    return GaugeThresholds(
        count_red=float(spec.get("count_red", 20.0)),
        count_orange=float(spec.get("count_orange", 40.0)),
        inverse_orange_lo=float(spec.get("inverse_orange_lo", 60.0)),
        inverse_red_lo=float(spec.get("inverse_red_lo", 80.0)),
    )


def load_config(path=None, environ=None) -> AppConfig:
    """Config file (when given) merged with environment overrides."""
    base = AppConfig.from_file(path) if path else AppConfig()
    return base.with_env_overrides(environ)
