"""Temporal granularity: calendar days bucketed into year/month/biweek/week/day.

Weeks follow ISO-8601 numbering and nest directly under years; a biweek is
a pair of consecutive ISO weeks. Intervals carry an integer ordinal so that
inter-arrival gaps are simple differences, and a stable human-readable label.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

from .errors import ConfigError

TEMPORAL_SCALES = ("year", "month", "biweek", "week", "day")

# How fine a date precision must be to support a given scale.
_SCALE_FINENESS = {"year": 0, "month": 1, "biweek": 2, "week": 2, "day": 3}
_PRECISION_FINENESS = {"year": 0, "month": 1, "day": 3}

_WEEK_EPOCH = dt.date(1970, 1, 5)  # a Monday


def check_scale(scale: str) -> str:
    if scale not in TEMPORAL_SCALES:
        raise ConfigError(f"unknown temporal scale {scale!r}")
    return scale


@dataclass(frozen=True, order=True)
class DateValue:
    """A calendar day with a precision of day, month or year.

    Coarse dates store the first day of their interval; ``precision``
    records how much of it is meaningful.
    """

    day: dt.date
    precision: str = "day"

    def __post_init__(self):
        if self.precision not in _PRECISION_FINENESS:
            raise ConfigError(f"unknown date precision {self.precision!r}")

    def supports(self, scale: str) -> bool:
        """Whether this date is precise enough to be bucketed at ``scale``."""
        return _PRECISION_FINENESS[self.precision] >= _SCALE_FINENESS[check_scale(scale)]

    def ordinal(self, scale: str) -> int:
        return interval_ordinal(self.day, scale)

    def label(self, scale: str) -> str:
        return interval_label(self.day, scale)

    def isoformat(self) -> str:
        if self.precision == "year":
            return f"{self.day.year:04d}"
        if self.precision == "month":
            return f"{self.day.year:04d}-{self.day.month:02d}"
        return self.day.isoformat()


def _week_index(day: dt.date) -> int:
    monday = day - dt.timedelta(days=day.weekday())
    return (monday - _WEEK_EPOCH).days // 7


def interval_ordinal(day: dt.date, scale: str) -> int:
    """Integer position of the interval containing ``day``; consecutive
    intervals at the same scale differ by exactly one."""
    check_scale(scale)
    if scale == "year":
        return day.year
    if scale == "month":
        return day.year * 12 + day.month - 1
    if scale == "week":
        return _week_index(day)
    if scale == "biweek":
        return _week_index(day) // 2
    return day.toordinal()


def interval_label(day: dt.date, scale: str) -> str:
    check_scale(scale)
    if scale == "year":
        return f"{day.year:04d}"
    if scale == "month":
        return f"{day.year:04d}-{day.month:02d}"
    iso = day.isocalendar()
    if scale == "week":
        return f"{iso[0]:04d}-W{iso[1]:02d}"
    if scale == "biweek":
        return f"{iso[0]:04d}-B{(iso[1] + 1) // 2:02d}"
    return day.isoformat()


def season_key(day: dt.date, scale: str) -> str:
    """Position of the interval within its year, used to pool time slices
    across years (e.g. all Januaries)."""
    check_scale(scale)
    if scale == "year":
        return "year"
    if scale == "month":
        return f"M{day.month:02d}"
    iso = day.isocalendar()
    if scale == "week":
        return f"W{iso[1]:02d}"
    if scale == "biweek":
        return f"B{(iso[1] + 1) // 2:02d}"
    return f"D{day.timetuple().tm_yday:03d}"
