"""UTC calendar and duration helpers.

All timestamps in this package are integer Unix seconds, UTC. Calendar
days start at UTC midnight; durations are whole seconds, one day is
exactly 86,400 seconds (no daylight-saving handling).
"""
from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass

MINUTE = 60
HOUR = 3_600
DAY = 86_400
WEEK = 7 * DAY

_EPOCH = dt.date(1970, 1, 1)
_DURATION_RE = re.compile(r"^\s*(\d+)\s*([smhdw]?)\s*$", re.IGNORECASE)
_UNIT_SECONDS = {"": 1, "s": 1, "m": MINUTE, "h": HOUR, "d": DAY, "w": WEEK}


def ts_from_date(day: dt.date) -> int:
    """Unix timestamp of the UTC midnight starting ``day``."""
    return (day - _EPOCH).days * DAY


def date_from_ts(ts: int) -> dt.date:
    """UTC calendar date containing ``ts``."""
    return _EPOCH + dt.timedelta(days=ts // DAY)


def iso_from_ts(ts: int) -> str:
    """ISO-8601 instant at second resolution, Z suffix."""
    return dt.datetime.fromtimestamp(ts, dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip())


def parse_duration(text: str) -> int:
    """Parse a duration like '3600', '45s', '15m', '2h', '1d' or '1w' into seconds."""
    match = _DURATION_RE.match(text)
    if not match or int(match.group(1)) == 0:
        raise ValueError(f"invalid duration: {text!r}")
    return int(match.group(1)) * _UNIT_SECONDS[match.group(2).lower()]


@dataclass(frozen=True)
class TimeWindow:
    """Half-open interval [start, end) in Unix seconds.

    Events stamped exactly at ``start`` belong to the window, events at
    ``end`` do not, so consecutive windows never double count.
    """

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError(f"window start must precede end: [{self.start}, {self.end})")

    def contains(self, ts: int) -> bool:
        return self.start <= ts < self.end

    @property
    def duration(self) -> int:
        return self.end - self.start

    @classmethod
    def from_dates(cls, first_day: dt.date, end_day: dt.date) -> "TimeWindow":
        """Window covering [first_day 00:00, end_day 00:00) UTC."""
        return cls(ts_from_date(first_day), ts_from_date(end_day))

    @classmethod
    def day(cls, day: dt.date) -> "TimeWindow":
        start = ts_from_date(day)
        return cls(start, start + DAY)
