"""Attacker inputs: the cornering log and the trip attributes."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from enum import Enum
from typing import Sequence


class InputError(ValueError):
    pass


class Direction(str, Enum):
    LEFT = "L"
    RIGHT = "R"


_DIRECTION_TOKENS = {
    "l": Direction.LEFT,
    "left": Direction.LEFT,
    "r": Direction.RIGHT,
    "right": Direction.RIGHT,
}


@dataclass(frozen=True)
class TurnEvent:
    direction: Direction
    t_offset_s: int

    def __post_init__(self):
        if self.t_offset_s < 0:
            raise InputError(f"turn time must be >= 0, got {self.t_offset_s}")


@dataclass(frozen=True)
class CorneringLog:
    events: tuple[TurnEvent, ...]

    def __post_init__(self):
        events = tuple(self.events)
        if not events:
            raise InputError("cornering log needs at least one event")
        for i in range(1, len(events)):
            if events[i].t_offset_s <= events[i - 1].t_offset_s:
                raise InputError(f"row {i + 1}: turn times must be strictly increasing")
        object.__setattr__(self, "events", events)

    def __len__(self) -> int:
        return len(self.events)

    def __getitem__(self, i: int) -> TurnEvent:
        return self.events[i]

    def __iter__(self):
        return iter(self.events)


@dataclass(frozen=True)
class TripAttributes:
    start_vertex: int
    s_average_kmh: float
    total_time_s: float

    def __post_init__(self):
        if not self.s_average_kmh > 0:
            raise InputError(f"average speed must be positive, got {self.s_average_kmh}")
        if not self.total_time_s > 0:
            raise InputError(f"total time must be positive, got {self.total_time_s}")

    def check_against(self, mc: CorneringLog) -> None:
        if self.total_time_s < mc[-1].t_offset_s:
            raise InputError("total trip time is shorter than the last turn offset")


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as f:
            return f.read()
    if isinstance(source, io.IOBase) or hasattr(source, "read"):
        return source.read()
    raise TypeError(f"cannot read from {type(source).__name__}")


def parse_direction(token: str) -> Direction:
    try:
        return _DIRECTION_TOKENS[token.strip().lower()]
    except KeyError:
        raise InputError(f"unknown direction token {token!r}") from None


def _parse_seconds(text: str, row: int) -> int:
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"row {row}: bad time {text!r}") from None
    if not value.is_integer():
        raise InputError(f"row {row}: times are whole seconds, got {text!r}")
    return int(value)


def parse_cornering_log(source) -> CorneringLog:
    """Parse ``direction,t_offset_s`` rows (no header).

    ``source`` is a path or a readable text stream.
    """
    events: list[TurnEvent] = []
    rows = csv.reader(io.StringIO(_read_text(source)))
    for row_no, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InputError(f"row {row_no}: expected 'direction,t_offset_s'")
        direction = parse_direction(row[0])
        t = _parse_seconds(row[1].strip(), row_no)
        if t < 0:
            raise InputError(f"row {row_no}: negative time {t}")
        if events and t <= events[-1].t_offset_s:
            raise InputError(
                f"row {row_no}: time {t} is not after the previous event ({events[-1].t_offset_s})"
            )
        events.append(TurnEvent(direction, t))
    if not events:
        raise InputError("cornering log is empty")
    return CorneringLog(tuple(events))


def format_cornering_log(mc: CorneringLog | Sequence[TurnEvent]) -> str:
    return "".join(f"{e.direction.value},{e.t_offset_s}\n" for e in mc)


def parse_trip_attributes(source) -> TripAttributes:
    lines = [ln for ln in _read_text(source).splitlines() if ln.strip()]
    if len(lines) != 1:
        raise InputError("trip file must hold exactly one row")
    fields = [c.strip() for c in lines[0].split(",")]
    if len(fields) != 3:
        raise InputError("trip row must be 'start_vertex,s_average_kmh,total_time_s'")
    try:
        start = int(fields[0])
        speed = float(fields[1])
        total = float(fields[2])
    except ValueError as exc:
        raise InputError(f"trip row: {exc}") from None
    return TripAttributes(start, speed, total)


def format_trip_attributes(trip: TripAttributes) -> str:
    total = trip.total_time_s
    total_s = str(int(total)) if float(total).is_integer() else repr(float(total))
    return f"{trip.start_vertex},{trip.s_average_kmh!r},{total_s}\n"
