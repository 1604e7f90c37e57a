"""CSV serialization of simulation traces.

Per-tick trace columns:

    time_s,total_power_kW,waiting_count,authorized_count,d_plus_kW,d_minus_kW
    [,train_<id>_kW...],regen_available_kW,departure_demand_kW

The optional per-train block carries each vehicle's pre-decision draw.
The two trailing columns record the regenerated magnitude and authorized
departure demand so that a parsed trace reproduces the comparison report
exactly (the regenerative split is not derivable from the other columns).

Per-train summary columns:

    train_id,launch_s,complete_s,travel_s,delay_vs_timetable_s

Incomplete journeys leave the last three fields empty.  Numbers are
written at full precision (repr), no locale.  Files are written to a
temporary sibling and renamed into place so a failed run never leaves a
partial file behind.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from typing import Optional

from .engine import SimTrace


class TraceFormatError(ValueError):
    """Malformed trace CSV."""


def _num(value: float) -> str:
    return repr(value + 0.0)  # +0.0 normalizes -0.0


def atomic_write(path: str, content: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".railpeak-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_tick_csv(trace: SimTrace, per_train: bool = False) -> str:
    train_ids = [t.train_id for t in trace.trains]
    header = ["time_s", "total_power_kW", "waiting_count", "authorized_count", "d_plus_kW", "d_minus_kW"]
    if per_train:
        header.extend(f"train_{tid}_kW" for tid in train_ids)
    header.extend(("regen_available_kW", "departure_demand_kW"))
    lines = [",".join(header)]
    for row in trace.rows:
        cells = [
            _num(row.time_s),
            _num(row.total_power_kw),
            str(row.waiting_count),
            str(row.authorized_count),
            _num(row.d_plus_kw),
            _num(row.d_minus_kw),
        ]
        if per_train:
            cells.extend(_num(row.train_powers_kw.get(tid, 0.0)) for tid in train_ids)
        cells.append(_num(row.regen_available_kw))
        cells.append(_num(row.departure_demand_kw))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def render_train_csv(trace: SimTrace) -> str:
    lines = ["train_id,launch_s,complete_s,travel_s,delay_vs_timetable_s"]
    for t in trace.trains:
        if t.completion_s is None:
            lines.append(f"{t.train_id},{_num(t.launch_s)},,,")
        else:
            lines.append(
                f"{t.train_id},{_num(t.launch_s)},{_num(t.completion_s)},"
                f"{_num(t.travel_s)},{_num(t.delay_vs_timetable_s)}"
            )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ParsedRow:
    time_s: float
    total_power_kw: float
    waiting_count: int
    authorized_count: int
    d_plus_kw: float
    d_minus_kw: float
    regen_available_kw: float
    departure_demand_kw: float


@dataclass(frozen=True)
class ParsedTrain:
    train_id: int
    launch_s: float
    completion_s: Optional[float]
    travel_s: Optional[float]
    delay_vs_timetable_s: Optional[float]


@dataclass(frozen=True)
class ParsedTrace:
    """Trace reconstructed from CSV files; satisfies the metrics interface."""

    policy: str
    tick_s: float
    duration_s: float
    p_threshold_kw: float
    scenario_fingerprint: str
    rows: tuple[ParsedRow, ...]
    trains: tuple[ParsedTrain, ...]

    @property
    def totals_kw(self) -> tuple[float, ...]:
        return tuple(r.total_power_kw for r in self.rows)


def parse_tick_csv(
    text: str,
    policy: str,
    p_threshold_kw: float,
    train_text: str,
    scenario_fingerprint: str = "",
) -> ParsedTrace:
    """Rebuild a metrics-compatible trace from the two CSV documents."""
    lines = [line for line in text.splitlines() if line]
    if len(lines) < 2:
        raise TraceFormatError("tick CSV must contain a header and at least one row")
    header = lines[0].split(",")
    try:
        col = {name: i for i, name in enumerate(header)}
        required = (
            "time_s",
            "total_power_kW",
            "waiting_count",
            "authorized_count",
            "d_plus_kW",
            "d_minus_kW",
            "regen_available_kW",
            "departure_demand_kW",
        )
        for name in required:
            if name not in col:
                raise KeyError(name)
    except KeyError as missing:
        raise TraceFormatError(f"tick CSV missing column {missing}") from None

    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        rows.append(
            ParsedRow(
                time_s=float(cells[col["time_s"]]),
                total_power_kw=float(cells[col["total_power_kW"]]),
                waiting_count=int(cells[col["waiting_count"]]),
                authorized_count=int(cells[col["authorized_count"]]),
                d_plus_kw=float(cells[col["d_plus_kW"]]),
                d_minus_kw=float(cells[col["d_minus_kW"]]),
                regen_available_kw=float(cells[col["regen_available_kW"]]),
                departure_demand_kw=float(cells[col["departure_demand_kW"]]),
            )
        )
    if len(rows) >= 2:
        tick = rows[1].time_s - rows[0].time_s
    else:
        tick = rows[0].time_s or 1.0
    trains = _parse_train_csv(train_text)
    return ParsedTrace(
        policy=policy,
        tick_s=tick,
        duration_s=rows[-1].time_s - rows[0].time_s,
        p_threshold_kw=p_threshold_kw,
        scenario_fingerprint=scenario_fingerprint,
        rows=tuple(rows),
        trains=trains,
    )


def _parse_train_csv(text: str) -> tuple[ParsedTrain, ...]:
    lines = [line for line in text.splitlines() if line]
    if not lines or lines[0] != "train_id,launch_s,complete_s,travel_s,delay_vs_timetable_s":
        raise TraceFormatError("train CSV header mismatch")
    trains = []
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != 5:
            raise TraceFormatError(f"train CSV row has {len(cells)} fields: {line!r}")
        complete = float(cells[2]) if cells[2] else None
        trains.append(
            ParsedTrain(
                train_id=int(cells[0]),
                launch_s=float(cells[1]),
                completion_s=complete,
                travel_s=float(cells[3]) if cells[3] else None,
                delay_vs_timetable_s=float(cells[4]) if cells[4] else None,
            )
        )
    return tuple(trains)
