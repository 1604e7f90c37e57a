"""Comparison statistics for a fixed-timetable vs rescheduled trace pair.

Exceedance events use contiguous-run semantics: a stretch of consecutive
ticks above the reporting threshold counts once, mirroring how discrete
"peaks" are read off a power chart.  Raw above-threshold tick counts are
also reported for transparency.

Regenerated energy is split per tick into the share soaked up by
authorized departures (min of the regenerated magnitude and the departure
demand) and the share dumped as waste heat; the two always sum to the
regenerated total.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, fields
from typing import Iterable, Optional, Protocol, Sequence


class MetricsError(ValueError):
    """Mismatched or malformed trace inputs."""


class TraceLike(Protocol):
    """What metrics needs from a trace (satisfied by SimTrace and parsed CSVs)."""

    policy: object
    tick_s: float
    duration_s: float
    p_threshold_kw: float
    scenario_fingerprint: str

    @property
    def totals_kw(self) -> tuple[float, ...]: ...


def count_exceedances(totals_kw: Sequence[float], reporting_threshold_kw: float) -> int:
    """Number of maximal contiguous runs of ticks strictly above the threshold."""
    if len(totals_kw) == 0:
        raise MetricsError("empty trace")
    events = 0
    above = False
    for value in totals_kw:
        if value > reporting_threshold_kw:
            if not above:
                events += 1
                above = True
        else:
            above = False
    return events


def exceedance_tick_count(totals_kw: Sequence[float], reporting_threshold_kw: float) -> int:
    return sum(1 for v in totals_kw if v > reporting_threshold_kw)


def regen_accounting(rows: Iterable, tick_s: float) -> tuple[float, float]:
    """(utilized_kwh, wasted_kwh) accumulated over the trace.

    Rows must expose regen_available_kw and departure_demand_kw.
    """
    utilized = 0.0
    wasted = 0.0
    factor = tick_s / 3600.0
    for row in rows:
        regen = row.regen_available_kw
        demand = row.departure_demand_kw
        utilized += min(regen, demand) * factor
        wasted += max(0.0, regen - demand) * factor
    return utilized, wasted


@dataclass(frozen=True)
class PolicyStats:
    """Single-policy summary at one reporting threshold."""

    policy: str
    exceedance_count: int
    exceedance_tick_count: int
    max_total_power_kw: float
    mean_power_kw: float
    regen_utilized_kwh: float
    regen_wasted_kwh: float
    travel_time_mean_s: float
    travel_time_std_s: float
    travel_time_quartiles_s: tuple[float, float, float]
    completed_train_count: int


@dataclass(frozen=True)
class ComparisonReport:
    """Cross-policy report; the per-policy halves plus the deltas."""

    reporting_threshold_kw: float
    fixed: PolicyStats
    pres: PolicyStats
    exceedance_reduction_pct: Optional[float]
    extra_delay_mean_s: float
    extra_delay_pct: float


def policy_stats(trace, reporting_threshold_kw: float) -> PolicyStats:
    totals = trace.totals_kw
    travel = [t.travel_s for t in trace.trains if t.travel_s is not None]
    if not travel:
        raise MetricsError("no completed trains: cannot compute travel statistics")
    utilized, wasted = regen_accounting(trace.rows, trace.tick_s)
    if len(travel) >= 2:
        quartiles = tuple(statistics.quantiles(travel, n=4, method="inclusive"))
        std = statistics.pstdev(travel)
    else:
        quartiles = (travel[0], travel[0], travel[0])
        std = 0.0
    return PolicyStats(
        policy=str(getattr(trace.policy, "value", trace.policy)),
        exceedance_count=count_exceedances(totals, reporting_threshold_kw),
        exceedance_tick_count=exceedance_tick_count(totals, reporting_threshold_kw),
        max_total_power_kw=max(totals),
        mean_power_kw=sum(totals) / len(totals),
        regen_utilized_kwh=utilized,
        regen_wasted_kwh=wasted,
        travel_time_mean_s=statistics.fmean(travel),
        travel_time_std_s=std,
        travel_time_quartiles_s=quartiles,
        completed_train_count=len(travel),
    )


def compare(fixed, pres, reporting_threshold_kw: Optional[float] = None) -> ComparisonReport:
    """Build the full comparison for a trace pair from the same scenario."""
    if str(getattr(fixed.policy, "value", fixed.policy)) != "fixed":
        raise MetricsError("first trace must come from the fixed-timetable policy")
    if str(getattr(pres.policy, "value", pres.policy)) != "pres":
        raise MetricsError("second trace must come from the rescheduling policy")
    if fixed.scenario_fingerprint != pres.scenario_fingerprint:
        raise MetricsError("traces come from different scenarios")
    if fixed.tick_s != pres.tick_s or fixed.duration_s != pres.duration_s:
        raise MetricsError("traces disagree on tick or duration")
    threshold = reporting_threshold_kw if reporting_threshold_kw is not None else fixed.p_threshold_kw
    fixed_stats = policy_stats(fixed, threshold)
    pres_stats = policy_stats(pres, threshold)
    if fixed_stats.exceedance_count > 0:
        reduction = (
            100.0
            * (fixed_stats.exceedance_count - pres_stats.exceedance_count)
            / fixed_stats.exceedance_count
        )
    else:
        reduction = None
    extra_mean = pres_stats.travel_time_mean_s - fixed_stats.travel_time_mean_s
    return ComparisonReport(
        reporting_threshold_kw=threshold,
        fixed=fixed_stats,
        pres=pres_stats,
        exceedance_reduction_pct=reduction,
        extra_delay_mean_s=extra_mean,
        extra_delay_pct=100.0 * extra_mean / fixed_stats.travel_time_mean_s,
    )


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def render_policy_stats(stats: PolicyStats) -> str:
    lines = [f"[{stats.policy}]"]
    for f in fields(PolicyStats):
        if f.name == "policy":
            continue
        lines.append(f"{f.name}: {_fmt(getattr(stats, f.name))}")
    return "\n".join(lines)


def render_report(report: ComparisonReport) -> str:
    """Structured text document: per-policy sections plus the comparison."""
    lines = [
        "[report]",
        f"reporting_threshold_kW: {_fmt(report.reporting_threshold_kw)}",
        "",
        render_policy_stats(report.fixed),
        "",
        render_policy_stats(report.pres),
        "",
        "[comparison]",
        f"exceedance_reduction_pct: {_fmt(report.exceedance_reduction_pct)}",
        f"extra_delay_mean_s: {_fmt(report.extra_delay_mean_s)}",
        f"extra_delay_pct: {_fmt(report.extra_delay_pct)}",
    ]
    return "\n".join(lines) + "\n"


def report_csv(report: ComparisonReport) -> str:
    """Flat single-row CSV rendering of the full report."""
    headers: list[str] = ["reporting_threshold_kW"]
    values: list[str] = [_fmt(report.reporting_threshold_kw)]
    for side in (report.fixed, report.pres):
        prefix = side.policy
        for f in fields(PolicyStats):
            if f.name == "policy":
                continue
            value = getattr(side, f.name)
            if f.name == "travel_time_quartiles_s":
                for label, q in zip(("q1", "median", "q3"), value):
                    headers.append(f"{prefix}_travel_time_{label}_s")
                    values.append(_fmt(q))
            else:
                headers.append(f"{prefix}_{f.name}")
                values.append(_fmt(value))
    for name in ("exceedance_reduction_pct", "extra_delay_mean_s", "extra_delay_pct"):
        headers.append(name)
        values.append(_fmt(getattr(report, name)))
    return ",".join(headers) + "\n" + ",".join(values) + "\n"
