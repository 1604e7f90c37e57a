"""Deterministic discrete-event simulation of a bi-directional metro corridor.

Topology: trains launch from the first station on a fixed dispatch
interval, run the up direction through all stations, leave the substation
range for a turnaround excursion beyond the far terminal, come back and
run the down direction to the origin, where the journey ends.  Every
station stop includes a minimum passenger dwell.  All power drawn inside
the substation range follows per-segment profiles (either the configured
template scaled to each segment's travel time, or profiles generated by
the physics model).

Each tick the engine computes every running train's draw, assembles the
waiting set of trains whose dwell is complete and whose scheduled slot
has arrived, and asks the active policy for departure authorizations:
the fixed timetable departs every waiting train whose safety headways
permit, while the rescheduling policy ("pres") solves the departure
optimization from :mod:`railpeak.scheduling`.

The run is reproducible: the only random element is the per-train
turnaround-excursion duration (the excursion length is an average, not a
constant), drawn from a seeded generator before the run starts, so two
runs of the same scenario are identical and both policies see the same
excursion durations.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field, replace
from typing import Optional

from .physics import (
    ForceSpeedEnvelope,
    PowerProfile,
    TrackSegment,
    TrainSpec,
    generate_segment_profile,
)
from .scheduling import (
    SafetyInfeasibilityError,
    ScheduleInstance,
    SchedulerParams,
    WaitingTrain,
    decide,
    split_threshold_deviation,
    total_power,
)

HEADWAY_CHECK_TOL_S = 1e-6


class ScenarioError(ValueError):
    """Invalid scenario configuration."""


class ScenarioDesignError(RuntimeError):
    """A follower closed in on a held train: the scenario violates its own safety premise."""


class Policy(str, enum.Enum):
    FIXED = "fixed"
    PRES = "pres"


class ProfileMode(str, enum.Enum):
    FIXED_PROFILE = "fixed_profile"
    PHYSICS = "physics"


DEFAULT_PROFILE_KW = (
    10_000.0,
    8_000.0,
    8_000.0,
    2_000.0,
    2_000.0,
    3_000.0,
    2_000.0,
    2_000.0,
    2_000.0,
    0.0,
    -6_000.0,
    -8_000.0,
    -4_000.0,
)


def default_train_spec() -> TrainSpec:
    return TrainSpec(
        mass_tonnes=300.0,
        axle_count=16,
        car_count=4,
        frontal_area_m2=10.0,
        tunnel_factor=2,
        traction_envelope=ForceSpeedEnvelope.from_force_and_corner(200_000.0, 36.0),
        braking_envelope=ForceSpeedEnvelope.from_force_and_corner(150_000.0, 36.0),
        max_speed_kmh=80.0,
    )


def default_segments(times_s: tuple[float, ...]) -> tuple[TrackSegment, ...]:
    # Lengths sized so the default rolling stock covers each segment
    # within its nominal time (then waits for the timetable slot).
    lengths = {180.0: 2800.0, 150.0: 2200.0, 120.0: 1600.0}
    return tuple(
        TrackSegment(length_m=lengths.get(t, t * 15.0), nominal_travel_time_s=t) for t in times_s
    )


@dataclass(frozen=True)
class Scenario:
    """Full corridor configuration; defaults give the standard case study."""

    stations: tuple[str, ...] = ("A", "B", "C", "D")
    up_segment_times_s: tuple[float, ...] = (180.0, 120.0, 150.0)
    down_segment_times_s: tuple[float, ...] = (150.0, 120.0, 180.0)
    out_of_range_time_s: float = 1080.0
    out_of_range_jitter_s: float = 30.0
    dispatch_headway_s: float = 360.0
    min_headway_s: float = 180.0
    dwell_time_s: float = 60.0
    tick_s: float = 10.0
    sim_duration_s: float = 20_000.0
    per_train_profile_kw: tuple[float, ...] = DEFAULT_PROFILE_KW
    profile_mode: ProfileMode = ProfileMode.FIXED_PROFILE
    scheduler: SchedulerParams = field(default_factory=SchedulerParams)
    policy: Policy = Policy.FIXED
    rng_seed: int = 3
    train: Optional[TrainSpec] = None
    up_segments: Optional[tuple[TrackSegment, ...]] = None
    down_segments: Optional[tuple[TrackSegment, ...]] = None

    def __post_init__(self):
        n_seg = len(self.stations) - 1
        if n_seg < 1:
            raise ScenarioError("stations: at least two stations required")
        if len(self.up_segment_times_s) != n_seg or len(self.down_segment_times_s) != n_seg:
            raise ScenarioError(
                f"segment time lists must have {n_seg} entries for {len(self.stations)} stations"
            )
        if self.tick_s <= 0:
            raise ScenarioError("tick_s: must be > 0")
        for name, value in (
            ("dispatch_headway_s", self.dispatch_headway_s),
            ("min_headway_s", self.min_headway_s),
            ("dwell_time_s", self.dwell_time_s),
            ("out_of_range_time_s", self.out_of_range_time_s),
            ("sim_duration_s", self.sim_duration_s),
        ):
            if value <= 0:
                raise ScenarioError(f"{name}: must be > 0")
        if self.dispatch_headway_s < self.min_headway_s:
            raise ScenarioError("dispatch_headway_s: must be >= min_headway_s")
        if self.dwell_time_s < self.tick_s:
            raise ScenarioError("dwell_time_s: must be >= tick_s")
        if self.out_of_range_jitter_s < 0:
            raise ScenarioError("out_of_range_jitter_s: must be >= 0")
        if self.out_of_range_jitter_s >= self.out_of_range_time_s:
            raise ScenarioError("out_of_range_jitter_s: must be below out_of_range_time_s")
        for name, value in (
            ("dispatch_headway_s", self.dispatch_headway_s),
            ("dwell_time_s", self.dwell_time_s),
            ("out_of_range_time_s", self.out_of_range_time_s),
            ("out_of_range_jitter_s", self.out_of_range_jitter_s),
            ("sim_duration_s", self.sim_duration_s),
        ):
            if abs(value / self.tick_s - round(value / self.tick_s)) > 1e-9:
                raise ScenarioError(f"{name}: must be a multiple of tick_s")
        for name, times in (
            ("up_segment_times_s", self.up_segment_times_s),
            ("down_segment_times_s", self.down_segment_times_s),
        ):
            for t in times:
                if t <= 0:
                    raise ScenarioError(f"{name}: entries must be > 0")
                if abs(t / self.tick_s - round(t / self.tick_s)) > 1e-9:
                    raise ScenarioError(f"{name}: entries must be multiples of tick_s")
        _validate_profile_shape(self.per_train_profile_kw)
        if abs(self.scheduler.dt_s - self.tick_s) > 1e-9:
            raise ScenarioError("scheduler.dt_s: must equal tick_s")
        if abs(self.scheduler.h_min_s - self.min_headway_s) > 1e-9:
            raise ScenarioError("scheduler.h_min_s: must equal min_headway_s")
        if self.profile_mode is ProfileMode.PHYSICS:
            if self.train is None:
                object.__setattr__(self, "train", default_train_spec())
            if self.up_segments is None:
                object.__setattr__(self, "up_segments", default_segments(self.up_segment_times_s))
            if self.down_segments is None:
                object.__setattr__(
                    self, "down_segments", default_segments(self.down_segment_times_s)
                )
            for name, segs, times in (
                ("up_segments", self.up_segments, self.up_segment_times_s),
                ("down_segments", self.down_segments, self.down_segment_times_s),
            ):
                if len(segs) != n_seg:
                    raise ScenarioError(f"{name}: expected {n_seg} segments")
                fixed_times = tuple(
                    replace(seg, nominal_travel_time_s=t) for seg, t in zip(segs, times)
                )
                object.__setattr__(self, name, fixed_times)

    def fingerprint(self) -> str:
        """Stable identity of everything except the dispatch policy."""
        masked = replace(self, policy=Policy.FIXED)
        return repr(masked)


def _validate_profile_shape(samples: tuple[float, ...]) -> None:
    if not samples:
        raise ScenarioError("per_train_profile_kw: must not be empty")
    seen_negative = False
    for v in samples:
        if v < 0:
            seen_negative = True
        elif seen_negative:
            raise ScenarioError(
                "per_train_profile_kw: positive sample after the braking suffix began"
            )


def scale_profile(profile: PowerProfile, segment_time_s: float, tick_s: float) -> PowerProfile:
    """Stretch or shrink a template profile to cover a segment's travel time.

    Nearest-sample lookup on normalized time: sample ordering, endpoints
    and the sign pattern of the template are preserved; the output has
    exactly segment_time / tick samples.
    """
    if tick_s <= 0:
        raise ScenarioError("tick_s must be > 0")
    ratio = segment_time_s / tick_s
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9:
        raise ScenarioError("segment_time_s must be a positive multiple of tick_s")
    m = len(profile.samples_kw)
    if n == 1:
        return PowerProfile(dt_s=tick_s, samples_kw=(profile.samples_kw[0],))
    # round-half-up in exact integer arithmetic
    samples = tuple(
        profile.samples_kw[(2 * i * (m - 1) + (n - 1)) // (2 * (n - 1))] for i in range(n)
    )
    return PowerProfile(dt_s=tick_s, samples_kw=samples)


# Journey leg layout: one entry per gated departure.
# leg 0..2: up-direction departures, leg 3..5: down-direction departures.


def _leg_count(scenario: Scenario) -> int:
    return 2 * (len(scenario.stations) - 1)


def departure_offsets(scenario: Scenario) -> tuple[float, ...]:
    """Timetable departure times of each leg, as offsets from launch."""
    n_seg = len(scenario.stations) - 1
    dwell = scenario.dwell_time_s
    offsets = [0.0]
    t = 0.0
    for i in range(n_seg - 1):
        t += scenario.up_segment_times_s[i] + dwell
        offsets.append(t)
    t += scenario.up_segment_times_s[-1]  # arrive far terminal
    t += dwell + scenario.out_of_range_time_s + dwell
    offsets.append(t)
    for i in range(n_seg - 1):
        t += scenario.down_segment_times_s[i] + dwell
        offsets.append(t)
    return tuple(offsets)


def scheduled_journey_time(scenario: Scenario) -> float:
    return departure_offsets(scenario)[-1] + scenario.down_segment_times_s[-1]


@dataclass
class _Train:
    train_id: int
    launch_s: float
    excursion_ticks: int
    state: str = "waiting"  # waiting | running | dwell | out | done
    leg: int = 0  # departure leg in progress or awaited
    ticks_done: int = 0
    ticks_left: int = 0
    pre_out_dwell: bool = False
    became_eligible_s: Optional[float] = None
    actual_departures: dict[int, float] = field(default_factory=dict)
    completion_s: Optional[float] = None


@dataclass(frozen=True)
class TrainRecord:
    """Per-train journey summary."""

    train_id: int
    launch_s: float
    completion_s: Optional[float]
    scheduled_departures_s: tuple[float, ...]
    actual_departures_s: tuple[Optional[float], ...]
    scheduled_completion_s: float

    @property
    def travel_s(self) -> Optional[float]:
        if self.completion_s is None:
            return None
        return self.completion_s - self.launch_s

    @property
    def delay_vs_timetable_s(self) -> Optional[float]:
        if self.completion_s is None:
            return None
        return self.completion_s - self.scheduled_completion_s


@dataclass(frozen=True)
class TickRow:
    """One tick of the recorded time series."""

    time_s: float
    total_power_kw: float
    waiting_count: int
    authorized_count: int
    d_plus_kw: float
    d_minus_kw: float
    regen_available_kw: float
    departure_demand_kw: float
    train_powers_kw: dict[int, float]


@dataclass(frozen=True)
class DecisionRecord:
    """The optimizer's inputs and outputs at one rescheduling tick."""

    time_s: float
    instance: ScheduleInstance
    authorized: tuple[int, ...]
    objective_value: float
    total_power_kw: float
    d_plus_kw: float
    d_minus_kw: float


@dataclass(frozen=True)
class SimTrace:
    """Complete recorded output of one simulation run."""

    policy: Policy
    tick_s: float
    duration_s: float
    p_threshold_kw: float
    scenario_fingerprint: str
    rows: tuple[TickRow, ...]
    decisions: tuple[DecisionRecord, ...]
    trains: tuple[TrainRecord, ...]
    faults: tuple[str, ...]

    @property
    def launch_count(self) -> int:
        return len(self.trains)

    @property
    def completed_count(self) -> int:
        return sum(1 for t in self.trains if t.completion_s is not None)

    @property
    def totals_kw(self) -> tuple[float, ...]:
        return tuple(r.total_power_kw for r in self.rows)


class Simulation:
    """Single-run engine; construct once per (scenario, policy) pair."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.params = scenario.scheduler
        self.tick = scenario.tick_s
        self.offsets = departure_offsets(scenario)
        self.scheduled_total = scheduled_journey_time(scenario)
        self.n_seg = len(scenario.stations) - 1
        self.profiles = self._build_profiles()
        self.leg_samples = tuple(len(p.samples_kw) for p in self.profiles)
        self.up_bases = self._bases(scenario.up_segment_times_s)
        self.down_bases = self._bases(scenario.down_segment_times_s)
        self.trains: list[_Train] = []
        self.rows: list[TickRow] = []
        self.decisions: list[DecisionRecord] = []
        self.faults: list[str] = []
        n_launches = int(scenario.sim_duration_s // scenario.dispatch_headway_s) + 1
        self.excursion_ticks = self._draw_excursions(n_launches)

    def _build_profiles(self) -> tuple[PowerProfile, ...]:
        sc = self.scenario
        if sc.profile_mode is ProfileMode.PHYSICS:
            segs = sc.up_segments + sc.down_segments
            return tuple(generate_segment_profile(sc.train, seg, sc.tick_s) for seg in segs)
        template = PowerProfile(dt_s=sc.tick_s, samples_kw=sc.per_train_profile_kw)
        times = sc.up_segment_times_s + sc.down_segment_times_s
        return tuple(scale_profile(template, t, sc.tick_s) for t in times)

    @staticmethod
    def _bases(times: tuple[float, ...]) -> tuple[float, ...]:
        bases = [0.0]
        for t in times:
            bases.append(bases[-1] + t)
        return tuple(bases)

    def _draw_excursions(self, count: int) -> tuple[int, ...]:
        sc = self.scenario
        base_ticks = round(sc.out_of_range_time_s / sc.tick_s)
        jitter_ticks = round(sc.out_of_range_jitter_s / sc.tick_s)
        if jitter_ticks == 0:
            return tuple(base_ticks for _ in range(count))
        rng = random.Random(sc.rng_seed)
        choices = range(-jitter_ticks, jitter_ticks + 1)
        return tuple(base_ticks + rng.choice(choices) for _ in range(count))

    # -- per-train geometry ------------------------------------------------

    def _route(self, tr: _Train) -> Optional[str]:
        if tr.state in ("out", "done"):
            return None
        if tr.state == "dwell":
            if tr.pre_out_dwell:
                return "up"
            return "up" if tr.leg <= self.n_seg - 1 else "down"
        return "up" if tr.leg <= self.n_seg - 1 else "down"

    def _progress(self, tr: _Train) -> float:
        """Route position in nominal travel seconds (constant while stopped)."""
        up = tr.leg <= self.n_seg - 1
        bases = self.up_bases if up else self.down_bases
        times = self.scenario.up_segment_times_s if up else self.scenario.down_segment_times_s
        seg_idx = tr.leg if up else tr.leg - self.n_seg
        if tr.state == "running":
            frac = tr.ticks_done / self.leg_samples[tr.leg]
            return bases[seg_idx] + frac * times[seg_idx]
        if tr.state == "dwell":
            if tr.pre_out_dwell:
                return self.up_bases[-1]
            return bases[seg_idx]
        return bases[seg_idx]  # waiting at the departure station

    def _power(self, tr: _Train) -> float:
        if tr.state == "running" and tr.ticks_done > 0:
            return self.profiles[tr.leg].samples_kw[tr.ticks_done]
        return 0.0

    def _in_range(self, tr: _Train) -> bool:
        return tr.state not in ("out", "done")

    def _scheduled_departure(self, tr: _Train, leg: int) -> float:
        return tr.launch_s + self.offsets[leg]

    # -- tick pipeline -----------------------------------------------------

    def _advance(self, t: float) -> None:
        dwell_ticks = round(self.scenario.dwell_time_s / self.tick)
        for tr in self.trains:
            if tr.state == "running":
                tr.ticks_done += 1
                if tr.ticks_done >= self.leg_samples[tr.leg]:
                    if tr.leg == 2 * self.n_seg - 1:
                        tr.state = "done"
                        tr.completion_s = t
                    elif tr.leg == self.n_seg - 1:
                        tr.state = "dwell"
                        tr.pre_out_dwell = True
                        tr.ticks_left = dwell_ticks
                    else:
                        tr.state = "dwell"
                        tr.leg += 1
                        tr.ticks_left = dwell_ticks
            elif tr.state == "dwell":
                tr.ticks_left -= 1
                if tr.ticks_left <= 0:
                    if tr.pre_out_dwell:
                        tr.pre_out_dwell = False
                        tr.state = "out"
                        tr.leg += 1
                        tr.ticks_left = tr.excursion_ticks
                    else:
                        tr.state = "waiting"
            elif tr.state == "out":
                if tr.ticks_left > 0:
                    tr.ticks_left -= 1
                # Reentry into the far terminal is itself gated: the train
                # stays in the turnaround area until the down route has
                # minimum-headway clearance at the platform.
                if tr.ticks_left <= 0 and self._reentry_clear():
                    tr.state = "dwell"
                    tr.ticks_left = dwell_ticks

    def _reentry_clear(self) -> bool:
        h_min = self.scenario.min_headway_s
        for other in self.trains:
            if self._route(other) == "down" and self._progress(other) < h_min - HEADWAY_CHECK_TOL_S:
                return False
        return True

    def _launch(self, t: float) -> None:
        headway = self.scenario.dispatch_headway_s
        if abs(t % headway) > 1e-9 and abs(t % headway - headway) > 1e-9:
            return
        idx = len(self.trains)
        self.trains.append(
            _Train(
                train_id=idx + 1,
                launch_s=t,
                excursion_ticks=self.excursion_ticks[idx],
            )
        )

    def _eligible_waiting(self, t: float) -> list[_Train]:
        out = []
        for tr in self.trains:
            if tr.state != "waiting":
                continue
            if t + 1e-9 >= self._scheduled_departure(tr, tr.leg):
                if tr.became_eligible_s is None:
                    tr.became_eligible_s = t
                out.append(tr)
        return sorted(out, key=lambda tr: tr.train_id)

    def _headways(self, waiting: list[_Train]) -> dict[int, tuple[Optional[float], Optional[float]]]:
        members: dict[str, list[tuple[float, _Train]]] = {"up": [], "down": []}
        for tr in self.trains:
            route = self._route(tr)
            if route is not None:
                members[route].append((self._progress(tr), tr))
        result: dict[int, tuple[Optional[float], Optional[float]]] = {}
        for route_members in members.values():
            # furthest ahead first; launch order breaks exact ties
            route_members.sort(key=lambda pair: (-pair[0], pair[1].train_id))
            for i, (progress, tr) in enumerate(route_members):
                lead = route_members[i - 1][0] - progress if i > 0 else None
                follow = progress - route_members[i + 1][0] if i + 1 < len(route_members) else None
                result[tr.train_id] = (lead, follow)
        return result

    def _depart(self, tr: _Train, t: float) -> None:
        tr.actual_departures[tr.leg] = t
        tr.state = "running"
        tr.ticks_done = 0
        tr.became_eligible_s = None

    def _fixed_policy(
        self, t: float, waiting: list[_Train], headways: dict
    ) -> dict[int, int]:
        h_min = self.scenario.min_headway_s
        move = self.params.dt_s
        k: dict[int, int] = {}
        for tr in waiting:
            lead, follow = headways[tr.train_id]
            go_ok = (lead is None or lead - move >= h_min - HEADWAY_CHECK_TOL_S) and (
                follow is None or follow >= h_min - HEADWAY_CHECK_TOL_S
            )
            if go_ok:
                k[tr.train_id] = 1
                continue
            if follow is not None and follow - move < h_min - HEADWAY_CHECK_TOL_S:
                raise ScenarioDesignError(
                    f"t={t}: train {tr.train_id} can neither depart nor hold "
                    f"(lead={lead}, follow={follow})"
                )
            if lead is not None and lead < h_min - HEADWAY_CHECK_TOL_S:
                self.faults.append(
                    f"t={t}: train {tr.train_id} held inside a lead-gap violation"
                )
            k[tr.train_id] = 0
        return k

    def _pres_policy(
        self, t: float, waiting: list[_Train], headways: dict, running_powers: list[float]
    ) -> tuple[dict[int, int], Optional[DecisionRecord]]:
        newly = sum(1 for tr in waiting if tr.became_eligible_s == t)
        active = list(waiting)
        while True:
            records = tuple(
                WaitingTrain(
                    train_id=tr.train_id,
                    headway_lead_s=headways[tr.train_id][0],
                    headway_follow_s=headways[tr.train_id][1],
                    departure_power_kw=self.profiles[tr.leg].samples_kw[0],
                    scheduled_departure_s=self._scheduled_departure(tr, tr.leg),
                )
                for tr in active
            )
            instance = ScheduleInstance(
                t_i_s=t,
                running_powers_kw=tuple(running_powers),
                waiting=records,
                newly_available_count=newly,
            )
            try:
                decision = decide(instance, self.params)
            except SafetyInfeasibilityError as err:
                follow_faults = [v for v in err.violations if v.kind == "follow"]
                if follow_faults:
                    raise ScenarioDesignError(
                        f"t={t}: follower headway unsatisfiable: {follow_faults}"
                    ) from err
                held = {v.train_id for v in err.violations}
                self.faults.append(f"t={t}: held for safety infeasibility: {sorted(held)}")
                active = [tr for tr in active if tr.train_id not in held]
                continue
            k = {tr.train_id: decision.authorizations[tr.train_id] for tr in active}
            record = None
            if active:
                record = DecisionRecord(
                    time_s=t,
                    instance=instance,
                    authorized=tuple(tid for tid, v in k.items() if v),
                    objective_value=decision.objective_value,
                    total_power_kw=decision.total_power_kw,
                    d_plus_kw=decision.overage_kw,
                    d_minus_kw=decision.underage_kw,
                )
            return k, record

    def _recheck_decision(
        self, t: float, waiting: list[_Train], headways: dict, k: dict[int, int]
    ) -> None:
        # Direct re-evaluation of the headway rules on every authorization,
        # independent of the optimizer's own constraint handling.
        h_min = self.scenario.min_headway_s
        move = self.params.dt_s
        for tr in waiting:
            lead, follow = headways[tr.train_id]
            if k.get(tr.train_id, 0):
                bad_lead = lead is not None and lead - move < h_min - HEADWAY_CHECK_TOL_S
                bad_follow = follow is not None and follow < h_min - HEADWAY_CHECK_TOL_S
                if bad_lead or bad_follow:
                    self.faults.append(
                        f"t={t}: authorization of train {tr.train_id} violates the headway rules"
                    )

    def _check_global_safety(self, t: float) -> None:
        h_min = self.scenario.min_headway_s
        members: dict[str, list[float]] = {"up": [], "down": []}
        for tr in self.trains:
            route = self._route(tr)
            if route is not None:
                members[route].append(self._progress(tr))
        for route, values in members.items():
            values.sort(reverse=True)
            for a, b in zip(values, values[1:]):
                if a - b < h_min - HEADWAY_CHECK_TOL_S:
                    self.faults.append(
                        f"t={t}: {route} headway {a - b:.1f} s below minimum {h_min} s"
                    )

    def step(self, t: float) -> None:
        if t > 0:
            self._advance(t)
        self._launch(t)

        waiting = self._eligible_waiting(t)
        headways = self._headways(waiting)
        in_range = sorted(
            (tr for tr in self.trains if self._in_range(tr)), key=lambda tr: tr.train_id
        )
        running_powers = [self._power(tr) for tr in in_range]

        record = None
        if self.scenario.policy is Policy.PRES:
            k, record = self._pres_policy(t, waiting, headways, running_powers)
        else:
            k = self._fixed_policy(t, waiting, headways)

        self._recheck_decision(t, waiting, headways, k)

        candidates = [self.profiles[tr.leg].samples_kw[0] for tr in waiting]
        k_vec = [k.get(tr.train_id, 0) for tr in waiting]
        total = total_power(running_powers, candidates, k_vec)
        d_plus, d_minus = split_threshold_deviation(total, self.params.p_threshold_kw)
        regen = -sum(p for p in running_powers if p < 0)
        demand = sum(p * x for p, x in zip(candidates, k_vec) if x)

        for tr in waiting:
            if k.get(tr.train_id, 0):
                self._depart(tr, t)

        self._check_global_safety(t)
        self.rows.append(
            TickRow(
                time_s=t,
                total_power_kw=total,
                waiting_count=len(waiting),
                authorized_count=sum(k_vec),
                d_plus_kw=d_plus,
                d_minus_kw=d_minus,
                regen_available_kw=regen,
                departure_demand_kw=demand,
                train_powers_kw={tr.train_id: self._power(tr) for tr in self.trains},
            )
        )
        if record is not None:
            self.decisions.append(record)

    def run(self) -> SimTrace:
        sc = self.scenario
        n_ticks = round(sc.sim_duration_s / sc.tick_s)
        for i in range(n_ticks + 1):
            self.step(i * sc.tick_s)
        trains = tuple(
            TrainRecord(
                train_id=tr.train_id,
                launch_s=tr.launch_s,
                completion_s=tr.completion_s,
                scheduled_departures_s=tuple(tr.launch_s + off for off in self.offsets),
                actual_departures_s=tuple(
                    tr.actual_departures.get(leg) for leg in range(len(self.offsets))
                ),
                scheduled_completion_s=tr.launch_s + self.scheduled_total,
            )
            for tr in self.trains
        )
        return SimTrace(
            policy=sc.policy,
            tick_s=sc.tick_s,
            duration_s=sc.sim_duration_s,
            p_threshold_kw=self.params.p_threshold_kw,
            scenario_fingerprint=sc.fingerprint(),
            rows=tuple(self.rows),
            decisions=tuple(self.decisions),
            trains=trains,
            faults=tuple(self.faults),
        )


def run_scenario(scenario: Scenario) -> SimTrace:
    """Run one policy over one scenario; deterministic for a given scenario."""
    return Simulation(scenario).run()


def run_pair(scenario: Scenario) -> tuple[SimTrace, SimTrace]:
    """Run the fixed-timetable and rescheduling policies on the same scenario."""
    fixed = run_scenario(replace(scenario, policy=Policy.FIXED))
    pres = run_scenario(replace(scenario, policy=Policy.PRES))
    return fixed, pres
