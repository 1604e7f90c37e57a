"""Pydantic request/response models for the HTTP service.

Wire models mirror the core dataclasses field for field; the
``to_core``/``from_core`` converters are the only mapping layer.  Solver
problems on the wire are purely linear (assignment-evaluated constraints
exist only inside the scheduler).
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .. import engine, metrics, scheduling, solver
from ..physics import ForceSpeedEnvelope, TrackSegment, TrainSpec


class EnvelopeModel(BaseModel):
    base_force_n: float
    base_speed_kmh: float
    max_power_w: Optional[float] = None

    def to_core(self) -> ForceSpeedEnvelope:
        if self.max_power_w is None:
            return ForceSpeedEnvelope.from_force_and_corner(self.base_force_n, self.base_speed_kmh)
        return ForceSpeedEnvelope(self.base_force_n, self.base_speed_kmh, self.max_power_w)

    @classmethod
    def from_core(cls, env: ForceSpeedEnvelope) -> "EnvelopeModel":
        return cls(
            base_force_n=env.base_force_n,
            base_speed_kmh=env.base_speed_kmh,
            max_power_w=env.max_power_w,
        )


class TrainSpecModel(BaseModel):
    mass_tonnes: float
    axle_count: int
    car_count: int
    frontal_area_m2: float
    tunnel_factor: int
    traction_envelope: EnvelopeModel
    braking_envelope: EnvelopeModel
    max_speed_kmh: float

    def to_core(self) -> TrainSpec:
        return TrainSpec(
            mass_tonnes=self.mass_tonnes,
            axle_count=self.axle_count,
            car_count=self.car_count,
            frontal_area_m2=self.frontal_area_m2,
            tunnel_factor=self.tunnel_factor,
            traction_envelope=self.traction_envelope.to_core(),
            braking_envelope=self.braking_envelope.to_core(),
            max_speed_kmh=self.max_speed_kmh,
        )

    @classmethod
    def from_core(cls, spec: TrainSpec) -> "TrainSpecModel":
        return cls(
            mass_tonnes=spec.mass_tonnes,
            axle_count=spec.axle_count,
            car_count=spec.car_count,
            frontal_area_m2=spec.frontal_area_m2,
            tunnel_factor=spec.tunnel_factor,
            traction_envelope=EnvelopeModel.from_core(spec.traction_envelope),
            braking_envelope=EnvelopeModel.from_core(spec.braking_envelope),
            max_speed_kmh=spec.max_speed_kmh,
        )


class SegmentModel(BaseModel):
    length_m: float
    gradient_angle_rad: float = 0.0
    curve_radius_m: float = 0.0
    gauge_coefficient: float = 750.0
    is_tunnel: bool = False
    nominal_travel_time_s: float

    def to_core(self) -> TrackSegment:
        return TrackSegment(
            length_m=self.length_m,
            gradient_angle_rad=self.gradient_angle_rad,
            curve_radius_m=self.curve_radius_m,
            gauge_coefficient=self.gauge_coefficient,
            is_tunnel=self.is_tunnel,
            nominal_travel_time_s=self.nominal_travel_time_s,
        )

    @classmethod
    def from_core(cls, seg: TrackSegment) -> "SegmentModel":
        return cls(
            length_m=seg.length_m,
            gradient_angle_rad=seg.gradient_angle_rad,
            curve_radius_m=seg.curve_radius_m,
            gauge_coefficient=seg.gauge_coefficient,
            is_tunnel=seg.is_tunnel,
            nominal_travel_time_s=seg.nominal_travel_time_s,
        )


class SchedulerParamsModel(BaseModel):
    w1: float = 3.0
    w2: float = 5.0
    gamma1_value: float = 20.0
    gamma2_per_new_train: float = 1.0
    p_threshold_kw: float = 20_000.0
    h_min_s: float = 180.0
    dt_s: float = 10.0

    def to_core(self) -> scheduling.SchedulerParams:
        return scheduling.SchedulerParams(**self.model_dump())

    @classmethod
    def from_core(cls, params: scheduling.SchedulerParams) -> "SchedulerParamsModel":
        return cls(
            w1=params.w1,
            w2=params.w2,
            gamma1_value=params.gamma1_value,
            gamma2_per_new_train=params.gamma2_per_new_train,
            p_threshold_kw=params.p_threshold_kw,
            h_min_s=params.h_min_s,
            dt_s=params.dt_s,
        )


class ScenarioModel(BaseModel):
    stations: list[str] = ["A", "B", "C", "D"]
    up_segment_times_s: list[float] = [180.0, 120.0, 150.0]
    down_segment_times_s: list[float] = [150.0, 120.0, 180.0]
    out_of_range_time_s: float = 1080.0
    out_of_range_jitter_s: float = 30.0
    dispatch_headway_s: float = 360.0
    min_headway_s: float = 180.0
    dwell_time_s: float = 60.0
    tick_s: float = 10.0
    sim_duration_s: float = 20_000.0
    per_train_profile_kw: list[float] = list(engine.DEFAULT_PROFILE_KW)
    profile_mode: Literal["fixed_profile", "physics"] = "fixed_profile"
    scheduler: SchedulerParamsModel = Field(default_factory=SchedulerParamsModel)
    policy: Literal["fixed", "pres"] = "fixed"
    rng_seed: int = 3
    train: Optional[TrainSpecModel] = None
    up_segments: Optional[list[SegmentModel]] = None
    down_segments: Optional[list[SegmentModel]] = None

    def to_core(self) -> engine.Scenario:
        return engine.Scenario(
            stations=tuple(self.stations),
            up_segment_times_s=tuple(self.up_segment_times_s),
            down_segment_times_s=tuple(self.down_segment_times_s),
            out_of_range_time_s=self.out_of_range_time_s,
            out_of_range_jitter_s=self.out_of_range_jitter_s,
            dispatch_headway_s=self.dispatch_headway_s,
            min_headway_s=self.min_headway_s,
            dwell_time_s=self.dwell_time_s,
            tick_s=self.tick_s,
            sim_duration_s=self.sim_duration_s,
            per_train_profile_kw=tuple(self.per_train_profile_kw),
            profile_mode=engine.ProfileMode(self.profile_mode),
            scheduler=self.scheduler.to_core(),
            policy=engine.Policy(self.policy),
            rng_seed=self.rng_seed,
            train=self.train.to_core() if self.train else None,
            up_segments=tuple(s.to_core() for s in self.up_segments) if self.up_segments else None,
            down_segments=tuple(s.to_core() for s in self.down_segments)
            if self.down_segments
            else None,
        )

    @classmethod
    def from_core(cls, scenario: engine.Scenario) -> "ScenarioModel":
        return cls(
            stations=list(scenario.stations),
            up_segment_times_s=list(scenario.up_segment_times_s),
            down_segment_times_s=list(scenario.down_segment_times_s),
            out_of_range_time_s=scenario.out_of_range_time_s,
            out_of_range_jitter_s=scenario.out_of_range_jitter_s,
            dispatch_headway_s=scenario.dispatch_headway_s,
            min_headway_s=scenario.min_headway_s,
            dwell_time_s=scenario.dwell_time_s,
            tick_s=scenario.tick_s,
            sim_duration_s=scenario.sim_duration_s,
            per_train_profile_kw=list(scenario.per_train_profile_kw),
            profile_mode=scenario.profile_mode.value,
            scheduler=SchedulerParamsModel.from_core(scenario.scheduler),
            policy=scenario.policy.value,
            rng_seed=scenario.rng_seed,
            train=TrainSpecModel.from_core(scenario.train) if scenario.train else None,
            up_segments=[SegmentModel.from_core(s) for s in scenario.up_segments]
            if scenario.up_segments
            else None,
            down_segments=[SegmentModel.from_core(s) for s in scenario.down_segments]
            if scenario.down_segments
            else None,
        )


class TickRowModel(BaseModel):
    time_s: float
    total_power_kw: float
    waiting_count: int
    authorized_count: int
    d_plus_kw: float
    d_minus_kw: float
    regen_available_kw: float
    departure_demand_kw: float
    train_powers_kw: dict[int, float]


class TrainRecordModel(BaseModel):
    train_id: int
    launch_s: float
    completion_s: Optional[float]
    scheduled_departures_s: list[float]
    actual_departures_s: list[Optional[float]]
    scheduled_completion_s: float
    travel_s: Optional[float]
    delay_vs_timetable_s: Optional[float]


class TraceModel(BaseModel):
    policy: Literal["fixed", "pres"]
    tick_s: float
    duration_s: float
    p_threshold_kw: float
    scenario_fingerprint: str
    launch_count: int
    completed_count: int
    faults: list[str]
    rows: list[TickRowModel]
    trains: list[TrainRecordModel]

    @classmethod
    def from_core(cls, trace: engine.SimTrace) -> "TraceModel":
        return cls(
            policy=trace.policy.value,
            tick_s=trace.tick_s,
            duration_s=trace.duration_s,
            p_threshold_kw=trace.p_threshold_kw,
            scenario_fingerprint=trace.scenario_fingerprint,
            launch_count=trace.launch_count,
            completed_count=trace.completed_count,
            faults=list(trace.faults),
            rows=[
                TickRowModel(
                    time_s=r.time_s,
                    total_power_kw=r.total_power_kw,
                    waiting_count=r.waiting_count,
                    authorized_count=r.authorized_count,
                    d_plus_kw=r.d_plus_kw,
                    d_minus_kw=r.d_minus_kw,
                    regen_available_kw=r.regen_available_kw,
                    departure_demand_kw=r.departure_demand_kw,
                    train_powers_kw=dict(r.train_powers_kw),
                )
                for r in trace.rows
            ],
            trains=[
                TrainRecordModel(
                    train_id=t.train_id,
                    launch_s=t.launch_s,
                    completion_s=t.completion_s,
                    scheduled_departures_s=list(t.scheduled_departures_s),
                    actual_departures_s=list(t.actual_departures_s),
                    scheduled_completion_s=t.scheduled_completion_s,
                    travel_s=t.travel_s,
                    delay_vs_timetable_s=t.delay_vs_timetable_s,
                )
                for t in trace.trains
            ],
        )

    def to_core(self) -> engine.SimTrace:
        return engine.SimTrace(
            policy=engine.Policy(self.policy),
            tick_s=self.tick_s,
            duration_s=self.duration_s,
            p_threshold_kw=self.p_threshold_kw,
            scenario_fingerprint=self.scenario_fingerprint,
            rows=tuple(
                engine.TickRow(
                    time_s=r.time_s,
                    total_power_kw=r.total_power_kw,
                    waiting_count=r.waiting_count,
                    authorized_count=r.authorized_count,
                    d_plus_kw=r.d_plus_kw,
                    d_minus_kw=r.d_minus_kw,
                    regen_available_kw=r.regen_available_kw,
                    departure_demand_kw=r.departure_demand_kw,
                    train_powers_kw=dict(r.train_powers_kw),
                )
                for r in self.rows
            ),
            decisions=(),
            trains=tuple(
                engine.TrainRecord(
                    train_id=t.train_id,
                    launch_s=t.launch_s,
                    completion_s=t.completion_s,
                    scheduled_departures_s=tuple(t.scheduled_departures_s),
                    actual_departures_s=tuple(t.actual_departures_s),
                    scheduled_completion_s=t.scheduled_completion_s,
                )
                for t in self.trains
            ),
            faults=tuple(self.faults),
        )


class PolicyStatsModel(BaseModel):
    policy: str
    exceedance_count: int
    exceedance_tick_count: int
    max_total_power_kw: float
    mean_power_kw: float
    regen_utilized_kwh: float
    regen_wasted_kwh: float
    travel_time_mean_s: float
    travel_time_std_s: float
    travel_time_quartiles_s: list[float]
    completed_train_count: int

    @classmethod
    def from_core(cls, stats: metrics.PolicyStats) -> "PolicyStatsModel":
        return cls(
            policy=stats.policy,
            exceedance_count=stats.exceedance_count,
            exceedance_tick_count=stats.exceedance_tick_count,
            max_total_power_kw=stats.max_total_power_kw,
            mean_power_kw=stats.mean_power_kw,
            regen_utilized_kwh=stats.regen_utilized_kwh,
            regen_wasted_kwh=stats.regen_wasted_kwh,
            travel_time_mean_s=stats.travel_time_mean_s,
            travel_time_std_s=stats.travel_time_std_s,
            travel_time_quartiles_s=list(stats.travel_time_quartiles_s),
            completed_train_count=stats.completed_train_count,
        )

    def to_core(self) -> metrics.PolicyStats:
        return metrics.PolicyStats(
            policy=self.policy,
            exceedance_count=self.exceedance_count,
            exceedance_tick_count=self.exceedance_tick_count,
            max_total_power_kw=self.max_total_power_kw,
            mean_power_kw=self.mean_power_kw,
            regen_utilized_kwh=self.regen_utilized_kwh,
            regen_wasted_kwh=self.regen_wasted_kwh,
            travel_time_mean_s=self.travel_time_mean_s,
            travel_time_std_s=self.travel_time_std_s,
            travel_time_quartiles_s=tuple(self.travel_time_quartiles_s),
            completed_train_count=self.completed_train_count,
        )


class ReportModel(BaseModel):
    reporting_threshold_kw: float
    fixed: PolicyStatsModel
    pres: PolicyStatsModel
    exceedance_reduction_pct: Optional[float]
    extra_delay_mean_s: float
    extra_delay_pct: float

    @classmethod
    def from_core(cls, report: metrics.ComparisonReport) -> "ReportModel":
        return cls(
            reporting_threshold_kw=report.reporting_threshold_kw,
            fixed=PolicyStatsModel.from_core(report.fixed),
            pres=PolicyStatsModel.from_core(report.pres),
            exceedance_reduction_pct=report.exceedance_reduction_pct,
            extra_delay_mean_s=report.extra_delay_mean_s,
            extra_delay_pct=report.extra_delay_pct,
        )

    def to_core(self) -> metrics.ComparisonReport:
        return metrics.ComparisonReport(
            reporting_threshold_kw=self.reporting_threshold_kw,
            fixed=self.fixed.to_core(),
            pres=self.pres.to_core(),
            exceedance_reduction_pct=self.exceedance_reduction_pct,
            extra_delay_mean_s=self.extra_delay_mean_s,
            extra_delay_pct=self.extra_delay_pct,
        )


class SimulateRequest(BaseModel):
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)
    include_rows: bool = True


class SimulateResponse(BaseModel):
    trace: TraceModel


class CompareRequest(BaseModel):
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)
    reporting_threshold_kw: Optional[float] = None


class CompareResponse(BaseModel):
    report: ReportModel
    fixed: TraceModel
    pres: TraceModel


class WaitingTrainModel(BaseModel):
    train_id: int
    headway_lead_s: Optional[float] = None
    headway_follow_s: Optional[float] = None
    departure_power_kw: float
    scheduled_departure_s: float
    progress_rate: float = 1.0

    def to_core(self) -> scheduling.WaitingTrain:
        return scheduling.WaitingTrain(
            train_id=self.train_id,
            headway_lead_s=self.headway_lead_s,
            headway_follow_s=self.headway_follow_s,
            departure_power_kw=self.departure_power_kw,
            scheduled_departure_s=self.scheduled_departure_s,
            progress_rate=self.progress_rate,
        )


class DecideRequest(BaseModel):
    t_i_s: float = 0.0
    running_powers_kw: list[float]
    waiting: list[WaitingTrainModel]
    newly_available_count: int = 0
    params: SchedulerParamsModel = Field(default_factory=SchedulerParamsModel)

    def to_core(self) -> tuple[scheduling.ScheduleInstance, scheduling.SchedulerParams]:
        instance = scheduling.ScheduleInstance(
            t_i_s=self.t_i_s,
            running_powers_kw=tuple(self.running_powers_kw),
            waiting=tuple(w.to_core() for w in self.waiting),
            newly_available_count=self.newly_available_count,
        )
        return instance, self.params.to_core()


class DecideResponse(BaseModel):
    authorizations: dict[int, int]
    total_power_kw: float
    overage_kw: float
    underage_kw: float
    objective_value: float


class ConstraintModel(BaseModel):
    coeffs: list[float]
    relation: Literal["<=", "=", ">="]
    rhs: float
    label: str = ""


class SlackModel(BaseModel):
    name: str
    constraint: int
    coeff: float
    cost: float = 0.0


class SolveRequest(BaseModel):
    num_vars: int
    objective: list[float]
    constraints: list[ConstraintModel] = []
    slacks: list[SlackModel] = []
    method: Literal["branch_and_bound", "exhaustive"] = "branch_and_bound"

    def to_core(self) -> solver.BipProblem:
        return solver.BipProblem(
            num_vars=self.num_vars,
            objective=tuple(self.objective),
            constraints=tuple(
                solver.Constraint(coeffs=tuple(c.coeffs), relation=c.relation, rhs=c.rhs, label=c.label)
                for c in self.constraints
            ),
            slacks=tuple(
                solver.SlackSpec(name=s.name, constraint=s.constraint, coeff=s.coeff, cost=s.cost)
                for s in self.slacks
            ),
        )


class SolveResponse(BaseModel):
    status: Literal["optimal", "infeasible"]
    assignment: Optional[list[int]] = None
    slack_values: dict[str, float] = {}
    objective_value: Optional[float] = None
    listing: str


class SelftestRequest(BaseModel):
    num_instances: int = 1000
    max_vars: int = 12
    seed: int = 42


class SelftestResponse(BaseModel):
    passed: bool
    instances: int
    mismatches: int
    max_solve_ms: float
    first_failure: Optional[str] = None


class HealthResponse(BaseModel):
    status: str
    version: str
