"""Train motion and traction power model.

Mechanics are SI (N, kg, m, s) except where rail practice dictates
otherwise: the Davis running-resistance formula takes train mass in
metric tonnes and speed in km/h and yields Newtons, matching the
standard coefficient set for that form.  Speeds held in state objects
are km/h; integration happens in m/s.

A segment traversal follows the classic four-stage duty cycle:
full-power acceleration, cruising at balance throttle, coasting, and
full-service braking to a stop.  The profile generator simulates the
cycle on a fine internal grid and downsamples to the requested tick by
block averaging.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

G_M_S2 = 9.80665

# Sentinel for straight track (no curve resistance).
NO_CURVE = 0.0


class PhysicsError(ValueError):
    """Invalid physical input (bad parameter or out-of-domain argument)."""


class InfeasibleSegmentError(PhysicsError):
    """Segment cannot be traversed with the given rolling stock."""


class Stage(str, enum.Enum):
    """Duty-cycle stage of a moving train."""

    MAX_ACCEL = "MA"
    CRUISE = "CR"
    COAST = "CO"
    MAX_BRAKE = "MB"


@dataclass(frozen=True)
class ForceSpeedEnvelope:
    """Maximum force available from the drive as a function of speed.

    Constant force up to ``base_speed_kmh`` (torque-limited region),
    then force falls off as max_power / v (power-limited region).  The
    corner must be continuous: base_force_N * base_speed/3.6 equals
    max_power_W.
    """

    base_force_n: float
    base_speed_kmh: float
    max_power_w: float

    def __post_init__(self):
        if self.base_force_n <= 0 or self.base_speed_kmh <= 0 or self.max_power_w <= 0:
            raise PhysicsError("envelope parameters must be positive")
        corner_power = self.base_force_n * self.base_speed_kmh / 3.6
        if abs(corner_power - self.max_power_w) > 1e-9 * self.max_power_w:
            raise PhysicsError(
                "envelope discontinuous at corner speed: "
                f"force*corner={corner_power!r} W vs max_power={self.max_power_w!r} W"
            )

    @classmethod
    def from_force_and_corner(cls, base_force_n: float, base_speed_kmh: float) -> "ForceSpeedEnvelope":
        """Build a continuous envelope from force and corner speed alone."""
        return cls(base_force_n, base_speed_kmh, base_force_n * base_speed_kmh / 3.6)


@dataclass(frozen=True)
class TrainSpec:
    """Rolling-stock physical parameters."""

    mass_tonnes: float
    axle_count: int
    car_count: int
    frontal_area_m2: float
    tunnel_factor: int
    traction_envelope: ForceSpeedEnvelope
    braking_envelope: ForceSpeedEnvelope
    max_speed_kmh: float

    def __post_init__(self):
        if self.mass_tonnes <= 0:
            raise PhysicsError("mass_tonnes must be > 0")
        if self.axle_count < 2:
            raise PhysicsError("axle_count must be >= 2")
        if self.car_count < 1:
            raise PhysicsError("car_count must be >= 1")
        if self.frontal_area_m2 <= 0:
            raise PhysicsError("frontal_area_m2 must be > 0")
        if self.tunnel_factor not in (1, 2, 3):
            raise PhysicsError("tunnel_factor must be 1, 2 or 3")
        if self.max_speed_kmh <= 0:
            raise PhysicsError("max_speed_kmh must be > 0")

    @property
    def mass_kg(self) -> float:
        return self.mass_tonnes * 1000.0


@dataclass(frozen=True)
class TrackSegment:
    """Geometry and schedule of one inter-station segment.

    ``curve_radius_m`` of 0 (NO_CURVE) means straight track.  The
    air-drag coefficient doubles (or triples) in tunnels via the train's
    tunnel_factor; ``is_tunnel`` selects that behavior per segment.
    """

    length_m: float
    gradient_angle_rad: float = 0.0
    curve_radius_m: float = NO_CURVE
    gauge_coefficient: float = 750.0
    is_tunnel: bool = False
    nominal_travel_time_s: float = 120.0

    def __post_init__(self):
        if self.length_m <= 0:
            raise PhysicsError("length_m must be > 0")
        if self.nominal_travel_time_s <= 0:
            raise PhysicsError("nominal_travel_time_s must be > 0")
        if self.curve_radius_m < 0:
            raise PhysicsError("curve_radius_m must be >= 0 (0 = straight)")
        if abs(self.gradient_angle_rad) >= math.pi / 2:
            raise PhysicsError("gradient angle must satisfy |angle| < pi/2")

    @property
    def has_curve(self) -> bool:
        return self.curve_radius_m > 0


@dataclass(frozen=True)
class MotionState:
    """Instantaneous kinematic state plus applied control factors."""

    position_m: float
    speed_kmh: float
    stage: Stage
    traction_factor: float = 0.0
    braking_factor: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.traction_factor <= 1.0):
            raise PhysicsError("traction_factor must lie in [0, 1]")
        if not (0.0 <= self.braking_factor <= 1.0):
            raise PhysicsError("braking_factor must lie in [0, 1]")
        if self.traction_factor > 0 and self.braking_factor > 0:
            raise PhysicsError("traction and braking cannot both be applied")
        if self.stage in (Stage.MAX_ACCEL, Stage.CRUISE) and self.braking_factor != 0:
            raise PhysicsError(f"stage {self.stage.value} forbids braking_factor > 0")
        if self.stage is Stage.COAST and (self.traction_factor != 0 or self.braking_factor != 0):
            raise PhysicsError("coasting requires both control factors zero")
        if self.stage is Stage.MAX_BRAKE and self.traction_factor != 0:
            raise PhysicsError("braking stage forbids traction_factor > 0")


@dataclass(frozen=True)
class PowerProfile:
    """Sampled traction power draw over one segment (kW; negative = regenerative)."""

    dt_s: float
    samples_kw: tuple[float, ...]

    def __post_init__(self):
        if self.dt_s <= 0:
            raise PhysicsError("dt_s must be > 0")
        if not self.samples_kw:
            raise PhysicsError("profile must contain at least one sample")
        object.__setattr__(self, "samples_kw", tuple(float(v) for v in self.samples_kw))

    @property
    def duration_s(self) -> float:
        return self.dt_s * len(self.samples_kw)


def davis_resistance(spec: TrainSpec, speed_kmh: float, in_tunnel: bool = False) -> float:
    """Running resistance in Newtons (Davis form: mass in tonnes, speed in km/h).

    6.4*m + 130*n + 0.14*m*v + gamma*[0.046 + 0.065*(N-1)]*A*v^2,
    with gamma = tunnel_factor inside tunnels and 1 in the open.
    Strictly increasing in speed for every valid spec.
    """
    if speed_kmh < 0:
        raise PhysicsError("speed must be >= 0")
    m = spec.mass_tonnes
    gamma = float(spec.tunnel_factor) if in_tunnel else 1.0
    drag_coeff = gamma * (0.046 + 0.065 * (spec.car_count - 1)) * spec.frontal_area_m2
    return 6.4 * m + 130.0 * spec.axle_count + 0.14 * m * speed_kmh + drag_coeff * speed_kmh**2


def gradient_force(spec: TrainSpec, segment: TrackSegment) -> float:
    """Grade resistance m*g*sin(theta) in Newtons; positive means uphill."""
    return spec.mass_kg * G_M_S2 * math.sin(segment.gradient_angle_rad)


def curve_force(spec: TrainSpec, segment: TrackSegment) -> float:
    """Curve resistance (ke / r) * 1e-3 * m * g in Newtons; 0 on straight track."""
    if not segment.has_curve:
        return 0.0
    return (segment.gauge_coefficient / segment.curve_radius_m) * 1e-3 * spec.mass_kg * G_M_S2


def envelope_force(env: ForceSpeedEnvelope, speed_kmh: float) -> float:
    """Available force at a given speed: flat then power-limited hyperbola."""
    if speed_kmh < 0:
        raise PhysicsError("speed must be >= 0")
    if speed_kmh <= env.base_speed_kmh:
        return env.base_force_n
    return env.max_power_w / (speed_kmh / 3.6)


def motion_resistance(spec: TrainSpec, segment: TrackSegment, speed_kmh: float) -> float:
    """Total passive resistance (running + grade + curve) in Newtons."""
    return (
        davis_resistance(spec, speed_kmh, in_tunnel=segment.is_tunnel)
        + gradient_force(spec, segment)
        + curve_force(spec, segment)
    )


def integrate_step(
    position_m: float,
    speed_ms: float,
    net_force_n: float,
    mass_kg: float,
    dt_s: float,
    max_speed_ms: float,
) -> tuple[float, float]:
    """One semi-implicit Euler step: speed first, then position with the new speed.

    Speed is clamped to [0, max_speed_ms]; a zero net force conserves
    speed exactly and advances position by v*dt.
    """
    accel = net_force_n / mass_kg
    new_speed = speed_ms + accel * dt_s
    if new_speed < 0.0:
        new_speed = 0.0
    elif new_speed > max_speed_ms:
        new_speed = max_speed_ms
    return position_m + new_speed * dt_s, new_speed


def step_motion(spec: TrainSpec, segment: TrackSegment, state: MotionState, dt_s: float) -> MotionState:
    """Advance a motion state by dt_s under its current control factors."""
    if dt_s <= 0:
        raise PhysicsError("dt_s must be > 0")
    v = state.speed_kmh
    net = (
        state.traction_factor * envelope_force(spec.traction_envelope, v)
        - state.braking_factor * envelope_force(spec.braking_envelope, v)
        - motion_resistance(spec, segment, v)
    )
    new_pos, new_speed_ms = integrate_step(
        state.position_m, v / 3.6, net, spec.mass_kg, dt_s, spec.max_speed_kmh / 3.6
    )
    return replace(state, position_m=new_pos, speed_kmh=new_speed_ms * 3.6)


def traction_power_w(state: MotionState, spec: TrainSpec) -> float:
    """Instantaneous mechanical power: positive tractive, negative regenerative."""
    v_ms = state.speed_kmh / 3.6
    if state.traction_factor > 0:
        return state.traction_factor * v_ms * envelope_force(spec.traction_envelope, state.speed_kmh)
    if state.braking_factor > 0:
        return -state.braking_factor * v_ms * envelope_force(spec.braking_envelope, state.speed_kmh)
    return 0.0


@dataclass(frozen=True)
class DutyStep:
    """One internal integration step of a duty-cycle simulation."""

    time_s: float
    stage: Stage
    speed_ms: float
    position_m: float
    power_w: float


def _braking_curve(
    spec: TrainSpec, segment: TrackSegment, dt_s: float, speed_cap_ms: float
) -> tuple[list[float], list[float]]:
    """Stopping-distance table built backward from a standstill at the segment end.

    Returns parallel (speeds_ms, distances_m) lists, increasing in both.
    """
    speeds = [0.0]
    dists = [0.0]
    v = 0.0
    d = 0.0
    guard = 0
    while v < speed_cap_ms:
        decel = (
            envelope_force(spec.braking_envelope, v * 3.6)
            + motion_resistance(spec, segment, v * 3.6)
        ) / spec.mass_kg
        if decel <= 1e-9:
            raise InfeasibleSegmentError(
                "braking force cannot overcome downgrade: train cannot stop on this segment"
            )
        v = v + decel * dt_s
        d = d + v * dt_s
        speeds.append(v)
        dists.append(d)
        guard += 1
        if guard > 1_000_000:
            raise InfeasibleSegmentError("braking curve failed to reach target speed")
    return speeds, dists


def _braking_distance(speeds: list[float], dists: list[float], v_ms: float) -> float:
    """Interpolated stopping distance for a given speed."""
    if v_ms <= 0.0:
        return 0.0
    if v_ms >= speeds[-1]:
        return dists[-1]
    lo, hi = 0, len(speeds) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if speeds[mid] <= v_ms:
            lo = mid
        else:
            hi = mid
    span = speeds[hi] - speeds[lo]
    frac = (v_ms - speeds[lo]) / span if span > 0 else 0.0
    return dists[lo] + frac * (dists[hi] - dists[lo])


def simulate_duty_cycle(
    spec: TrainSpec,
    segment: TrackSegment,
    internal_dt_s: float = 1.0,
    cruise_speed_fraction: float = 0.9,
    comfort_factor: float = 1.0,
) -> list[DutyStep]:
    """Simulate one segment traversal through all four duty-cycle stages.

    Stage switching: full acceleration until the cruise speed
    (cruise_speed_fraction * max speed) is reached; cruise at balance
    throttle; coasting begins at the last step from which coast-then-brake
    still stops inside the segment; full braking begins when the
    remaining distance falls to the stopping distance at current speed.

    The recorded power is the electrical draw: the drive runs at its
    power rating throughout full-throttle acceleration (peak demand from
    the first instant of departure), at mechanical balance power while
    cruising, zero while coasting and negative (regenerative) while
    braking.
    """
    if internal_dt_s <= 0:
        raise PhysicsError("internal_dt_s must be > 0")
    if not (0.0 < cruise_speed_fraction <= 1.0):
        raise PhysicsError("cruise_speed_fraction must lie in (0, 1]")
    if not (0.0 < comfort_factor <= 1.0):
        raise PhysicsError("comfort_factor must lie in (0, 1]")

    m_kg = spec.mass_kg
    length = segment.length_m
    v_max = spec.max_speed_kmh / 3.6
    v_cruise = cruise_speed_fraction * v_max

    start_margin = comfort_factor * envelope_force(spec.traction_envelope, 0.0) - motion_resistance(
        spec, segment, 0.0
    )
    if start_margin <= 0:
        raise InfeasibleSegmentError("traction does not exceed resistance at standstill")

    brake_speeds, brake_dists = _braking_curve(spec, segment, internal_dt_s, v_max)

    def resistance(v_ms: float) -> float:
        return motion_resistance(spec, segment, v_ms * 3.6)

    def advance(v_ms: float, x_m: float, alpha: float, beta: float) -> tuple[float, float]:
        net = (
            alpha * envelope_force(spec.traction_envelope, v_ms * 3.6)
            - beta * envelope_force(spec.braking_envelope, v_ms * 3.6)
            - resistance(v_ms)
        )
        x_new, v_new = integrate_step(x_m, v_ms, net, m_kg, internal_dt_s, v_max)
        return v_new, x_new

    steps: list[DutyStep] = []
    stage = Stage.MAX_ACCEL
    v = 0.0
    x = 0.0
    t = 0.0
    rated_power = comfort_factor * spec.traction_envelope.max_power_w
    max_steps = int(20 * length / max(v_cruise * internal_dt_s, 1e-6)) + 10_000

    while True:
        if len(steps) > max_steps:
            raise InfeasibleSegmentError("duty cycle failed to converge (stalled or too slow)")

        if stage in (Stage.MAX_ACCEL, Stage.CRUISE):
            # Latest admissible coast start: if one more powered step would
            # leave less room than braking distance plus one coast step,
            # begin coasting now.
            alpha_now = comfort_factor if stage is Stage.MAX_ACCEL else _balance_alpha(
                spec, resistance(v), v, comfort_factor
            )
            v_trial, x_trial = advance(v, x, alpha_now, 0.0)
            room_after = length - x_trial
            if room_after <= _braking_distance(brake_speeds, brake_dists, v_trial) + v_trial * internal_dt_s:
                stage = Stage.COAST

        if stage is Stage.COAST and length - x <= _braking_distance(brake_speeds, brake_dists, v):
            stage = Stage.MAX_BRAKE

        if stage is Stage.MAX_ACCEL:
            alpha, beta = comfort_factor, 0.0
        elif stage is Stage.CRUISE:
            alpha, beta = _balance_alpha(spec, resistance(v), v, comfort_factor), 0.0
        elif stage is Stage.COAST:
            alpha, beta = 0.0, 0.0
        else:
            alpha, beta = 0.0, 1.0

        v_new, x_new = advance(v, x, alpha, beta)

        if stage is Stage.MAX_ACCEL:
            power = rated_power
        elif stage is Stage.CRUISE:
            power = alpha * envelope_force(spec.traction_envelope, v * 3.6) * 0.5 * (v + v_new)
        elif stage is Stage.COAST:
            power = 0.0
        else:
            power = -beta * envelope_force(spec.braking_envelope, v * 3.6) * 0.5 * (v + v_new)

        t += internal_dt_s
        steps.append(DutyStep(time_s=t, stage=stage, speed_ms=v_new, position_m=x_new, power_w=power))

        if stage is Stage.MAX_BRAKE and v_new <= 0.0:
            break
        if stage is Stage.COAST and v_new <= 1e-6 and length - x_new > v_max * internal_dt_s:
            raise InfeasibleSegmentError("train stalled while coasting before the braking point")

        if stage is Stage.MAX_ACCEL and v_new >= v_cruise - 1e-12:
            stage = Stage.CRUISE
        v, x = v_new, x_new

    if abs(length - x) > max(v_max * internal_dt_s * 2.0, 1.0):
        raise InfeasibleSegmentError(
            f"traversal stopped {length - x:.1f} m short of the segment end"
        )
    return steps


def _balance_alpha(spec: TrainSpec, resistance_n: float, v_ms: float, comfort_factor: float) -> float:
    """Throttle that balances total resistance at the current speed, clamped."""
    avail = envelope_force(spec.traction_envelope, v_ms * 3.6)
    if resistance_n <= 0:
        return 0.0
    return min(comfort_factor, max(0.0, resistance_n / avail))


def generate_segment_profile(
    spec: TrainSpec,
    segment: TrackSegment,
    dt_s: float,
    internal_dt_s: float = 1.0,
    cruise_speed_fraction: float = 0.9,
    comfort_factor: float = 1.0,
) -> PowerProfile:
    """Generate the sampled power profile for one segment traversal.

    Runs the duty cycle on the fine internal grid and averages blocks of
    internal steps down to the requested dt.  The first sample is always
    the profile maximum (peak demand at departure) and braking samples
    form a single nonpositive suffix.
    """
    if dt_s <= 0:
        raise PhysicsError("dt_s must be > 0")
    # Snap the internal step so a tick is a whole number of internal steps.
    per_block = max(1, round(dt_s / min(internal_dt_s, dt_s)))
    inner = dt_s / per_block
    steps = simulate_duty_cycle(
        spec,
        segment,
        internal_dt_s=inner,
        cruise_speed_fraction=cruise_speed_fraction,
        comfort_factor=comfort_factor,
    )
    samples: list[float] = []
    for i in range(0, len(steps), per_block):
        block = steps[i : i + per_block]
        samples.append(sum(s.power_w for s in block) / len(block) / 1000.0)
    v_peak = max(s.speed_ms for s in steps)
    end_gap = abs(segment.length_m - steps[-1].position_m)
    if end_gap > max(dt_s * v_peak, 1.0):
        raise InfeasibleSegmentError(f"profile ends {end_gap:.1f} m away from the segment end")
    if samples[0] < max(samples):
        # Happens only when the acceleration phase cannot span even one
        # sample tick; such a segment is too short for this sampling.
        raise InfeasibleSegmentError(
            "segment too short for the sample interval: departure draw does not dominate"
        )
    return PowerProfile(dt_s=dt_s, samples_kw=tuple(samples))
