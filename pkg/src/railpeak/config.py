"""Scenario configuration files.

INI-style sections; every key optional, defaults give the standard
corridor.  Example with every section present:

    [scenario]
    stations = A,B,C,D
    up_segment_times_s = 180,120,150
    down_segment_times_s = 150,120,180
    out_of_range_time_s = 1080
    out_of_range_jitter_s = 30
    dispatch_headway_s = 360
    min_headway_s = 180
    dwell_time_s = 60
    tick_s = 10
    sim_duration_s = 20000
    profile_mode = fixed_profile
    per_train_profile_kw = 10000,8000,8000,2000,2000,3000,2000,2000,2000,0,-6000,-8000,-4000
    policy = fixed
    rng_seed = 3

    [scheduler]
    w1 = 3
    w2 = 5
    gamma1 = 20
    gamma2_per_new_train = 1
    p_threshold_kw = 20000
    ; the minimum headway and tick are taken from [scenario]

    [train]                      ; physics mode only
    mass_tonnes = 300
    axle_count = 16
    car_count = 4
    frontal_area_m2 = 10
    tunnel_factor = 2
    max_speed_kmh = 80

    [train.traction_envelope]
    base_force_n = 200000
    base_speed_kmh = 36

    [train.braking_envelope]
    base_force_n = 150000
    base_speed_kmh = 36

    [segments.up]                ; physics mode only, one entry per segment
    lengths_m = 2800,1600,2200
    gradients_rad = 0,0,0
    curve_radii_m = 0,0,0        ; 0 = straight
    gauge_coefficients = 750,750,750
    tunnels = false,false,false

    [segments.down]
    lengths_m = 2200,1600,2800

Validation failures name the offending key (section.key).
"""

from __future__ import annotations

import configparser
import io

from .engine import Policy, ProfileMode, Scenario, ScenarioError, default_segments
from .physics import ForceSpeedEnvelope, TrackSegment, TrainSpec
from .scheduling import SchedulerParams


class ConfigError(ValueError):
    """Bad configuration file; message names the offending key."""


_SCENARIO_SCALARS = {
    "out_of_range_time_s": float,
    "out_of_range_jitter_s": float,
    "dispatch_headway_s": float,
    "min_headway_s": float,
    "dwell_time_s": float,
    "tick_s": float,
    "sim_duration_s": float,
    "rng_seed": int,
}

_SCHEDULER_KEYS = {
    "w1": "w1",
    "w2": "w2",
    "gamma1": "gamma1_value",
    "gamma2_per_new_train": "gamma2_per_new_train",
    "p_threshold_kw": "p_threshold_kw",
}

_TRAIN_SCALARS = {
    "mass_tonnes": float,
    "axle_count": int,
    "car_count": int,
    "frontal_area_m2": float,
    "tunnel_factor": int,
    "max_speed_kmh": float,
}


def _parse_value(section: str, key: str, raw: str, cast):
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r}") from None


def _parse_list(section: str, key: str, raw: str, cast) -> tuple:
    items = [item.strip() for item in raw.split(",") if item.strip()]
    return tuple(_parse_value(section, key, item, cast) for item in items)


def _parse_bool(section: str, key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{section}.{key}: cannot parse {raw!r} as a boolean")


def _read_ini(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"cannot parse configuration: {err}") from None
    return parser


def _known_keys_check(parser: configparser.ConfigParser) -> None:
    known = {
        "scenario": set(_SCENARIO_SCALARS)
        | {
            "stations",
            "up_segment_times_s",
            "down_segment_times_s",
            "per_train_profile_kw",
            "profile_mode",
            "policy",
        },
        "scheduler": set(_SCHEDULER_KEYS),
        "train": set(_TRAIN_SCALARS),
        "train.traction_envelope": {"base_force_n", "base_speed_kmh", "max_power_w"},
        "train.braking_envelope": {"base_force_n", "base_speed_kmh", "max_power_w"},
        "segments.up": {"lengths_m", "gradients_rad", "curve_radii_m", "gauge_coefficients", "tunnels"},
        "segments.down": {"lengths_m", "gradients_rad", "curve_radii_m", "gauge_coefficients", "tunnels"},
    }
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in known[section]:
                raise ConfigError(f"{section}.{key}: unknown key")


def _envelope_from(parser, section: str, default: ForceSpeedEnvelope) -> ForceSpeedEnvelope:
    if not parser.has_section(section):
        return default
    sec = parser[section]
    force = _parse_value(section, "base_force_n", sec.get("base_force_n", repr(default.base_force_n)), float)
    corner = _parse_value(
        section, "base_speed_kmh", sec.get("base_speed_kmh", repr(default.base_speed_kmh)), float
    )
    if "max_power_w" in sec:
        power = _parse_value(section, "max_power_w", sec["max_power_w"], float)
        return ForceSpeedEnvelope(force, corner, power)
    return ForceSpeedEnvelope.from_force_and_corner(force, corner)


def _segments_from(parser, section: str, times: tuple[float, ...]) -> tuple[TrackSegment, ...]:
    defaults = default_segments(times)
    if not parser.has_section(section):
        return defaults
    sec = parser[section]
    n = len(times)

    def list_or(key: str, cast, fallback: tuple) -> tuple:
        if key not in sec:
            return fallback
        values = _parse_list(section, key, sec[key], cast)
        if len(values) != n:
            raise ConfigError(f"{section}.{key}: expected {n} entries, got {len(values)}")
        return values

    lengths = list_or("lengths_m", float, tuple(s.length_m for s in defaults))
    gradients = list_or("gradients_rad", float, tuple(s.gradient_angle_rad for s in defaults))
    radii = list_or("curve_radii_m", float, tuple(s.curve_radius_m for s in defaults))
    gauges = list_or("gauge_coefficients", float, tuple(s.gauge_coefficient for s in defaults))
    if "tunnels" in sec:
        raw_items = [item.strip() for item in sec["tunnels"].split(",") if item.strip()]
        if len(raw_items) != n:
            raise ConfigError(f"{section}.tunnels: expected {n} entries, got {len(raw_items)}")
        tunnels = tuple(_parse_bool(section, "tunnels", item) for item in raw_items)
    else:
        tunnels = tuple(s.is_tunnel for s in defaults)
    try:
        return tuple(
            TrackSegment(
                length_m=lengths[i],
                gradient_angle_rad=gradients[i],
                curve_radius_m=radii[i],
                gauge_coefficient=gauges[i],
                is_tunnel=tunnels[i],
                nominal_travel_time_s=times[i],
            )
            for i in range(n)
        )
    except ValueError as err:
        raise ConfigError(f"{section}: {err}") from None


def load_scenario_text(text: str) -> Scenario:
    """Parse configuration text into a validated Scenario."""
    parser = _read_ini(text)
    _known_keys_check(parser)
    kwargs = {}

    if parser.has_section("scenario"):
        sec = parser["scenario"]
        if "stations" in sec:
            kwargs["stations"] = tuple(s.strip() for s in sec["stations"].split(",") if s.strip())
        for key in ("up_segment_times_s", "down_segment_times_s"):
            if key in sec:
                kwargs[key] = _parse_list("scenario", key, sec[key], float)
        if "per_train_profile_kw" in sec:
            kwargs["per_train_profile_kw"] = _parse_list(
                "scenario", "per_train_profile_kw", sec["per_train_profile_kw"], float
            )
        for key, cast in _SCENARIO_SCALARS.items():
            if key in sec:
                kwargs[key] = _parse_value("scenario", key, sec[key], cast)
        if "profile_mode" in sec:
            try:
                kwargs["profile_mode"] = ProfileMode(sec["profile_mode"].strip())
            except ValueError:
                raise ConfigError(
                    f"scenario.profile_mode: expected fixed_profile or physics, got {sec['profile_mode']!r}"
                ) from None
        if "policy" in sec:
            try:
                kwargs["policy"] = Policy(sec["policy"].strip())
            except ValueError:
                raise ConfigError(
                    f"scenario.policy: expected fixed or pres, got {sec['policy']!r}"
                ) from None

    tick = kwargs.get("tick_s", Scenario.tick_s)
    h_min = kwargs.get("min_headway_s", Scenario.min_headway_s)
    if tick <= 0:
        raise ConfigError("scenario.tick_s: must be > 0")
    if h_min <= 0:
        raise ConfigError("scenario.min_headway_s: must be > 0")
    sched_kwargs = {"dt_s": tick, "h_min_s": h_min}
    if parser.has_section("scheduler"):
        sec = parser["scheduler"]
        for key, attr in _SCHEDULER_KEYS.items():
            if key in sec:
                sched_kwargs[attr] = _parse_value("scheduler", key, sec[key], float)
    try:
        kwargs["scheduler"] = SchedulerParams(**sched_kwargs)
    except ValueError as err:
        raise ConfigError(f"scheduler: {err}") from None

    mode = kwargs.get("profile_mode", Scenario.profile_mode)
    if mode is ProfileMode.PHYSICS or parser.has_section("train"):
        spec_kwargs = {}
        if parser.has_section("train"):
            sec = parser["train"]
            for key, cast in _TRAIN_SCALARS.items():
                if key in sec:
                    spec_kwargs[key] = _parse_value("train", key, sec[key], cast)
        from .engine import default_train_spec

        base = default_train_spec()
        try:
            kwargs["train"] = TrainSpec(
                mass_tonnes=spec_kwargs.get("mass_tonnes", base.mass_tonnes),
                axle_count=spec_kwargs.get("axle_count", base.axle_count),
                car_count=spec_kwargs.get("car_count", base.car_count),
                frontal_area_m2=spec_kwargs.get("frontal_area_m2", base.frontal_area_m2),
                tunnel_factor=spec_kwargs.get("tunnel_factor", base.tunnel_factor),
                traction_envelope=_envelope_from(
                    parser, "train.traction_envelope", base.traction_envelope
                ),
                braking_envelope=_envelope_from(
                    parser, "train.braking_envelope", base.braking_envelope
                ),
                max_speed_kmh=spec_kwargs.get("max_speed_kmh", base.max_speed_kmh),
            )
        except ValueError as err:
            raise ConfigError(f"train: {err}") from None
        up_times = kwargs.get("up_segment_times_s", Scenario.up_segment_times_s)
        down_times = kwargs.get("down_segment_times_s", Scenario.down_segment_times_s)
        kwargs["up_segments"] = _segments_from(parser, "segments.up", up_times)
        kwargs["down_segments"] = _segments_from(parser, "segments.down", down_times)

    try:
        return Scenario(**kwargs)
    except (ScenarioError, ValueError) as err:
        raise ConfigError(str(err)) from None


def load_scenario(path: str) -> Scenario:
    """Load a scenario file; omitted keys fall back to the defaults."""
    try:
        with open(path, "r") as handle:
            text = handle.read()
    except OSError as err:
        raise ConfigError(f"cannot read scenario file {path}: {err}") from None
    return load_scenario_text(text)


def dump_scenario(scenario: Scenario) -> str:
    """Render a scenario back to configuration text (load round-trips)."""
    out = io.StringIO()
    out.write("[scenario]\n")
    out.write(f"stations = {','.join(scenario.stations)}\n")
    out.write(f"up_segment_times_s = {_join(scenario.up_segment_times_s)}\n")
    out.write(f"down_segment_times_s = {_join(scenario.down_segment_times_s)}\n")
    for key in _SCENARIO_SCALARS:
        out.write(f"{key} = {_plain(getattr(scenario, key))}\n")
    out.write(f"per_train_profile_kw = {_join(scenario.per_train_profile_kw)}\n")
    out.write(f"profile_mode = {scenario.profile_mode.value}\n")
    out.write(f"policy = {scenario.policy.value}\n")

    sched = scenario.scheduler
    out.write("\n[scheduler]\n")
    out.write(f"w1 = {_plain(sched.w1)}\n")
    out.write(f"w2 = {_plain(sched.w2)}\n")
    out.write(f"gamma1 = {_plain(sched.gamma1_value)}\n")
    out.write(f"gamma2_per_new_train = {_plain(sched.gamma2_per_new_train)}\n")
    out.write(f"p_threshold_kw = {_plain(sched.p_threshold_kw)}\n")

    if scenario.train is not None:
        spec = scenario.train
        out.write("\n[train]\n")
        for key in _TRAIN_SCALARS:
            out.write(f"{key} = {_plain(getattr(spec, key))}\n")
        for name, env in (
            ("train.traction_envelope", spec.traction_envelope),
            ("train.braking_envelope", spec.braking_envelope),
        ):
            out.write(f"\n[{name}]\n")
            out.write(f"base_force_n = {_plain(env.base_force_n)}\n")
            out.write(f"base_speed_kmh = {_plain(env.base_speed_kmh)}\n")
            out.write(f"max_power_w = {_plain(env.max_power_w)}\n")
    if scenario.up_segments is not None:
        for name, segs in (("segments.up", scenario.up_segments), ("segments.down", scenario.down_segments)):
            out.write(f"\n[{name}]\n")
            out.write(f"lengths_m = {_join(s.length_m for s in segs)}\n")
            out.write(f"gradients_rad = {_join(s.gradient_angle_rad for s in segs)}\n")
            out.write(f"curve_radii_m = {_join(s.curve_radius_m for s in segs)}\n")
            out.write(f"gauge_coefficients = {_join(s.gauge_coefficient for s in segs)}\n")
            out.write(f"tunnels = {','.join('true' if s.is_tunnel else 'false' for s in segs)}\n")
    return out.getvalue()


def _plain(value) -> str:
    if isinstance(value, float) and value == int(value):
        return str(int(value))
    return repr(value) if isinstance(value, float) else str(value)


def _join(values) -> str:
    return ",".join(_plain(v) for v in values)
