"""Shared builders for physics-level tests."""

import random

from railpeak.physics import (
    NO_CURVE,
    ForceSpeedEnvelope,
    PowerProfile,
    TrackSegment,
    TrainSpec,
)


def metro_spec(**overrides) -> TrainSpec:
    kwargs = dict(
        mass_tonnes=300.0,
        axle_count=16,
        car_count=4,
        frontal_area_m2=10.0,
        tunnel_factor=2,
        traction_envelope=ForceSpeedEnvelope.from_force_and_corner(200_000.0, 36.0),
        braking_envelope=ForceSpeedEnvelope.from_force_and_corner(150_000.0, 36.0),
        max_speed_kmh=80.0,
    )
    kwargs.update(overrides)
    return TrainSpec(**kwargs)


def flat_segment(length_m=2500.0, **overrides) -> TrackSegment:
    kwargs = dict(length_m=length_m, nominal_travel_time_s=180.0)
    kwargs.update(overrides)
    return TrackSegment(**kwargs)


def random_spec_and_segment(rng: random.Random) -> tuple[TrainSpec, TrackSegment]:
    mass = rng.uniform(150, 450)
    accel = rng.uniform(0.6, 1.1)
    corner = rng.uniform(30, 45)
    spec = TrainSpec(
        mass_tonnes=mass,
        axle_count=rng.choice([8, 12, 16, 24]),
        car_count=rng.randint(2, 6),
        frontal_area_m2=rng.uniform(8, 12),
        tunnel_factor=rng.choice([1, 2]),
        traction_envelope=ForceSpeedEnvelope.from_force_and_corner(mass * 1000 * accel, corner),
        braking_envelope=ForceSpeedEnvelope.from_force_and_corner(
            mass * 1000 * rng.uniform(0.7, 1.2), corner
        ),
        max_speed_kmh=rng.uniform(65, 95),
    )
    segment = TrackSegment(
        length_m=rng.uniform(1500, 4000),
        gradient_angle_rad=rng.uniform(-0.004, 0.004),
        curve_radius_m=rng.choice([NO_CURVE, rng.uniform(400, 2000)]),
        gauge_coefficient=750.0,
        is_tunnel=rng.random() < 0.3,
        nominal_travel_time_s=180.0,
    )
    return spec, segment


def assert_profile_shape(profile: PowerProfile) -> None:
    samples = profile.samples_kw
    assert samples[0] == max(samples)
    negatives = [i for i, s in enumerate(samples) if s < 0]
    assert negatives, "duty cycle must end with a braking (regenerative) phase"
    assert negatives == list(range(negatives[0], len(samples))), "negative samples must be a suffix"
    for s in samples[: negatives[0]]:
        assert s >= 0
