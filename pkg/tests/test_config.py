import pytest

from railpeak.config import ConfigError, dump_scenario, load_scenario, load_scenario_text
from railpeak.engine import Policy, ProfileMode, Scenario


def test_empty_config_yields_full_defaults(tmp_path):
    path = tmp_path / "empty.ini"
    path.write_text("")
    scenario = load_scenario(str(path))
    assert scenario == Scenario()
    assert scenario.dispatch_headway_s == 360.0
    assert scenario.dwell_time_s == 60.0
    assert scenario.tick_s == 10.0
    assert scenario.scheduler.w1 == 3.0
    assert scenario.scheduler.w2 == 5.0
    assert scenario.scheduler.gamma1_value == 20.0
    assert scenario.scheduler.gamma2_per_new_train == 1.0


def test_missing_file_is_an_error():
    with pytest.raises(ConfigError, match="cannot read"):
        load_scenario("/nonexistent/scenario.ini")


def test_zero_tick_names_the_key():
    with pytest.raises(ConfigError, match="tick_s"):
        load_scenario_text("[scenario]\ntick_s = 0\n")


def test_dwell_vs_tick_violation_reported():
    with pytest.raises(ConfigError, match="dwell_time_s"):
        load_scenario_text("[scenario]\ndwell_time_s = 5\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="scenario.bogus"):
        load_scenario_text("[scenario]\nbogus = 1\n")


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="mystery"):
        load_scenario_text("[mystery]\nx = 1\n")


def test_unparseable_number_names_the_key():
    with pytest.raises(ConfigError, match="scheduler.w1"):
        load_scenario_text("[scheduler]\nw1 = fast\n")


def test_scalar_overrides():
    scenario = load_scenario_text(
        "[scenario]\n"
        "dispatch_headway_s = 720\n"
        "sim_duration_s = 10000\n"
        "policy = pres\n"
        "[scheduler]\n"
        "p_threshold_kw = 50000\n"
        "w1 = 4\n"
    )
    assert scenario.dispatch_headway_s == 720.0
    assert scenario.sim_duration_s == 10000.0
    assert scenario.policy is Policy.PRES
    assert scenario.scheduler.p_threshold_kw == 50000.0
    assert scenario.scheduler.w1 == 4.0
    assert scenario.scheduler.h_min_s == 180.0  # inherited from scenario defaults


def test_profile_override_and_sign_validation():
    scenario = load_scenario_text(
        "[scenario]\nper_train_profile_kw = 5000,2000,0,-1000\n"
    )
    assert scenario.per_train_profile_kw == (5000.0, 2000.0, 0.0, -1000.0)
    with pytest.raises(ConfigError):
        load_scenario_text("[scenario]\nper_train_profile_kw = 5000,-1000,2000\n")


def test_physics_mode_with_train_block():
    scenario = load_scenario_text(
        "[scenario]\n"
        "profile_mode = physics\n"
        "[train]\n"
        "mass_tonnes = 250\n"
        "[train.traction_envelope]\n"
        "base_force_n = 180000\n"
        "base_speed_kmh = 40\n"
        "[segments.up]\n"
        "lengths_m = 3000,1900,2500\n"
        "gradients_rad = 0.001,0,-0.001\n"
    )
    assert scenario.profile_mode is ProfileMode.PHYSICS
    assert scenario.train.mass_tonnes == 250.0
    assert scenario.train.traction_envelope.base_force_n == 180_000.0
    assert scenario.up_segments[0].length_m == 3000.0
    assert scenario.up_segments[0].gradient_angle_rad == 0.001
    assert scenario.up_segments[2].nominal_travel_time_s == 150.0
    assert scenario.down_segments is not None


def test_physics_defaults_filled_without_blocks():
    scenario = load_scenario_text("[scenario]\nprofile_mode = physics\n")
    assert scenario.train is not None
    assert len(scenario.up_segments) == 3


def test_segment_count_mismatch_reported():
    with pytest.raises(ConfigError, match="segments.up.lengths_m"):
        load_scenario_text(
            "[scenario]\nprofile_mode = physics\n[segments.up]\nlengths_m = 3000,1900\n"
        )


def test_bad_policy_value():
    with pytest.raises(ConfigError, match="policy"):
        load_scenario_text("[scenario]\npolicy = chaotic\n")


def test_dump_load_round_trip_default():
    scenario = Scenario()
    assert load_scenario_text(dump_scenario(scenario)) == scenario


def test_dump_load_round_trip_physics():
    scenario = load_scenario_text(
        "[scenario]\nprofile_mode = physics\n[train]\nmass_tonnes = 280\n"
    )
    assert load_scenario_text(dump_scenario(scenario)) == scenario


def test_comments_and_blank_lines_ignored():
    scenario = load_scenario_text(
        "; comment\n\n[scenario]\ntick_s = 10  ; inline comment\n"
    )
    assert scenario.tick_s == 10.0
