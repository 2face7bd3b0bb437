"""Controller behavior: PID law, level inversion, safety and staleness."""

from __future__ import annotations

import math

import pytest

from sepsim import control
from sepsim.control import (
    ControlConfig,
    GatewayCache,
    PidController,
    SafetyConfig,
    SeparatorController,
    alarm_eval,
    controller_cycle,
    level_from_dp,
    pid_step,
)
from sepsim.kernel import ConfigurationError
from sepsim.plant import PlantParams, RngStream, SensorSpec, TankGeometry, read_sensor


@pytest.fixture
def rig():
    params, geom = PlantParams(), TankGeometry()
    ctl = SeparatorController(
        PidController(kp=1.4, ti=80.0, integral_mode="gain", setpoint=40.0),
        PidController(kp=2.0, ti=40.0, setpoint=60.0),
        SafetyConfig(),
        ControlConfig(),
        params,
        geom,
    )
    return ctl, GatewayCache(), params, geom


class Reading:
    def __init__(self, sensor_id, value, time, static_pa=None):
        self.sensor_id = sensor_id
        self.value = value
        self.time = time
        self.static_pa = static_pa


def dp_for_level(pct: float, params: PlantParams, geom: TankGeometry) -> float:
    h = pct / 100.0 * geom.tank_height_m
    return 9.81 * (params.rho_water - params.rho_oil) * h


def p3_for_level(pct: float, params: PlantParams, geom: TankGeometry) -> float:
    h = pct / 100.0 * geom.tank_height_m
    return 9.81 * params.rho_oil * h


# -- pid law ---------------------------------------------------------------


def test_zero_error_zero_integral_gives_zero():
    pid = PidController(kp=2.0, ti=40.0, setpoint=50.0)
    assert pid_step(pid, 50.0, 1.0) == 0.0


def test_proportional_only_hand_value():
    # kp 2, integral disabled, e = +10: u = 20.
    pid = PidController(kp=2.0, ti=math.inf, setpoint=50.0)
    assert pid_step(pid, 60.0, 1.0) == pytest.approx(20.0)
    pid_zero_ti = PidController(kp=2.0, ti=0.0, setpoint=50.0)
    assert pid_step(pid_zero_ti, 60.0, 1.0) == pytest.approx(20.0)


def test_integral_matches_closed_form():
    # Constant e = +5 for 80 s at Ti = 80: integral term equals the
    # proportional term, u = 1.4 * (5 + 400/80) = 14.
    pid = PidController(kp=1.4, ti=80.0, setpoint=40.0)
    out = 0.0
    for _ in range(80):
        out = pid_step(pid, 45.0, 1.0)
    assert pid.integral_acc == pytest.approx(400.0)
    assert out == pytest.approx(14.0)


def test_gain_mode_formula():
    pid = PidController(kp=1.4, ti=80.0, integral_mode="gain", setpoint=40.0)
    out = pid_step(pid, 45.0, 1.0)
    # One step: acc = 5, u = 1.4*5 + 80*5 clamps at 100.
    assert out == 100.0
    assert pid.integral_acc == pytest.approx(5.0)


def test_direct_acting_sign():
    # Level below setpoint must not open the drain.
    pid = PidController(kp=2.0, ti=40.0, setpoint=60.0)
    assert pid_step(pid, 50.0, 1.0) == 0.0


def test_output_clamped_to_limits():
    pid = PidController(kp=2.0, ti=math.inf, setpoint=0.0)
    assert pid_step(pid, 90.0, 1.0) == 100.0


def test_anti_windup_freezes_integral_when_saturated():
    pid = PidController(kp=2.0, ti=10.0, setpoint=0.0)
    pid_step(pid, 80.0, 1.0)
    acc_at_saturation = pid.integral_acc
    for _ in range(50):
        pid_step(pid, 80.0, 1.0)
        assert pid.integral_acc == acc_at_saturation
    # Error shrinks: with no phantom charge to unwind, the output leaves
    # the rail in the very next step. Hand value: acc 0 -> 30 during the
    # step, u = 2 * (30 + 30/10) = 66.
    out = pid_step(pid, 30.0, 1.0)
    assert out == pytest.approx(66.0)
    assert pid.integral_acc > acc_at_saturation


def test_anti_windup_low_rail():
    pid = PidController(kp=2.0, ti=10.0, setpoint=60.0)
    pid_step(pid, 20.0, 1.0)
    acc = pid.integral_acc
    pid_step(pid, 20.0, 1.0)
    assert pid.integral_acc == acc


def test_non_finite_measurement_holds_last_output():
    pid = PidController(kp=2.0, ti=40.0, setpoint=40.0)
    pid_step(pid, 55.0, 1.0)
    held = pid.last_output
    assert pid_step(pid, float("nan"), 1.0) == held


def test_bad_integral_mode_rejected():
    with pytest.raises(ConfigurationError):
        PidController(kp=1.0, integral_mode="ramp")


# -- level conversion ------------------------------------------------------


def test_level_from_dp_hand_value():
    params, geom = PlantParams(), TankGeometry()
    # 408.096 Pa across the interface cell is a 0.2 m column: 40% of 0.5 m.
    assert level_from_dp(408.096, params, geom, "water") == pytest.approx(40.0, abs=1e-9)


def test_level_from_dp_clamps_negative():
    assert level_from_dp(-5.0, PlantParams(), TankGeometry(), "water") == 0.0


def test_level_from_dp_unknown_column():
    with pytest.raises(ConfigurationError):
        level_from_dp(100.0, PlantParams(), TankGeometry(), "mixture")


@pytest.mark.parametrize("which,level", [("water", 17.0), ("water", 63.2), ("oil", 44.4)])
def test_hydrostatic_round_trip(which, level):
    # level -> noiseless sensor -> level reproduces the input within 1e-9.
    params, geom = PlantParams(), TankGeometry()
    from sepsim.plant import PlantState

    state = PlantState(pump_running=False)
    if which == "water":
        state.left_water_l = level / 100.0 * geom.tank_height_m * geom.left_area_m2 * 1000.0
        sensor = "P2"
    else:
        state.right_oil_l = level / 100.0 * geom.tank_height_m * geom.right_area_m2 * 1000.0
        sensor = "P3"
    reading = read_sensor(
        state, SensorSpec(sensor, noise_std=0.0), geom, params, RngStream(0, "sensor-noise"), 0.0
    )
    assert level_from_dp(reading.value, params, geom, which) == pytest.approx(level, abs=1e-9)


def test_left_total_reconstruction():
    params, geom = PlantParams(), TankGeometry()
    # 0.15 m water under 0.10 m oil: total 50% of the 0.5 m tank.
    dp = 9.81 * (998.0 - 790.0) * 0.15
    static = 9.81 * (998.0 * 0.15 + 790.0 * 0.10)
    total = control.left_total_from_p2(dp, static, params, geom)
    assert total == pytest.approx(50.0, abs=1e-9)


# -- gateway cache ---------------------------------------------------------


def test_cache_keeps_newest_by_origin_time():
    cache = GatewayCache()
    assert cache.update(Reading("P2", 1.0, 10.0), 10.5)
    assert not cache.update(Reading("P2", 2.0, 9.0), 11.0)   # stale origin dropped
    assert cache.get("P2").value == 1.0
    assert cache.update(Reading("P2", 3.0, 12.0), 12.5)
    assert cache.get("P2").value == 3.0


# -- safety and cycles -----------------------------------------------------


def test_cycle_with_fresh_data_commands_both_drains(rig):
    ctl, cache, params, geom = rig
    cache.update(Reading("P2", dp_for_level(45.0, params, geom), 9.5), 9.6)
    cache.update(Reading("P3", p3_for_level(65.0, params, geom), 9.5), 9.6)
    res = controller_cycle(ctl, cache, 10.0)
    assert res.lv1_cmd is not None and res.lv1_cmd > 0.0
    assert res.lv2_cmd is not None and res.lv2_cmd > 0.0
    assert not res.tripped


def test_water_level_at_81_trips_within_the_cycle(rig):
    ctl, cache, params, geom = rig
    cache.update(Reading("P2", dp_for_level(81.0, params, geom), 9.5), 9.6)
    res = controller_cycle(ctl, cache, 10.0)
    assert res.stop_pump
    assert res.tripped
    assert ctl.safety.latched
    assert ctl.safety.trip_reason == "water level high"


def test_left_total_trip_via_secondary_pressure(rig):
    ctl, cache, params, geom = rig
    # Water at 40% with enough oil on top to stand at 85% total.
    dp = dp_for_level(40.0, params, geom)
    h_w = 0.40 * geom.tank_height_m
    h_o = 0.45 * geom.tank_height_m
    static = 9.81 * (998.0 * h_w + 790.0 * h_o)
    cache.update(Reading("P2", dp, 9.5, static_pa=static), 9.6)
    res = controller_cycle(ctl, cache, 10.0)
    assert res.tripped
    assert ctl.safety.trip_reason == "left section level high"


def test_latch_holds_until_reset(rig):
    ctl, cache, params, geom = rig
    cache.update(Reading("P3", p3_for_level(82.0, params, geom), 9.5), 9.6)
    assert controller_cycle(ctl, cache, 10.0).tripped
    # Level recovers; the latch must not.
    cache.update(Reading("P3", p3_for_level(50.0, params, geom), 10.5), 10.6)
    res = controller_cycle(ctl, cache, 11.0)
    assert res.stop_pump
    assert not res.tripped          # edge reported once
    assert ctl.safety.latched
    assert res.lv1_cmd is None and res.lv2_cmd is None


def test_stale_data_holds_loop_and_alarms_once(rig):
    ctl, cache, params, geom = rig
    cache.update(Reading("P2", dp_for_level(45.0, params, geom), 2.0), 2.1)
    cache.update(Reading("P3", p3_for_level(60.0, params, geom), 9.5), 9.6)
    res = controller_cycle(ctl, cache, 10.0)     # P2 8 s old, threshold 5 s
    assert res.lv1_cmd is None
    assert res.lv2_cmd is not None                # fresh loop keeps running
    assert [a.kind for a in res.alarms] == ["stale-data"]
    cache.update(Reading("P3", p3_for_level(60.0, params, geom), 10.5), 10.6)
    res = controller_cycle(ctl, cache, 11.0)
    assert res.alarms == []                       # one alarm per episode
    cache.update(Reading("P2", dp_for_level(45.0, params, geom), 11.5), 11.6)
    cache.update(Reading("P3", p3_for_level(60.0, params, geom), 11.5), 11.6)
    res = controller_cycle(ctl, cache, 12.0)
    assert res.lv1_cmd is not None                # loop resumes on fresh data


def test_overpressure_and_overtemperature_alarms(rig):
    ctl, cache, _, _ = rig
    cache.update(Reading("P1", 500.0, 9.5), 9.6)
    cache.update(Reading("T", 75.0, 9.5), 9.6)
    alarms = alarm_eval(ctl, cache, 10.0)
    assert {a.kind for a in alarms} == {"overpressure", "overtemperature"}
    assert ctl.safety.latched
    # Latch is idempotent: the first trip reason sticks.
    assert ctl.safety.trip_reason == "overpressure"
    # Conditions persist: no new rising-edge events.
    assert alarm_eval(ctl, cache, 11.0) == []


def test_nominal_readings_raise_nothing(rig):
    ctl, cache, params, geom = rig
    cache.update(Reading("P1", 180.0, 9.5), 9.6)
    cache.update(Reading("T", 22.0, 9.5), 9.6)
    cache.update(Reading("P2", dp_for_level(40.0, params, geom), 9.5), 9.6)
    cache.update(Reading("P3", p3_for_level(60.0, params, geom), 9.5), 9.6)
    assert alarm_eval(ctl, cache, 10.0) == []
    assert not ctl.safety.latched
