"""Level control: twin PID loops, safety interlock and the gateway cache.

The water loop maps the P2 differential pressure to the left-section water
level and commands LV1; the oil loop maps P3 to the right-section oil level
and commands LV2. Both are direct acting: a level above its setpoint opens
the drain further. Safety is evaluated before control on every cycle and a
trip latches until an operator reset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .kernel import ConfigurationError
from .plant import GRAVITY, PlantParams, TankGeometry


@dataclass
class PidController:
    """Discrete PID in the industrial series form.

    With integral_mode "time", ti is an integral time in seconds and the
    output is kp * (e + integral/ti); ti of zero or infinity disables the
    integral term. With integral_mode "gain", the configured value acts as
    an integral gain and the output is kp * e + ti * integral. The
    derivative gain is carried for completeness but the term is not formed.
    Anti-windup is by conditional integration: the accumulator freezes
    whenever the unclamped output is already beyond a limit in the
    direction the error is pushing.
    """

    kp: float
    ti: float = 0.0
    kd: float = 0.0
    setpoint: float = 0.0
    integral_mode: str = "time"
    out_min: float = 0.0
    out_max: float = 100.0
    integral_acc: float = 0.0
    last_output: float = 0.0

    def __post_init__(self):
        if self.integral_mode not in ("time", "gain"):
            raise ConfigurationError(f"integral_mode must be 'time' or 'gain', got {self.integral_mode!r}")

    def _unclamped(self, error: float, acc: float) -> float:
        if self.integral_mode == "gain":
            return self.kp * error + self.ti * acc
        if self.ti == 0.0 or math.isinf(self.ti):
            return self.kp * error
        return self.kp * (error + acc / self.ti)


def pid_step(pid: PidController, measurement: float, dt: float) -> float:
    """One controller evaluation against the current measurement.

    The integral update is skipped while the output already stands beyond
    a limit in the direction the error is pushing, so the accumulator
    never winds into saturation. A non-finite measurement holds the last
    output; the caller is expected to raise a data-quality alarm.
    """
    if not math.isfinite(measurement):
        return pid.last_output
    error = measurement - pid.setpoint
    u = pid._unclamped(error, pid.integral_acc)
    if not ((u > pid.out_max and error > 0.0) or (u < pid.out_min and error < 0.0)):
        pid.integral_acc += error * dt
        u = pid._unclamped(error, pid.integral_acc)
    out = min(max(u, pid.out_min), pid.out_max)
    pid.last_output = out
    return out


def level_from_dp(pressure_pa: float, params: PlantParams, geom: TankGeometry, which: str) -> float:
    """Invert the hydrostatic relation back to a level in percent.

    'water' undoes the interface DP cell (density difference column),
    'oil' undoes a plain single-fluid head. Negative pressures clamp to 0.
    """
    if which == "water":
        h = pressure_pa / (GRAVITY * (params.rho_water - params.rho_oil))
    elif which == "oil":
        h = pressure_pa / (GRAVITY * params.rho_oil)
    else:
        raise ConfigurationError(f"unknown column selector: {which!r}")
    if h < 0.0:
        h = 0.0
    return 100.0 * h / geom.tank_height_m


def left_total_from_p2(dp_pa: float, static_pa: float, params: PlantParams, geom: TankGeometry) -> float:
    """Total left-section level (percent) from the P2 primary and secondary.

    The water column comes from the interface DP; the remaining bottom
    pressure is attributed to oil. The mixture band is slightly denser than
    oil, so this errs a little high, which is the safe direction for the
    high-level trip.
    """
    h_w = max(dp_pa, 0.0) / (GRAVITY * (params.rho_water - params.rho_oil))
    rest = static_pa - params.rho_water * GRAVITY * h_w
    h_above = max(rest, 0.0) / (GRAVITY * params.rho_oil)
    return 100.0 * (h_w + h_above) / geom.tank_height_m


@dataclass(frozen=True)
class AlarmEvent:
    time: float
    kind: str
    message: str


@dataclass
class SafetyConfig:
    """Trip thresholds and the latch they set."""

    level_trip_pct: float = 80.0
    feed_pressure_trip_kpa: float = 400.0
    oil_temp_trip_c: float = 60.0
    latched: bool = False
    trip_time: float | None = None
    trip_reason: str | None = None

    def trip(self, now: float, reason: str) -> None:
        if not self.latched:
            self.latched = True
            self.trip_time = now
            self.trip_reason = reason


@dataclass
class CacheEntry:
    value: float
    origin_time: float
    arrival_time: float
    static_pa: float | None = None


class GatewayCache:
    """Most recent reading per sensor, as delivered by the mesh.

    Out-of-order deliveries are dropped by origin timestamp so the cache
    never goes backwards in time.
    """

    def __init__(self):
        self.entries: dict[str, CacheEntry] = {}

    def update(self, reading, arrival_time: float) -> bool:
        cur = self.entries.get(reading.sensor_id)
        if cur is not None and reading.time < cur.origin_time:
            return False
        self.entries[reading.sensor_id] = CacheEntry(
            reading.value, reading.time, arrival_time, reading.static_pa
        )
        return True

    def get(self, sensor_id: str) -> CacheEntry | None:
        return self.entries.get(sensor_id)


@dataclass
class ControlConfig:
    period_s: float = 1.0
    staleness_s: float = 5.0


@dataclass
class CycleResult:
    lv1_cmd: float | None = None
    lv2_cmd: float | None = None
    stop_pump: bool = False
    tripped: bool = False
    alarms: list[AlarmEvent] = field(default_factory=list)


class SeparatorController:
    """The gateway-side control task: safety first, then the two loops."""

    def __init__(
        self,
        water_pid: PidController,
        oil_pid: PidController,
        safety: SafetyConfig,
        cfg: ControlConfig,
        params: PlantParams,
        geom: TankGeometry,
    ):
        self.water_pid = water_pid
        self.oil_pid = oil_pid
        self.safety = safety
        self.cfg = cfg
        self.params = params
        self.geom = geom
        self._stale = {"P2": False, "P3": False}
        self._active: set[str] = set()

    def _fresh(self, entry: CacheEntry | None, now: float) -> bool:
        return entry is not None and (now - entry.origin_time) <= self.cfg.staleness_s


def alarm_eval(ctl: SeparatorController, cache: GatewayCache, now: float) -> list[AlarmEvent]:
    """Threshold checks on the cached values. Trips latch the safety block.

    Alarm events fire on the rising edge of each condition; the trip call
    itself is idempotent while the latch is set.
    """
    alarms: list[AlarmEvent] = []

    def check(key: str, kind: str, cond: bool, message: str, trip_reason: str | None) -> None:
        if cond:
            if key not in ctl._active:
                ctl._active.add(key)
                alarms.append(AlarmEvent(now, kind, message))
            if trip_reason is not None:
                ctl.safety.trip(now, trip_reason)
        else:
            ctl._active.discard(key)

    trip_pct = ctl.safety.level_trip_pct
    p1 = cache.get("P1")
    if p1 is not None:
        check(
            "overpressure", "overpressure",
            p1.value > ctl.safety.feed_pressure_trip_kpa,
            f"feed line at {p1.value:.0f} kPa", "overpressure",
        )
    t = cache.get("T")
    if t is not None:
        check(
            "overtemperature", "overtemperature",
            t.value > ctl.safety.oil_temp_trip_c,
            f"oil at {t.value:.1f} C", "overtemperature",
        )
    p2 = cache.get("P2")
    if p2 is not None:
        water = level_from_dp(p2.value, ctl.params, ctl.geom, "water")
        check(
            "level-high:water", "level-high", water >= trip_pct,
            f"water level {water:.1f}%", "water level high",
        )
        if p2.static_pa is not None:
            total = left_total_from_p2(p2.value, p2.static_pa, ctl.params, ctl.geom)
            check(
                "level-high:left-total", "level-high", total >= trip_pct,
                f"left section at {total:.1f}%", "left section level high",
            )
    p3 = cache.get("P3")
    if p3 is not None:
        oil = level_from_dp(p3.value, ctl.params, ctl.geom, "oil")
        check(
            "level-high:oil", "level-high", oil >= trip_pct,
            f"oil level {oil:.1f}%", "oil level high",
        )
    return alarms


def controller_cycle(ctl: SeparatorController, cache: GatewayCache, now: float) -> CycleResult:
    """One control period: evaluate safety, then run whichever loops have
    fresh data. A latched safety block stops the pump and holds both drain
    commands until an operator reset; stale data holds the affected loop
    and raises a stale-data alarm once per staleness episode.
    """
    res = CycleResult()
    was_latched = ctl.safety.latched
    res.alarms.extend(alarm_eval(ctl, cache, now))
    if ctl.safety.latched:
        res.stop_pump = True
        res.tripped = not was_latched
        return res

    for sensor, pid, attr in (("P2", ctl.water_pid, "lv1_cmd"), ("P3", ctl.oil_pid, "lv2_cmd")):
        entry = cache.get(sensor)
        if not ctl._fresh(entry, now):
            if not ctl._stale[sensor]:
                ctl._stale[sensor] = True
                res.alarms.append(AlarmEvent(now, "stale-data", f"{sensor} data stale, loop holding"))
            continue
        ctl._stale[sensor] = False
        if not math.isfinite(entry.value):
            res.alarms.append(AlarmEvent(now, "data-quality", f"{sensor} reading not finite"))
            continue
        which = "water" if sensor == "P2" else "oil"
        level = level_from_dp(entry.value, ctl.params, ctl.geom, which)
        setattr(res, attr, pid_step(pid, level, ctl.cfg.period_s))
    return res
