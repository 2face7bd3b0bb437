"""Co-simulation world: plant, mesh and controller on one clock.

The world owns the event queue and implements the dispatch contract the
kernel expects. One tick is one network slot; sensors sample once per
superframe, each in its own lane, and the control task runs in the last
slot of the frame against whatever the mesh has delivered by then.
"""

from __future__ import annotations

import math

import numpy as np

from . import control, plant, wireless
from .kernel import ConfigurationError, EventQueue, SimClock, SimEvent, make_streams

STREAM_IDS = ("link-noise", "sensor-noise", "interference")

DEFAULT_NOISE_STD = {"P1": 1.5, "P2": 12.0, "P3": 35.0, "T": 0.15}

TRACE_FIELDS = (
    "time_s",
    "water_level_pct",
    "oil_level_pct",
    "lv1_pct",
    "lv2_pct",
    "setpoint_w",
    "setpoint_o",
    "alarms",
)


def default_water_pid() -> control.PidController:
    return control.PidController(kp=1.4, ti=80.0, integral_mode="gain", setpoint=40.0)


def default_oil_pid() -> control.PidController:
    return control.PidController(kp=2.0, ti=40.0, integral_mode="time", setpoint=60.0)


class SimWorld:
    """Everything that advances together under the kernel tick."""

    def __init__(
        self,
        seed: int = 0,
        params: plant.PlantParams | None = None,
        geom: plant.TankGeometry | None = None,
        state: plant.PlantState | None = None,
        water_pid: control.PidController | None = None,
        oil_pid: control.PidController | None = None,
        safety: control.SafetyConfig | None = None,
        control_cfg: control.ControlConfig | None = None,
        env: wireless.RadioEnvironment | None = None,
        blacklist: wireless.ChannelBlacklist | None = None,
        noise_std: dict[str, float] | None = None,
        sample_until: float = math.inf,
    ):
        self.seed = seed
        self.clock = SimClock()
        self.events = EventQueue()
        self.streams = make_streams(seed, STREAM_IDS)
        self.params = params or plant.PlantParams()
        self.geom = geom or plant.TankGeometry()
        self.state = state or plant.PlantState()
        self.safety = safety or control.SafetyConfig()
        self.controller = control.SeparatorController(
            water_pid or default_water_pid(),
            oil_pid or default_oil_pid(),
            self.safety,
            control_cfg or control.ControlConfig(),
            self.params,
            self.geom,
        )
        self.cache = control.GatewayCache()
        self.mesh = wireless.Mesh(plant.SENSOR_IDS, env=env, blacklist=blacklist)
        self.mesh.on_delivery = self._on_delivery
        noise = dict(DEFAULT_NOISE_STD)
        if noise_std:
            noise.update(noise_std)
        self.sensors = {
            sid: plant.SensorSpec(sid, noise_std=noise[sid]) for sid in plant.SENSOR_IDS
        }
        self.sample_until = sample_until

        # Per-tick trace in a growing array: one row per tick, columns matching
        # TRACE_FIELDS minus the sparse alarms column, which lives in a dict.
        self._trace_buf = np.empty((8192, 7))
        self._trace_len = 0
        self.trace_alarms: dict[int, str] = {}
        self.alarms: list[control.AlarmEvent] = []
        self.command_log: list[tuple[float, dict, bool]] = []
        self.on_command_result = None
        self._tick_alarms: list[str] = []
        self._diag: list[str] = []
        self._diag_active: set[str] = set()

        for lane, sid in enumerate(plant.SENSOR_IDS):
            phase = lane * wireless.LANE_SLOTS * self.clock.step
            self.events.push(SimEvent(phase, "sensor-sample", sid))
        self.events.push(SimEvent(0.0, "packet-tx"))
        self.events.push(
            SimEvent(wireless.CONTROLLER_SLOT * self.clock.step, "controller-cycle")
        )

    # -- event plumbing ----------------------------------------------------

    def schedule_command(self, time: float, payload: dict) -> None:
        self.events.push(SimEvent(time, "operator-command", payload))

    def request_emergency_stop(self, reason: str = "emergency stop") -> None:
        """Queued as a trip event so it preempts everything else in its slot."""
        next_tick = (self.clock.ticks + 1) * self.clock.step
        self.events.push(SimEvent(next_tick, "safety-trip", {"reason": reason}))

    def dispatch(self, ev: SimEvent) -> None:
        kind = ev.kind
        if kind == "packet-tx":
            self.mesh.transmit_slot(
                self.clock.ticks,
                self.clock.now,
                self.streams["link-noise"],
                self.streams["interference"],
            )
            self.events.push(SimEvent((self.clock.ticks + 1) * self.clock.step, "packet-tx"))
        elif kind == "sensor-sample":
            self._sample(ev)
        elif kind == "controller-cycle":
            self._control_cycle(ev)
        elif kind == "operator-command":
            self._operator_command(ev)
        elif kind == "safety-trip":
            self._raise("trip", ev.payload["reason"])
            self.safety.trip(ev.time, ev.payload["reason"])
            self.state.pump_running = False

    @property
    def trace(self) -> np.ndarray:
        return self._trace_buf[: self._trace_len]

    def advance_continuous(self, dt: float) -> None:
        i = self._trace_len
        buf = self._trace_buf
        if i == buf.shape[0]:
            grown = np.empty((2 * i, 7))
            grown[:i] = buf
            self._trace_buf = buf = grown
        buf[i, 0] = self.clock.now
        buf[i, 1] = plant.level_percent(self.state, self.geom, "left-water")
        buf[i, 2] = plant.level_percent(self.state, self.geom, "right-oil")
        buf[i, 3] = self.state.valves["LV1"].position_pct
        buf[i, 4] = self.state.valves["LV2"].position_pct
        buf[i, 5] = self.controller.water_pid.setpoint
        buf[i, 6] = self.controller.oil_pid.setpoint
        if self._tick_alarms:
            self.trace_alarms[i] = ";".join(self._tick_alarms)
            self._tick_alarms.clear()
        self._trace_len = i + 1
        plant.step_plant(self.state, self.geom, self.params, dt, self._diag)
        if self._diag:
            for msg in self._diag:
                if msg not in self._diag_active:
                    self._diag_active.add(msg)
                    self._raise("process", msg)
            self._diag_active.intersection_update(self._diag)
            self._diag.clear()
        elif self._diag_active:
            self._diag_active.clear()

    # -- handlers ----------------------------------------------------------

    def _on_delivery(self, pkt: wireless.Packet, arrival: float) -> None:
        self.cache.update(pkt.reading, arrival)

    def _sample(self, ev: SimEvent) -> None:
        sid = ev.payload
        spec = self.sensors[sid]
        reading = plant.read_sensor(
            self.state, spec, self.geom, self.params, self.streams["sensor-noise"], ev.time
        )
        self.mesh.create_packet(sid, reading, ev.time)
        nxt = ev.time + spec.sample_period_s
        if nxt <= self.sample_until:
            self.events.push(SimEvent(nxt, "sensor-sample", sid))

    def _control_cycle(self, ev: SimEvent) -> None:
        res = control.controller_cycle(self.controller, self.cache, ev.time)
        for alarm in res.alarms:
            self.alarms.append(alarm)
            self._tick_alarms.append(alarm.kind)
        if res.stop_pump:
            self.state.pump_running = False
        if res.lv1_cmd is not None:
            self.state.valves["LV1"].set_command(res.lv1_cmd)
        if res.lv2_cmd is not None:
            self.state.valves["LV2"].set_command(res.lv2_cmd)
        self.events.push(SimEvent(ev.time + self.controller.cfg.period_s, "controller-cycle"))

    def _operator_command(self, ev: SimEvent) -> None:
        cmd = ev.payload
        accepted, reason = True, None
        try:
            self._apply_command(cmd)
        except ConfigurationError as exc:
            accepted, reason = False, str(exc)
            self._raise("command-rejected", str(exc))
        self.command_log.append((ev.time, cmd, accepted))
        if self.on_command_result is not None:
            self.on_command_result(cmd, accepted, reason)

    def _apply_command(self, cmd: dict) -> None:
        kind = cmd["kind"]
        args = cmd.get("args") or {}
        if kind == "set_valve":
            valve = args.get("valve")
            if valve not in self.state.valves:
                raise ConfigurationError(f"unknown valve {valve!r}")
            self.state.valves[valve].set_command(float(args["percent"]))
        elif kind == "set_setpoint":
            loop, value = args.get("loop"), float(args["percent"])
            if loop not in ("water", "oil"):
                raise ConfigurationError(f"unknown loop {loop!r}")
            if not self.safety.level_trip_pct > value > 0.0:
                raise ConfigurationError(
                    f"setpoint {value} outside (0, {self.safety.level_trip_pct})"
                )
            pid = self.controller.water_pid if loop == "water" else self.controller.oil_pid
            pid.setpoint = value
        elif kind == "stop_pump":
            self.state.pump_running = False
        elif kind == "start_pump":
            if self.safety.latched:
                raise ConfigurationError("pump start blocked by safety latch")
            self.state.pump_running = True
        elif kind == "reset_latch":
            self.safety.latched = False
        elif kind == "set_blacklist":
            self.mesh.blacklist.enabled = bool(args["enabled"])
        elif kind == "start_jam":
            channels = frozenset(int(c) for c in args["channels"])
            intensity = float(args.get("intensity", 1.0))
            self.mesh.env.jams.append(
                wireless.JamWindow(self.clock.now, math.inf, channels, intensity)
            )
        elif kind == "stop_jam":
            now = self.clock.now
            kept = []
            for jam in self.mesh.env.jams:
                if jam.end <= now:
                    kept.append(jam)
                elif jam.start <= now:
                    kept.append(wireless.JamWindow(jam.start, now, jam.channels, jam.intensity))
                # windows that have not started yet are cancelled outright
            self.mesh.env.jams = kept
        else:
            raise ConfigurationError(f"unknown command kind {kind!r}")

    def _raise(self, kind: str, message: str) -> None:
        self.alarms.append(control.AlarmEvent(self.clock.now, kind, message))
        self._tick_alarms.append(kind)

    # -- views -------------------------------------------------------------

    def snapshot(self) -> dict:
        """Operator-facing view of the current instant."""
        latest = {
            sid: (e.value if (e := self.cache.get(sid)) else None) for sid in plant.SENSOR_IDS
        }
        return {
            "time_s": self.clock.now,
            "water_level_pct": plant.level_percent(self.state, self.geom, "left-water"),
            "oil_level_pct": plant.level_percent(self.state, self.geom, "right-oil"),
            "left_total_pct": plant.level_percent(self.state, self.geom, "left-total"),
            "setpoint_w": self.controller.water_pid.setpoint,
            "setpoint_o": self.controller.oil_pid.setpoint,
            "valves": {
                vid: {
                    "position_pct": act.position_pct,
                    "command_pct": act.command_pct,
                }
                for vid, act in self.state.valves.items()
            },
            "pump_running": self.state.pump_running,
            "safety_latched": self.safety.latched,
            "trip_reason": self.safety.trip_reason,
            "sensors": latest,
            "network": wireless.network_stats(self.mesh),
            "blacklist": {
                "enabled": self.mesh.blacklist.enabled,
                "channels": sorted(self.mesh.blacklist.blacklisted),
            },
            "alarm_count": len(self.alarms),
        }
