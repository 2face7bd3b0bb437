"""Continuous model of the two-phase gravity separator rig.

Process layout: a feed tank holds the water and oil inventory. An impeller
pump draws both phases through feed valves V1 (water side) and V2 (oil
side), remixes them, and pushes the mixture through inlet valve V3 into the
left section of the separation tank. A weir plate splits the tank; the
unseparated mixture settles out at a first-order rate, separated water
drains back to the feed tank through LV1, and separated oil floats over the
plate into the right section, which drains to the feed tank through LV2.

Instrumentation: P1 reads the feed line pressure, P2 is a differential
pressure cell on the left section reading the water column against an oil
reference (its transmitter also reports the bottom gauge pressure as a
secondary variable), P3 reads the hydrostatic head of the right section,
and T reads the oil temperature.

Everything advances by explicit Euler at the kernel step. Volumes are kept
in litres, heights in metres, flows in litres per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .kernel import ConfigurationError, FatalSimulationError, RngStream

GRAVITY = 9.81

VALVE_IDS = ("V1", "V2", "V3", "LV1", "LV2")

# Full stroke takes 9 seconds regardless of demand; travel is linear.
VALVE_TRAVEL_S = 9.0
VALVE_SLEW_PCT_PER_S = 100.0 / VALVE_TRAVEL_S

SENSOR_IDS = ("P1", "P2", "P3", "T")


@dataclass
class TankGeometry:
    """Separation tank dimensions. Capacity is implied by the areas."""

    left_area_m2: float = 0.03
    right_area_m2: float = 0.09
    tank_height_m: float = 0.5
    weir_height_frac: float = 0.70
    separator_capacity_l: float = 60.0
    feed_water_l: float = 100.0
    feed_oil_l: float = 105.0

    def __post_init__(self):
        implied = (self.left_area_m2 + self.right_area_m2) * self.tank_height_m * 1000.0
        if abs(implied - self.separator_capacity_l) > 1e-6:
            raise ConfigurationError(
                f"separator_capacity_l {self.separator_capacity_l} does not match "
                f"areas x height ({implied:.6f} L)"
            )
        if not 0.0 < self.weir_height_frac < 0.8:
            raise ConfigurationError(
                f"weir_height_frac must lie in (0, 0.8), got {self.weir_height_frac}"
            )

    @property
    def weir_height_m(self) -> float:
        return self.weir_height_frac * self.tank_height_m

    @property
    def left_capacity_l(self) -> float:
        return self.left_area_m2 * self.tank_height_m * 1000.0

    @property
    def right_capacity_l(self) -> float:
        return self.right_area_m2 * self.tank_height_m * 1000.0


@dataclass
class PlantParams:
    """Physical constants and flow coefficients.

    The defaults describe a small bench rig. The bundled recipes override
    the pump size, flow coefficients and separation rate with values fitted
    once against the reference runs; those overrides live in the recipe
    files, not here.
    """

    rho_water: float = 998.0
    rho_oil: float = 790.0
    water_fraction: float = 0.49      # water share of the pumped mixture at equal feed valves
    separation_rate_per_s: float = 0.05
    pump_max_lps: float = 0.80
    lv1_flow_coeff: float = 0.55      # L/s per sqrt(m) of water head
    lv2_flow_coeff: float = 0.112     # L/s per sqrt(m) of oil head
    weir_coeff_lps_per_m: float = 25.0
    ambient_temp_c: float = 21.0
    pump_heat_c_per_s: float = 0.0008
    cooling_rate_per_s: float = 0.0002
    feed_pressure_base_kpa: float = 180.0

    def __post_init__(self):
        if not 0.0 < self.water_fraction < 1.0:
            raise ConfigurationError(f"water_fraction must lie in (0, 1), got {self.water_fraction}")
        if self.rho_water <= self.rho_oil:
            raise ConfigurationError("rho_water must exceed rho_oil for the DP cell to resolve the interface")


@dataclass
class ValveActuator:
    """A valve position chasing its command at the fixed slew rate."""

    valve_id: str
    position_pct: float = 0.0
    command_pct: float = 0.0
    slew_pct_per_s: float = VALVE_SLEW_PCT_PER_S

    def set_command(self, pct: float) -> None:
        if not 0.0 <= pct <= 100.0 or not math.isfinite(pct):
            raise ConfigurationError(f"{self.valve_id} command out of range: {pct}")
        self.command_pct = pct


def valve_slew(act: ValveActuator, dt: float) -> ValveActuator:
    """Move the position toward the command, bounded by the slew rate."""
    gap = act.command_pct - act.position_pct
    limit = act.slew_pct_per_s * dt
    if gap > limit:
        act.position_pct += limit
    elif gap < -limit:
        act.position_pct -= limit
    else:
        act.position_pct = act.command_pct
    return act


@dataclass
class SensorSpec:
    """Per-sensor noise model. Values are in the sensor's native unit."""

    sensor_id: str
    noise_std: float = 0.0
    bias: float = 0.0
    sample_period_s: float = 1.0


@dataclass(frozen=True)
class SensorReading:
    sensor_id: str
    value: float
    time: float
    static_pa: float | None = None   # P2 secondary variable: bottom gauge pressure


@dataclass
class PlantState:
    """Volumes per phase and compartment, plus actuator and utility state.

    The unseparated mixture is tracked per species so that an inventory
    audit closes exactly whatever the feed composition is doing.
    """

    left_water_l: float = 0.0
    left_oil_l: float = 0.0
    unsep_water_l: float = 0.0
    unsep_oil_l: float = 0.0
    right_oil_l: float = 0.0
    feed_water_l: float = 100.0
    feed_oil_l: float = 105.0
    pump_running: bool = True
    oil_temp_c: float = 21.0
    feed_pressure_kpa: float = 0.0
    valves: dict[str, ValveActuator] = field(
        default_factory=lambda: {vid: ValveActuator(vid) for vid in VALVE_IDS}
    )

    @property
    def left_unseparated_l(self) -> float:
        return self.unsep_water_l + self.unsep_oil_l

    @property
    def left_total_l(self) -> float:
        return self.left_water_l + self.left_oil_l + self.left_unseparated_l

    @property
    def valve_positions(self) -> dict[str, float]:
        return {vid: act.position_pct for vid, act in self.valves.items()}

    def water_inventory_l(self) -> float:
        return self.feed_water_l + self.left_water_l + self.unsep_water_l

    def oil_inventory_l(self) -> float:
        return self.feed_oil_l + self.left_oil_l + self.unsep_oil_l + self.right_oil_l


def level_percent(state: PlantState, geom: TankGeometry, which: str) -> float:
    """Levels as percent of the shared tank height.

    which: 'left-water' (separated water column), 'left-total' (everything in
    the left section) or 'right-oil'.
    """
    if which == "left-water":
        vol, area = state.left_water_l, geom.left_area_m2
    elif which == "left-total":
        vol, area = state.left_total_l, geom.left_area_m2
    elif which == "right-oil":
        vol, area = state.right_oil_l, geom.right_area_m2
    else:
        raise ConfigurationError(f"unknown level selector: {which!r}")
    height_m = vol / (area * 1000.0)
    return 100.0 * height_m / geom.tank_height_m


def _height_m(vol_l: float, area_m2: float) -> float:
    return vol_l / (area_m2 * 1000.0)


def step_plant(
    state: PlantState,
    geom: TankGeometry,
    params: PlantParams,
    dt: float,
    diagnostics: list | None = None,
) -> PlantState:
    """Integrate one step: pump inflow, separation, weir overflow, drains, slew.

    Flows are evaluated from the state at the start of the step and clamped
    so no compartment is driven negative; every litre moved lands in exactly
    one other compartment, which keeps the species inventories constant to
    float precision.
    """
    v = state.valves

    # Pump draw, split by the feed valve openings. The mixture composition
    # follows the draw, not a fixed ratio, so throttling V1 or V2 shifts it.
    q_in_w = q_in_o = 0.0
    if state.pump_running:
        q_base = params.pump_max_lps * v["V3"].position_pct / 100.0
        q_in_w = q_base * params.water_fraction * v["V1"].position_pct / 100.0
        q_in_o = q_base * (1.0 - params.water_fraction) * v["V2"].position_pct / 100.0
        q_in_w = min(q_in_w, state.feed_water_l / dt)
        q_in_o = min(q_in_o, state.feed_oil_l / dt)
    state.feed_water_l -= q_in_w * dt
    state.feed_oil_l -= q_in_o * dt
    state.unsep_water_l += q_in_w * dt
    state.unsep_oil_l += q_in_o * dt

    # First-order settling of the mixture into its phases.
    frac = params.separation_rate_per_s * dt
    if frac > 1.0:
        frac = 1.0
    sep_w = state.unsep_water_l * frac
    sep_o = state.unsep_oil_l * frac
    state.unsep_water_l -= sep_w
    state.unsep_oil_l -= sep_o
    state.left_water_l += sep_w
    state.left_oil_l += sep_o

    # Weir overflow: only the floating oil layer crosses the plate. If the
    # oil layer is exhausted while the total still stands above the plate,
    # nothing carries over and the level climbs until the safety trip acts.
    h_total = _height_m(state.left_total_l, geom.left_area_m2)
    over = h_total - geom.weir_height_m
    if over > 0.0 and state.left_oil_l > 0.0:
        q_over = params.weir_coeff_lps_per_m * over
        moved = min(q_over * dt, state.left_oil_l)
        room = geom.right_capacity_l - state.right_oil_l
        if moved > room:
            moved = max(room, 0.0)
            if diagnostics is not None:
                diagnostics.append("right section full, overflow clamped")
        state.left_oil_l -= moved
        state.right_oil_l += moved

    # Orifice drains, sqrt of the head over each valve.
    h_w = _height_m(state.left_water_l, geom.left_area_m2)
    q_lv1 = params.lv1_flow_coeff * (v["LV1"].position_pct / 100.0) * math.sqrt(max(h_w, 0.0))
    drained_w = min(q_lv1 * dt, state.left_water_l)
    state.left_water_l -= drained_w
    state.feed_water_l += drained_w

    h_o = _height_m(state.right_oil_l, geom.right_area_m2)
    q_lv2 = params.lv2_flow_coeff * (v["LV2"].position_pct / 100.0) * math.sqrt(max(h_o, 0.0))
    drained_o = min(q_lv2 * dt, state.right_oil_l)
    state.right_oil_l -= drained_o
    state.feed_oil_l += drained_o

    # Utilities: oil warms while the pump churns, relaxes toward ambient
    # otherwise; the feed line pressure tracks pump state and V3 restriction.
    if state.pump_running:
        state.oil_temp_c += params.pump_heat_c_per_s * dt
        state.feed_pressure_kpa = params.feed_pressure_base_kpa * (
            0.4 + 0.6 * (1.0 - 0.5 * v["V3"].position_pct / 100.0)
        )
    else:
        state.oil_temp_c += (params.ambient_temp_c - state.oil_temp_c) * params.cooling_rate_per_s * dt
        state.feed_pressure_kpa = 0.0

    for act in v.values():
        valve_slew(act, dt)

    # Flows above are clamped, so a negative volume means the balance logic
    # itself broke. Pin it at empty and say so rather than integrating garbage.
    for attr in ("left_water_l", "left_oil_l", "unsep_water_l", "unsep_oil_l",
                 "right_oil_l", "feed_water_l", "feed_oil_l"):
        vol = getattr(state, attr)
        if vol < 0.0:
            setattr(state, attr, 0.0)
            if diagnostics is not None:
                diagnostics.append(f"conservation violation: {attr} went negative ({vol:.3e} L)")

    if not (
        math.isfinite(state.left_water_l)
        and math.isfinite(state.left_oil_l)
        and math.isfinite(state.unsep_water_l)
        and math.isfinite(state.unsep_oil_l)
        and math.isfinite(state.right_oil_l)
        and math.isfinite(state.feed_water_l)
        and math.isfinite(state.feed_oil_l)
    ):
        raise FatalSimulationError("non-finite volume after plant step", state)
    return state


def read_sensor(
    state: PlantState,
    spec: SensorSpec,
    geom: TankGeometry,
    params: PlantParams,
    rng: RngStream,
    now: float,
) -> SensorReading:
    """Sample one sensor, applying its bias and Gaussian noise.

    P2 returns the interface differential pressure g*(rho_w - rho_o)*h_w and
    carries the bottom gauge pressure as a secondary value, which is what
    lets the controller reconstruct the total left-section level. The
    mixture band weighs in at its own mean density.
    """
    sid = spec.sensor_id
    if sid == "P2":
        h_w = _height_m(state.left_water_l, geom.left_area_m2)
        h_u = _height_m(state.left_unseparated_l, geom.left_area_m2)
        h_o = _height_m(state.left_oil_l, geom.left_area_m2)
        unsep = state.left_unseparated_l
        if unsep > 0.0:
            rho_mix = (state.unsep_water_l * params.rho_water + state.unsep_oil_l * params.rho_oil) / unsep
        else:
            rho_mix = params.rho_oil
        dp = GRAVITY * (params.rho_water - params.rho_oil) * h_w
        bottom = GRAVITY * (params.rho_water * h_w + rho_mix * h_u + params.rho_oil * h_o)
        value = dp + spec.bias + rng.normal(spec.noise_std)
        static = bottom + rng.normal(spec.noise_std)
        return SensorReading("P2", value, now, static_pa=static)
    if sid == "P3":
        h_o = _height_m(state.right_oil_l, geom.right_area_m2)
        value = GRAVITY * params.rho_oil * h_o + spec.bias + rng.normal(spec.noise_std)
        return SensorReading("P3", value, now)
    if sid == "P1":
        value = state.feed_pressure_kpa + spec.bias + rng.normal(spec.noise_std)
        return SensorReading("P1", value, now)
    if sid == "T":
        value = state.oil_temp_c + spec.bias + rng.normal(spec.noise_std)
        return SensorReading("T", value, now)
    raise ConfigurationError(f"unknown sensor: {sid!r}")


def drain_opening_for_flow(q_lps: float, head_m: float, flow_coeff: float) -> float:
    """Valve opening (percent) that passes q_lps at the given head."""
    if head_m <= 0.0 or flow_coeff <= 0.0:
        return 0.0
    pct = 100.0 * q_lps / (flow_coeff * math.sqrt(head_m))
    return min(max(pct, 0.0), 100.0)
