"""Experiment harness: recipes, wave metrics, multi-seed runs and reports.

A scenario is a declarative recipe (YAML) naming the operating point, the
operator script (valve moves, setpoint steps), any radio interference, and
the analysis windows. Running it produces one deterministic simulation per
seed plus cross-seed aggregates of the wave features and network metrics.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from . import control, plant, wireless
from .kernel import ConfigurationError, run_until
from .world import TRACE_FIELDS, SimWorld

BUILTIN_RECIPES = ("usecase1", "usecase2", "usecase3")

_CONFIG_KEYS = {
    "name", "description", "duration_s", "seeds", "start", "setpoints",
    "initial_valves", "setpoint_schedule", "valve_schedule", "jams",
    "blacklist_enabled", "plant", "geometry", "control", "noise_std",
    "drain_window_s", "metric_windows", "analysis_loop", "expect_trip",
}


@dataclass
class ScenarioConfig:
    """Everything a run needs, as parsed from a recipe file."""

    name: str
    description: str = ""
    duration_s: float = 600.0
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    start: str = "cold"
    setpoints: dict[str, float] = field(default_factory=lambda: {"water": 40.0, "oil": 60.0})
    initial_valves: dict[str, float] = field(default_factory=dict)
    setpoint_schedule: list[dict] = field(default_factory=list)
    valve_schedule: list[dict] = field(default_factory=list)
    jams: list[dict] = field(default_factory=list)
    blacklist_enabled: bool = False
    plant: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)
    control: dict = field(default_factory=dict)
    noise_std: dict[str, float] = field(default_factory=dict)
    drain_window_s: float = 3.0
    metric_windows: list[dict] = field(default_factory=list)
    analysis_loop: str = "water"
    expect_trip: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "duration_s": self.duration_s,
            "seeds": list(self.seeds),
            "start": self.start,
            "setpoints": dict(self.setpoints),
            "initial_valves": dict(self.initial_valves),
            "setpoint_schedule": [dict(e) for e in self.setpoint_schedule],
            "valve_schedule": [dict(e) for e in self.valve_schedule],
            "jams": [dict(e) for e in self.jams],
            "blacklist_enabled": self.blacklist_enabled,
            "plant": dict(self.plant),
            "geometry": dict(self.geometry),
            "control": dict(self.control),
            "noise_std": dict(self.noise_std),
            "drain_window_s": self.drain_window_s,
            "metric_windows": [dict(e) for e in self.metric_windows],
            "analysis_loop": self.analysis_loop,
            "expect_trip": self.expect_trip,
        }


def config_from_dict(raw: dict) -> ScenarioConfig:
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown recipe keys: {sorted(unknown)}")
    if "name" not in raw:
        raise ConfigurationError("recipe missing required key 'name'")
    cfg = ScenarioConfig(**raw)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ScenarioConfig) -> None:
    """Reject anything that would make the run meaningless or unsafe."""
    if cfg.duration_s <= 0:
        raise ConfigurationError(f"duration_s must be positive, got {cfg.duration_s}")
    if not cfg.seeds:
        raise ConfigurationError("seeds must not be empty")
    if cfg.start not in ("cold", "warm"):
        raise ConfigurationError(f"start must be 'cold' or 'warm', got {cfg.start!r}")
    if cfg.analysis_loop not in ("water", "oil"):
        raise ConfigurationError(f"analysis_loop must be 'water' or 'oil', got {cfg.analysis_loop!r}")
    trip = cfg.control.get("level_trip_pct", 80.0)
    for loop, value in cfg.setpoints.items():
        if loop not in ("water", "oil"):
            raise ConfigurationError(f"unknown setpoint loop {loop!r}")
        if not 0.0 < value < trip:
            raise ConfigurationError(
                f"setpoint {loop}={value} violates the (0, {trip}) bound below the trip level"
            )
    for entry in cfg.setpoint_schedule:
        if not 0.0 < entry["value"] < trip:
            raise ConfigurationError(
                f"scheduled setpoint {entry['value']} at t={entry['time']} violates the (0, {trip}) bound"
            )
    for name, schedule in (("setpoint_schedule", cfg.setpoint_schedule), ("valve_schedule", cfg.valve_schedule)):
        times = [entry["time"] for entry in schedule]
        if times != sorted(times):
            raise ConfigurationError(f"{name} must be sorted by time")
    for valve in list(cfg.initial_valves) + [entry["valve"] for entry in cfg.valve_schedule]:
        if valve not in plant.VALVE_IDS:
            raise ConfigurationError(f"unknown valve {valve!r}")
    for entry in cfg.valve_schedule:
        if not 0.0 <= entry["percent"] <= 100.0:
            raise ConfigurationError(f"valve percent {entry['percent']} outside [0, 100]")
    for jam in cfg.jams:
        end = jam.get("end")
        if end is not None and end <= jam["start"]:
            raise ConfigurationError(f"jam window end {end} not after start {jam['start']}")
        wireless.JamWindow(
            jam["start"],
            math.inf if end is None else end,
            frozenset(jam["channels"]),
            jam.get("intensity", 1.0),
        )
    for window in cfg.metric_windows:
        if not 0.0 <= window["start"] < window["end"] <= cfg.duration_s:
            raise ConfigurationError(
                f"metric window {window.get('name')} [{window['start']}, {window['end']}] outside the run"
            )


def load_recipe(source: str | Path) -> ScenarioConfig:
    """Load a built-in recipe by name or any recipe file by path."""
    if isinstance(source, str) and source in BUILTIN_RECIPES:
        text = resources.files("sepsim").joinpath(f"recipes/{source}.yaml").read_text()
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigurationError(f"no such recipe: {source}")
        text = path.read_text()
    raw = yaml.safe_load(text)
    if not isinstance(raw, dict):
        raise ConfigurationError(f"recipe {source} is not a mapping")
    return config_from_dict(raw)


def recipe_text(name: str) -> str:
    if name not in BUILTIN_RECIPES:
        raise ConfigurationError(f"no built-in recipe named {name!r}")
    return resources.files("sepsim").joinpath(f"recipes/{name}.yaml").read_text()


# -- world assembly --------------------------------------------------------


def _make_params(cfg: ScenarioConfig) -> plant.PlantParams:
    return plant.PlantParams(**cfg.plant)


def _make_geometry(cfg: ScenarioConfig) -> plant.TankGeometry:
    return plant.TankGeometry(**cfg.geometry)


def _make_pids(cfg: ScenarioConfig) -> tuple[control.PidController, control.PidController]:
    water = dict(kp=1.4, ti=80.0, integral_mode="gain")
    oil = dict(kp=2.0, ti=40.0, integral_mode="time")
    water.update(cfg.control.get("water", {}))
    oil.update(cfg.control.get("oil", {}))
    return (
        control.PidController(setpoint=cfg.setpoints.get("water", 40.0), **water),
        control.PidController(setpoint=cfg.setpoints.get("oil", 60.0), **oil),
    )


def equilibrium_state(
    cfg: ScenarioConfig,
    params: plant.PlantParams,
    geom: plant.TankGeometry,
) -> plant.PlantState:
    """Operating point where every flow balances at the setpoints.

    Solved algebraically: levels from the setpoints, the settling inventory
    from inflow over the separation rate, drain openings from the orifice
    law, and the left oil layer thick enough to carry the oil inflow over
    the weir plate.
    """
    v1 = cfg.initial_valves.get("V1", 100.0) / 100.0
    v2 = cfg.initial_valves.get("V2", 100.0) / 100.0
    v3 = cfg.initial_valves.get("V3", 100.0) / 100.0
    q_base = params.pump_max_lps * v3
    q_w = q_base * params.water_fraction * v1
    q_o = q_base * (1.0 - params.water_fraction) * v2

    sp_w = cfg.setpoints.get("water", 40.0)
    sp_o = cfg.setpoints.get("oil", 60.0)
    h_w = sp_w / 100.0 * geom.tank_height_m
    h_o_right = sp_o / 100.0 * geom.tank_height_m
    water_l = geom.left_area_m2 * 1000.0 * h_w
    right_l = geom.right_area_m2 * 1000.0 * h_o_right

    k = params.separation_rate_per_s
    unsep_w, unsep_o = q_w / k, q_o / k

    lv1 = plant.drain_opening_for_flow(q_w, h_w, params.lv1_flow_coeff)
    lv2 = plant.drain_opening_for_flow(q_o, h_o_right, params.lv2_flow_coeff)
    for name, pct, q in (("LV1", lv1, q_w), ("LV2", lv2, q_o)):
        if pct >= 100.0 and q > 0.0:
            raise ConfigurationError(
                f"no equilibrium: {name} cannot pass {q:.4f} L/s even fully open"
            )

    h_total = geom.weir_height_m + q_o / params.weir_coeff_lps_per_m
    left_oil = geom.left_area_m2 * 1000.0 * h_total - water_l - unsep_w - unsep_o
    if left_oil < 0.0:
        raise ConfigurationError(
            "no equilibrium: water setpoint leaves no room for the oil layer below the weir"
        )

    state = plant.PlantState(
        left_water_l=water_l,
        left_oil_l=left_oil,
        unsep_water_l=unsep_w,
        unsep_oil_l=unsep_o,
        right_oil_l=right_l,
        feed_water_l=geom.feed_water_l - water_l - unsep_w,
        feed_oil_l=geom.feed_oil_l - left_oil - unsep_o - right_l,
    )
    positions = dict(cfg.initial_valves)
    positions.setdefault("V1", 100.0)
    positions.setdefault("V2", 100.0)
    positions.setdefault("V3", 100.0)
    positions["LV1"], positions["LV2"] = lv1, lv2
    for vid, pct in positions.items():
        act = state.valves[vid]
        act.position_pct = pct
        act.set_command(pct)
    return state


def _preset_integral(pid: control.PidController, output: float) -> None:
    """Back-compute the accumulator that makes the loop rest at this output."""
    if pid.integral_mode == "gain":
        pid.integral_acc = output / pid.ti if pid.ti else 0.0
    elif pid.ti and not math.isinf(pid.ti):
        pid.integral_acc = output * pid.ti / pid.kp
    pid.last_output = output


def build_world(cfg: ScenarioConfig, seed: int) -> SimWorld:
    params = _make_params(cfg)
    geom = _make_geometry(cfg)
    water_pid, oil_pid = _make_pids(cfg)

    if cfg.start == "warm":
        state = equilibrium_state(cfg, params, geom)
        _preset_integral(water_pid, state.valves["LV1"].position_pct)
        _preset_integral(oil_pid, state.valves["LV2"].position_pct)
    else:
        state = plant.PlantState(feed_water_l=geom.feed_water_l, feed_oil_l=geom.feed_oil_l)
        for vid, pct in cfg.initial_valves.items():
            act = state.valves[vid]
            act.position_pct = pct
            act.set_command(pct)

    env = wireless.RadioEnvironment(
        jams=[
            wireless.JamWindow(
                jam["start"],
                math.inf if jam.get("end") is None else jam["end"],
                frozenset(jam["channels"]),
                jam.get("intensity", 1.0),
            )
            for jam in cfg.jams
        ]
    )
    blacklist = wireless.ChannelBlacklist(enabled=cfg.blacklist_enabled)
    safety = control.SafetyConfig(level_trip_pct=cfg.control.get("level_trip_pct", 80.0))

    w = SimWorld(
        seed=seed,
        params=params,
        geom=geom,
        state=state,
        water_pid=water_pid,
        oil_pid=oil_pid,
        safety=safety,
        env=env,
        blacklist=blacklist,
        noise_std=cfg.noise_std,
        sample_until=cfg.duration_s - cfg.drain_window_s,
    )
    for entry in cfg.setpoint_schedule:
        w.schedule_command(
            entry["time"],
            {"kind": "set_setpoint", "args": {"loop": entry["loop"], "percent": entry["value"]}},
        )
    for entry in cfg.valve_schedule:
        w.schedule_command(
            entry["time"],
            {"kind": "set_valve", "args": {"valve": entry["valve"], "percent": entry["percent"]}},
        )
    return w


# -- wave detection --------------------------------------------------------


@dataclass(frozen=True)
class Wave:
    """One excursion between consecutive upward setpoint crossings.

    segment counts setpoint changes before this wave; index restarts at
    zero in every segment, so cross-seed aggregation can line waves up
    even when the number of waves in earlier segments differs by seed.
    """

    segment: int
    index: int
    start: float
    end: float
    setpoint: float
    peak_level: float
    trough_level: float

    @property
    def overshoot(self) -> float:
        return max(0.0, self.peak_level - self.setpoint)

    @property
    def undershoot(self) -> float:
        return max(0.0, self.setpoint - self.trough_level)

    def to_dict(self) -> dict:
        return {
            "segment": self.segment,
            "index": self.index,
            "start": self.start,
            "end": self.end,
            "setpoint": self.setpoint,
            "peak_level": self.peak_level,
            "trough_level": self.trough_level,
            "overshoot": self.overshoot,
            "undershoot": self.undershoot,
        }


def detect_waves(samples: list[tuple[float, float]], setpoints: list[tuple[float, float]]) -> list[Wave]:
    """Split a level series into waves against a piecewise-constant setpoint.

    A wave runs from one upward crossing of the setpoint to the next; a
    segment that begins at or above the setpoint opens its first wave
    immediately. The peak is the wave maximum, the trough the minimum after
    that peak. Waves still open when their segment ends are discarded, and
    every setpoint change starts a fresh segment.
    """
    if not samples:
        return []
    changes = [sp for sp in setpoints if sp[0] <= samples[-1][0]]
    if not changes:
        raise ConfigurationError("setpoint series empty over the sample range")
    waves: list[Wave] = []

    def segment_of(t: float, start_at: int) -> int:
        j = start_at
        while j + 1 < len(changes) and changes[j + 1][0] <= t:
            j += 1
        return j

    i = 0
    n = len(samples)
    seg_idx = 0
    while i < n:
        seg_idx = segment_of(samples[i][0], seg_idx)
        sp = changes[seg_idx][1]
        seg_end_t = changes[seg_idx + 1][0] if seg_idx + 1 < len(changes) else math.inf
        # Collect this segment's samples.
        j = i
        while j < n and samples[j][0] < seg_end_t:
            j += 1
        seg = samples[i:j]
        index = 0
        open_start: float | None = None
        levels: list[float] = []
        prev: float | None = None
        for t, lvl in seg:
            crossing = prev is not None and prev < sp <= lvl
            if open_start is None:
                if (prev is None and lvl >= sp) or crossing:
                    open_start = t
                    levels = [lvl]
            elif crossing:
                waves.append(_close_wave(seg_idx, index, open_start, t, sp, levels))
                index += 1
                open_start = t
                levels = [lvl]
            else:
                levels.append(lvl)
            prev = lvl
        i = j
    return waves


def _close_wave(segment: int, index: int, start: float, end: float, sp: float,
                levels: list[float]) -> Wave:
    peak_idx = max(range(len(levels)), key=levels.__getitem__)
    trough = min(levels[peak_idx:])
    return Wave(segment, index, start, end, sp, levels[peak_idx], trough)


# -- runs and aggregation --------------------------------------------------


@dataclass
class RunResult:
    seed: int
    world: SimWorld
    series: dict
    waves_water: list[Wave]
    waves_oil: list[Wave]
    network: dict
    windows: dict[str, dict]
    tripped: bool
    trip_time: float | None
    trip_reason: str | None
    failed: bool


def _series_1hz(trace, alarms: dict[int, str], step_ratio: int = 100) -> dict:
    idx = range(0, trace.shape[0], step_ratio)
    cols = {name: [] for name in TRACE_FIELDS}
    for i in idx:
        row = trace[i]
        cols["time_s"].append(round(float(row[0]), 6))
        cols["water_level_pct"].append(float(row[1]))
        cols["oil_level_pct"].append(float(row[2]))
        cols["lv1_pct"].append(float(row[3]))
        cols["lv2_pct"].append(float(row[4]))
        cols["setpoint_w"].append(float(row[5]))
        cols["setpoint_o"].append(float(row[6]))
        cols["alarms"].append(alarms.get(i, ""))
    return cols


def _level_samples(series: dict, column: str) -> list[tuple[float, float]]:
    return list(zip(series["time_s"], series[column]))


def _setpoint_steps(series: dict, column: str) -> list[tuple[float, float]]:
    steps = []
    for t, sp in zip(series["time_s"], series[column]):
        if not steps or steps[-1][1] != sp:
            steps.append((t, sp))
    return steps


def run_single(cfg: ScenarioConfig, seed: int) -> RunResult:
    w = build_world(cfg, seed)
    run_until(w, cfg.duration_s)
    series = _series_1hz(w.trace, w.trace_alarms)
    waves_water = detect_waves(
        _level_samples(series, "water_level_pct"), _setpoint_steps(series, "setpoint_w")
    )
    waves_oil = detect_waves(
        _level_samples(series, "oil_level_pct"), _setpoint_steps(series, "setpoint_o")
    )
    network = wireless.network_stats(w.mesh)
    windows = {
        win["name"]: wireless.network_stats(w.mesh, win["start"], win["end"])
        for win in cfg.metric_windows
    }
    tripped = w.safety.trip_time is not None
    return RunResult(
        seed=seed,
        world=w,
        series=series,
        waves_water=waves_water,
        waves_oil=waves_oil,
        network=network,
        windows=windows,
        tripped=tripped,
        trip_time=w.safety.trip_time,
        trip_reason=w.safety.trip_reason,
        failed=tripped and not cfg.expect_trip,
    )


def _mean_std(values: list[float]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def _aggregate_waves(per_run: list[list[Wave]]) -> list[dict]:
    """Cross-seed wave statistics, one block per setpoint segment.

    Waves align by their index within a segment, never globally, so a
    seed-dependent wave count in an early segment cannot shear the later
    columns out of register.
    """
    max_seg = max((w.segment for waves in per_run for w in waves), default=-1)
    blocks = []
    for seg in range(max_seg + 1):
        seg_runs = [[w for w in waves if w.segment == seg] for waves in per_run]
        n_waves = min((len(r) for r in seg_runs), default=0)
        block = {"segment": seg, "count": n_waves, "overshoot_mean": [], "overshoot_std": [],
                 "undershoot_mean": [], "undershoot_std": []}
        for i in range(n_waves):
            ov_m, ov_s = _mean_std([r[i].overshoot for r in seg_runs])
            un_m, un_s = _mean_std([r[i].undershoot for r in seg_runs])
            block["overshoot_mean"].append(ov_m)
            block["overshoot_std"].append(ov_s)
            block["undershoot_mean"].append(un_m)
            block["undershoot_std"].append(un_s)
        blocks.append(block)
    return blocks


def _aggregate_network(per_run: list[dict]) -> dict:
    out = {}
    for key in ("reliability_pct", "path_stability_pct", "latency_ms"):
        values = [run[key] for run in per_run if run[key] is not None]
        if not values:
            out[f"{key}_mean"], out[f"{key}_std"] = None, None
        else:
            out[f"{key}_mean"], out[f"{key}_std"] = _mean_std(values)
    return out


def run_scenario(cfg: ScenarioConfig, seeds: list[int] | None = None) -> dict:
    report, _ = run_scenario_detailed(cfg, seeds)
    return report


def run_scenario_detailed(
    cfg: ScenarioConfig, seeds: list[int] | None = None
) -> tuple[dict, list[RunResult]]:
    """Execute the recipe once per seed and assemble the report document.

    The per-seed RunResult objects ride along for callers that want the
    full tick traces, which the report deliberately thins to 1 Hz.
    """
    seeds = list(seeds) if seeds is not None else list(cfg.seeds)
    runs = [run_single(cfg, seed) for seed in seeds]

    window_names = [win["name"] for win in cfg.metric_windows]
    report = {
        "recipe": cfg.to_dict(),
        "seeds": seeds,
        "runs": [
            {
                "seed": r.seed,
                "waves": {
                    "water": [wave.to_dict() for wave in r.waves_water],
                    "oil": [wave.to_dict() for wave in r.waves_oil],
                },
                "network": r.network,
                "windows": r.windows,
                "alarms": [
                    {"time": a.time, "kind": a.kind, "message": a.message}
                    for a in r.world.alarms
                ],
                "trip": {"tripped": r.tripped, "time": r.trip_time, "reason": r.trip_reason},
                "failed": r.failed,
                "series": r.series,
            }
            for r in runs
        ],
        "aggregate": {
            "waves": {
                "water": _aggregate_waves([r.waves_water for r in runs]),
                "oil": _aggregate_waves([r.waves_oil for r in runs]),
            },
            "network": _aggregate_network([r.network for r in runs]),
            "windows": {
                name: _aggregate_network([r.windows[name] for r in runs])
                for name in window_names
            },
        },
        "analysis_loop": cfg.analysis_loop,
        "failed": any(r.failed for r in runs),
    }
    return report, runs


# -- persistence -----------------------------------------------------------


def write_report(report: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=1) + "\n")
    return path


def write_run_csv(run: RunResult, path: str | Path) -> Path:
    """Per-tick tabular export of one run's trace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trace = run.world.trace
    alarms = run.world.trace_alarms
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_FIELDS)
        for i in range(trace.shape[0]):
            row = trace[i]
            writer.writerow(
                [
                    f"{row[0]:.2f}",
                    f"{row[1]:.6f}",
                    f"{row[2]:.6f}",
                    f"{row[3]:.6f}",
                    f"{row[4]:.6f}",
                    f"{row[5]:.6f}",
                    f"{row[6]:.6f}",
                    alarms.get(i, ""),
                ]
            )
    return path


# -- reference comparison --------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    expected: str
    actual: str
    status: str  # pass | fail | info
    note: str = ""


def load_reference_tables(path: str | Path | None = None) -> dict:
    if path is None:
        text = resources.files("sepsim").joinpath("data/reference_tables.yaml").read_text()
    else:
        text = Path(path).read_text()
    return yaml.safe_load(text)


def compare_to_reference(report: dict, table: str, tables: dict | None = None) -> list[ComparisonRow]:
    """Check a report against one of the shipped reference tables.

    Rows come back pass/fail where the table's tolerance applies and info
    where the reference value is known not to be reproducible.
    """
    tables = tables if tables is not None else load_reference_tables()
    if table not in tables:
        raise ConfigurationError(f"unknown reference table {table!r}; have {sorted(tables)}")
    spec = tables[table]
    kind = spec["kind"]
    if kind == "waves":
        return _compare_waves(report, spec)
    if kind == "network-baseline":
        return _compare_network_baseline(report, spec)
    if kind == "jam-windows":
        return _compare_jam_windows(report, spec)
    raise ConfigurationError(f"reference table {table!r} has unknown kind {kind!r}")


def _get(report: dict, *keys):
    cur = report
    for key in keys:
        if not isinstance(cur, dict) or key not in cur:
            raise ConfigurationError(f"report is missing metric {'.'.join(map(str, keys))}")
        cur = cur[key]
    return cur


def _compare_waves(report: dict, spec: dict) -> list[ComparisonRow]:
    rows: list[ComparisonRow] = []
    loop = spec["loop"]
    blocks = _get(report, "aggregate", "waves", loop)
    if not blocks:
        raise ConfigurationError(f"report has no {loop} waves to compare")
    segment = spec.get("segment", "last")
    agg = blocks[-1] if segment == "last" else blocks[int(segment)]
    means = {"overshoot": agg["overshoot_mean"], "undershoot": agg["undershoot_mean"]}
    stds = {"overshoot": agg["overshoot_std"], "undershoot": agg["undershoot_std"]}

    for feat in spec["features"]:
        wave_i = feat["wave"] - 1
        metric = f"{loop} wave {feat['wave']} {feat['measure']}"
        if wave_i >= len(means[feat["measure"]]):
            rows.append(ComparisonRow(metric, str(feat["reference"]), "absent", "fail",
                                      "fewer waves than the reference"))
            continue
        actual = means[feat["measure"]][wave_i]
        ref = feat["reference"]
        if "tolerance" in feat:
            band = feat["tolerance"]
            ok = abs(actual - ref) <= band
            rows.append(ComparisonRow(metric, f"{ref} ± {band}", f"{actual:.4f}",
                                      "pass" if ok else "fail"))
        else:
            rows.append(ComparisonRow(metric, str(ref), f"{actual:.4f}", "info",
                                      "reference shown for orientation only"))
        std_limit = feat.get("std_limit")
        if std_limit is not None:
            std = stds[feat["measure"]][wave_i]
            rows.append(ComparisonRow(f"{metric} std dev", f"<= {std_limit}", f"{std:.4f}",
                                      "pass" if std <= std_limit else "fail"))

    for rule in spec.get("structure", []):
        rows.append(_structure_rule(rule, means))
    return rows


def _feature_value(means: dict, ref: dict) -> float | None:
    series = means[ref["measure"]]
    i = ref["wave"] - 1
    return series[i] if i < len(series) else None


def _structure_rule(rule: dict, means: dict) -> ComparisonRow:
    kind = rule["rule"]
    if kind == "feature-exceeds":
        head = _feature_value(means, rule["first"])
        others = [_feature_value(means, r) for r in rule["others"]]
        if head is None or any(v is None for v in others):
            return ComparisonRow(rule["label"], kind, "absent", "fail", "fewer waves than required")
        ok = all(head > v for v in others)
        actual = f"{head:.3f} vs {', '.join(f'{v:.3f}' for v in others)}"
        return ComparisonRow(rule["label"], "first feature larger than the others", actual,
                             "pass" if ok else "fail")

    series = means[rule["measure"]]
    waves = [w - 1 for w in rule["waves"]]
    if any(i >= len(series) for i in waves):
        return ComparisonRow(rule["label"], kind, "absent", "fail", "fewer waves than required")
    values = [series[i] for i in waves]
    shown = ", ".join(f"{v:.3f}" for v in values)
    if kind == "exceeds-by":
        margin = rule["margin"]
        head, rest = values[0], values[1:]
        ok = all(head >= v + margin for v in rest)
        return ComparisonRow(rule["label"], f"first exceeds others by >= {margin}", shown,
                             "pass" if ok else "fail")
    if kind == "non-increasing":
        ok = all(a >= b for a, b in zip(values, values[1:]))
        return ComparisonRow(rule["label"], "non-increasing sequence", shown,
                             "pass" if ok else "fail")
    if kind == "decreasing":
        ok = all(a > b for a, b in zip(values, values[1:]))
        return ComparisonRow(rule["label"], "strictly decreasing sequence", shown,
                             "pass" if ok else "fail")
    raise ConfigurationError(f"unknown structure rule {kind!r}")


def _compare_network_baseline(report: dict, spec: dict) -> list[ComparisonRow]:
    rows = []
    agg = _get(report, "aggregate", "network")
    lo, hi = spec["stability_band"]
    stability = agg["path_stability_pct_mean"]
    rows.append(ComparisonRow("path stability", f"[{lo}, {hi}]", f"{stability:.4f}",
                              "pass" if lo <= stability <= hi else "fail"))
    reliability = agg["reliability_pct_mean"]
    rows.append(ComparisonRow("reliability", "100 exactly", f"{reliability:.4f}",
                              "pass" if reliability == 100.0 else "fail"))
    latency = agg["latency_ms_mean"]
    rows.append(ComparisonRow("latency (ms)", str(spec["latency_reference_ms"]),
                              "absent" if latency is None else f"{latency:.4f}", "info",
                              "absolute latency is not reproducible; trend criteria live in the jam table"))
    return rows


def _compare_jam_windows(report: dict, spec: dict) -> list[ComparisonRow]:
    rows = []
    windows = _get(report, "aggregate", "windows")
    for rule in spec["windows"]:
        name = rule["name"]
        if name not in windows:
            raise ConfigurationError(f"report has no metric window named {name!r}")
        win = windows[name]
        reliability = win["reliability_pct_mean"]
        rows.append(ComparisonRow(f"{name} reliability", "100 exactly", f"{reliability:.4f}",
                                  "pass" if reliability == 100.0 else "fail"))
        stability = win["path_stability_pct_mean"]
        if "stability_below" in rule:
            limit = rule["stability_below"]
            rows.append(ComparisonRow(f"{name} path stability", f"< {limit}", f"{stability:.4f}",
                                      "pass" if stability < limit else "fail"))
        if "stability_at_least" in rule:
            limit = rule["stability_at_least"]
            rows.append(ComparisonRow(f"{name} path stability", f">= {limit}", f"{stability:.4f}",
                                      "pass" if stability >= limit else "fail"))
        latency = win["latency_ms_mean"]
        rows.append(ComparisonRow(f"{name} latency (ms)", str(rule["latency_reference_ms"]),
                                  "absent" if latency is None else f"{latency:.4f}", "info",
                                  "absolute latency is not reproducible"))
    ratio = spec["latency_ratio"]
    clean = windows[ratio["clean"]]["latency_ms_mean"]
    jammed = windows[ratio["jammed"]]["latency_ms_mean"]
    need = 1.0 + ratio["min_increase"]
    if clean is None or jammed is None:
        rows.append(ComparisonRow("jammed/clean latency ratio", f">= {need:.2f}", "absent",
                                  "fail", "a window delivered no packets"))
    else:
        factor = jammed / clean
        rows.append(ComparisonRow("jammed/clean latency ratio", f">= {need:.2f}", f"{factor:.3f}",
                                  "pass" if factor >= need else "fail"))
    return rows


def comparison_failed(rows: list[ComparisonRow]) -> bool:
    return any(row.status == "fail" for row in rows)


def format_comparison(rows: list[ComparisonRow]) -> str:
    width = max(len(row.metric) for row in rows)
    lines = []
    for row in rows:
        line = f"{row.metric:<{width}}  expected {row.expected:<24} actual {row.actual:<12} {row.status.upper()}"
        if row.note:
            line += f"  ({row.note})"
        lines.append(line)
    return "\n".join(lines)
