"""Plot rendering for run reports.

Everything draws through the Agg backend so the CLI can emit files from a
headless box. Figures are written next to the report they describe.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

LEVEL_COLORS = {"water": "tab:blue", "oil": "tab:orange"}


def render_levels(run: dict, path: str | Path) -> Path:
    """Two-panel trend for one seed: levels over setpoints, then actuators."""
    series = run["series"]
    t = series["time_s"]
    fig, (ax_lvl, ax_act) = plt.subplots(
        2, 1, sharex=True, figsize=(9, 6), height_ratios=[2, 1]
    )
    ax_lvl.plot(t, series["water_level_pct"], color=LEVEL_COLORS["water"], label="water level")
    ax_lvl.plot(t, series["oil_level_pct"], color=LEVEL_COLORS["oil"], label="oil level")
    ax_lvl.plot(t, series["setpoint_w"], color=LEVEL_COLORS["water"], ls="--", lw=1, label="water setpoint")
    ax_lvl.plot(t, series["setpoint_o"], color=LEVEL_COLORS["oil"], ls="--", lw=1, label="oil setpoint")
    for i, (at, alarm) in enumerate(_alarm_marks(series)):
        ax_lvl.axvline(at, color="tab:red", alpha=0.4, lw=1, label="alarm" if i == 0 else None)
    ax_lvl.set_ylabel("level [%]")
    ax_lvl.legend(loc="best", fontsize=8)
    ax_lvl.grid(alpha=0.3)

    ax_act.plot(t, series["lv1_pct"], color=LEVEL_COLORS["water"], label="LV1 opening")
    ax_act.plot(t, series["lv2_pct"], color=LEVEL_COLORS["oil"], label="LV2 opening")
    ax_act.set_xlabel("time [s]")
    ax_act.set_ylabel("opening [%]")
    ax_act.legend(loc="best", fontsize=8)
    ax_act.grid(alpha=0.3)

    fig.suptitle(f"seed {run['seed']}")
    return _save(fig, path)


def render_network(report: dict, path: str | Path) -> Path:
    """Per-window network metrics averaged over seeds, one group per window."""
    windows = report["aggregate"]["windows"]
    if not windows:
        windows = {"whole run": report["aggregate"]["network"]}
    names = list(windows)
    stability = [windows[n]["path_stability_pct_mean"] for n in names]
    reliability = [windows[n]["reliability_pct_mean"] for n in names]
    latency = [windows[n]["latency_ms_mean"] for n in names]

    fig, (ax_pct, ax_lat) = plt.subplots(1, 2, figsize=(10, 4))
    x = range(len(names))
    ax_pct.bar([i - 0.2 for i in x], stability, width=0.4, label="path stability", color="tab:purple")
    ax_pct.bar([i + 0.2 for i in x], reliability, width=0.4, label="reliability", color="tab:green")
    ax_pct.set_xticks(list(x), names, rotation=15)
    ax_pct.set_ylabel("[%]")
    ax_pct.set_ylim(0, 105)
    ax_pct.legend(fontsize=8)
    ax_pct.grid(alpha=0.3, axis="y")

    ax_lat.bar(list(x), [v if v is not None else 0.0 for v in latency], color="tab:gray")
    ax_lat.set_xticks(list(x), names, rotation=15)
    ax_lat.set_ylabel("mean latency [ms]")
    ax_lat.grid(alpha=0.3, axis="y")

    fig.suptitle(report["recipe"]["name"])
    return _save(fig, path)


def render_report_figures(report: dict, out_dir: str | Path) -> list[Path]:
    """All figures for a report: one trend per seed plus the network rollup."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = report["recipe"]["name"]
    written = []
    for run in report["runs"]:
        written.append(render_levels(run, out_dir / f"{name}-seed{run['seed']}-levels.png"))
    written.append(render_network(report, out_dir / f"{name}-network.png"))
    return written


def _alarm_marks(series: dict) -> list[tuple[float, str]]:
    return [
        (t, alarm)
        for t, alarm in zip(series["time_s"], series["alarms"])
        if alarm
    ]


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
