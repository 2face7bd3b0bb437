/** Pure view model for the mimic diagram.
 *
 * Everything the DOM layer draws comes out of buildMimic, so the lockout
 * and disconnection rules live here where they are testable. The mimic is
 * stateless with respect to the plant: any snapshot rebuilds the whole
 * view.
 */

import type { StateSnapshot } from './types';

export interface ValveView {
  id: string;
  positionPct: number;
  commandPct: number;
  /** Actuator still travelling toward its command. */
  moving: boolean;
}

export interface ControlGates {
  startPump: boolean;
  stopPump: boolean;
  emergencyStop: boolean;
  resetLatch: boolean;
  setpoints: boolean;
  valves: boolean;
  research: boolean;
}

export interface MimicView {
  connected: boolean;
  /** Drawn dimmed with controls dead when true. */
  greyed: boolean;
  leftWaterPct: number;
  leftOilPct: number;
  rightOilPct: number;
  setpointWaterPct: number;
  setpointOilPct: number;
  pumpOn: boolean;
  latched: boolean;
  banner: string | null;
  valves: ValveView[];
  controls: ControlGates;
  network: {
    reliabilityPct: number;
    stabilityPct: number;
    latencyMs: number | null;
    blacklistEnabled: boolean;
    blacklistedChannels: number[];
  } | null;
  alarmCount: number;
  simTimeS: number | null;
}

export function clampPercent(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(100, Math.max(0, value));
}

const DEAD_CONTROLS: ControlGates = {
  startPump: false,
  stopPump: false,
  emergencyStop: false,
  resetLatch: false,
  setpoints: false,
  valves: false,
  research: false,
};

const EMPTY_VIEW: MimicView = {
  connected: false,
  greyed: true,
  leftWaterPct: 0,
  leftOilPct: 0,
  rightOilPct: 0,
  setpointWaterPct: 0,
  setpointOilPct: 0,
  pumpOn: false,
  latched: false,
  banner: null,
  valves: [],
  controls: DEAD_CONTROLS,
  network: null,
  alarmCount: 0,
  simTimeS: null,
};

export function buildMimic(snapshot: StateSnapshot | null, connected: boolean): MimicView {
  if (snapshot === null) {
    return { ...EMPTY_VIEW, connected };
  }
  const latched = snapshot.safety_latched;
  const controls: ControlGates = connected
    ? {
        // The latch locks every start path; reset stays live, and the
        // stop side is always offered because the service always takes it.
        startPump: !latched,
        stopPump: true,
        emergencyStop: true,
        resetLatch: latched,
        setpoints: !latched,
        valves: !latched,
        research: true,
      }
    : DEAD_CONTROLS;

  const water = clampPercent(snapshot.water_level_pct);
  return {
    connected,
    greyed: !connected,
    leftWaterPct: water,
    leftOilPct: Math.max(0, clampPercent(snapshot.left_total_pct) - water),
    rightOilPct: clampPercent(snapshot.oil_level_pct),
    setpointWaterPct: clampPercent(snapshot.setpoint_w),
    setpointOilPct: clampPercent(snapshot.setpoint_o),
    pumpOn: snapshot.pump_running,
    latched,
    banner: latched ? `SAFETY TRIP: ${snapshot.trip_reason ?? 'latched'}` : null,
    valves: Object.entries(snapshot.valves).map(([id, v]) => ({
      id,
      positionPct: clampPercent(v.position_pct),
      commandPct: clampPercent(v.command_pct),
      moving: Math.abs(v.position_pct - v.command_pct) > 1e-9,
    })),
    controls,
    network: {
      reliabilityPct: snapshot.network.reliability_pct,
      stabilityPct: snapshot.network.path_stability_pct,
      latencyMs: snapshot.network.latency_ms,
      blacklistEnabled: snapshot.blacklist.enabled,
      blacklistedChannels: snapshot.blacklist.channels,
    },
    alarmCount: snapshot.alarm_count,
    simTimeS: snapshot.time_s,
  };
}
