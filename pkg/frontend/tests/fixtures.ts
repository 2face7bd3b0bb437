/** Shared builders for tests. */

import type { StateSnapshot } from '../src/types';

/** A plausible mid-run snapshot; override what the test cares about. */
export function makeSnapshot(overrides: Partial<StateSnapshot> = {}): StateSnapshot {
  return {
    time_s: 12.5,
    water_level_pct: 40.2,
    oil_level_pct: 59.8,
    left_total_pct: 55.1,
    setpoint_w: 40.0,
    setpoint_o: 60.0,
    valves: {
      V1: { position_pct: 100.0, command_pct: 100.0 },
      LV1: { position_pct: 32.0, command_pct: 35.0 },
    },
    pump_running: true,
    safety_latched: false,
    trip_reason: null,
    sensors: { P1: 118.0, P2: 41.3, P3: 60.1, T: 65.0 },
    network: { reliability_pct: 100.0, path_stability_pct: 99.4, latency_ms: 2480.0 },
    blacklist: { enabled: false, channels: [] },
    alarm_count: 0,
    ...overrides,
  };
}
