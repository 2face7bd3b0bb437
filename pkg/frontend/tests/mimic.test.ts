import { describe, expect, it } from 'vitest';

import { buildMimic, clampPercent } from '../src/mimic';
import { makeSnapshot } from './fixtures';

describe('clampPercent', () => {
  it('pins values into 0..100 and zeroes the unusable', () => {
    expect(clampPercent(55.5)).toBe(55.5);
    expect(clampPercent(-3)).toBe(0);
    expect(clampPercent(140)).toBe(100);
    expect(clampPercent(Number.NaN)).toBe(0);
  });
});

describe('buildMimic', () => {
  it('splits the left compartment into a water band and the oil above it', () => {
    const view = buildMimic(
      makeSnapshot({ water_level_pct: 40, left_total_pct: 55, oil_level_pct: 61 }),
      true,
    );
    expect(view.leftWaterPct).toBe(40);
    expect(view.leftOilPct).toBe(15);
    expect(view.rightOilPct).toBe(61);
    expect(view.greyed).toBe(false);
  });

  it('never draws a negative oil band when readings disagree', () => {
    const view = buildMimic(makeSnapshot({ water_level_pct: 50, left_total_pct: 47 }), true);
    expect(view.leftOilPct).toBe(0);
  });

  it('with no snapshot yet the mimic is empty and dead', () => {
    const view = buildMimic(null, true);
    expect(view.greyed).toBe(true);
    expect(view.valves).toEqual([]);
    expect(view.network).toBeNull();
    expect(view.simTimeS).toBeNull();
    expect(Object.values(view.controls).some(Boolean)).toBe(false);
  });

  it('disconnection greys the last snapshot and kills every control', () => {
    const view = buildMimic(makeSnapshot(), false);
    expect(view.greyed).toBe(true);
    // Stale levels stay visible so the operator keeps context.
    expect(view.leftWaterPct).toBeGreaterThan(0);
    expect(Object.values(view.controls).some(Boolean)).toBe(false);
  });

  it('the safety latch locks the start paths and frees the reset', () => {
    const view = buildMimic(
      makeSnapshot({ safety_latched: true, trip_reason: 'water level high', pump_running: false }),
      true,
    );
    expect(view.controls.startPump).toBe(false);
    expect(view.controls.setpoints).toBe(false);
    expect(view.controls.valves).toBe(false);
    expect(view.controls.resetLatch).toBe(true);
    expect(view.controls.stopPump).toBe(true);
    expect(view.controls.emergencyStop).toBe(true);
    expect(view.banner).toBe('SAFETY TRIP: water level high');
  });

  it('a healthy connected snapshot opens the normal controls', () => {
    const view = buildMimic(makeSnapshot(), true);
    expect(view.controls).toEqual({
      startPump: true,
      stopPump: true,
      emergencyStop: true,
      resetLatch: false,
      setpoints: true,
      valves: true,
      research: true,
    });
    expect(view.banner).toBeNull();
    expect(view.pumpOn).toBe(true);
    expect(view.simTimeS).toBe(12.5);
  });

  it('flags valves still travelling toward their command', () => {
    const view = buildMimic(makeSnapshot(), true);
    const byId = new Map(view.valves.map((v) => [v.id, v]));
    expect(byId.get('V1')!.moving).toBe(false);
    expect(byId.get('LV1')!.moving).toBe(true);
    expect(byId.get('LV1')!.commandPct).toBe(35);
  });

  it('carries the mesh health block through', () => {
    const view = buildMimic(makeSnapshot({ blacklist: { enabled: true, channels: [14, 15] } }), true);
    expect(view.network).toEqual({
      reliabilityPct: 100.0,
      stabilityPct: 99.4,
      latencyMs: 2480.0,
      blacklistEnabled: true,
      blacklistedChannels: [14, 15],
    });
  });
});
