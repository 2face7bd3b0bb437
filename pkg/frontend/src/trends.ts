/** Bounded trend history built from the snapshot stream.
 *
 * There is no history endpoint; charts show exactly what arrived while the
 * page was open. The buffer is a fixed ring so a day-long session costs
 * the same memory as the configured window (default ten minutes at the
 * 5 Hz publish rate).
 */

import type { StateSnapshot } from './types';

export interface TrendPoint {
  time_s: number;
  water_level_pct: number;
  oil_level_pct: number;
  setpoint_w: number;
  setpoint_o: number;
}

export const DEFAULT_CAPACITY = 10 * 60 * 5;

export class TrendBuffer {
  private readonly buf: TrendPoint[];
  private next = 0;
  private filled = 0;

  constructor(readonly capacity: number = DEFAULT_CAPACITY) {
    if (!Number.isInteger(capacity) || capacity < 1) {
      throw new Error(`capacity must be a positive integer, got ${capacity}`);
    }
    this.buf = new Array<TrendPoint>(capacity);
  }

  push(snap: StateSnapshot): void {
    this.buf[this.next] = {
      time_s: snap.time_s,
      water_level_pct: snap.water_level_pct,
      oil_level_pct: snap.oil_level_pct,
      setpoint_w: snap.setpoint_w,
      setpoint_o: snap.setpoint_o,
    };
    this.next = (this.next + 1) % this.capacity;
    this.filled = Math.min(this.filled + 1, this.capacity);
  }

  get size(): number {
    return this.filled;
  }

  /** Oldest to newest. */
  points(): TrendPoint[] {
    if (this.filled < this.capacity) return this.buf.slice(0, this.filled);
    return [...this.buf.slice(this.next), ...this.buf.slice(0, this.next)];
  }

  latest(): TrendPoint | null {
    if (this.filled === 0) return null;
    return this.buf[(this.next - 1 + this.capacity) % this.capacity] ?? null;
  }

  spanSeconds(): number {
    const pts = this.points();
    if (pts.length < 2) return 0;
    return pts[pts.length - 1]!.time_s - pts[0]!.time_s;
  }

  clear(): void {
    this.next = 0;
    this.filled = 0;
  }
}
