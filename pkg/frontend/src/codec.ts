/** Defensive decoding of socket frames.
 *
 * The service is trusted but the connection is not: a truncated frame or a
 * proxy error page must never take the mimic down, so anything that does
 * not decode into a known message shape comes back null and the caller
 * just drops it.
 */

import type { AckMessage, CommandMessage, ServerMessage, StateSnapshot } from './types';

function isNumber(v: unknown): v is number {
  return typeof v === 'number' && Number.isFinite(v);
}

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === 'object' && v !== null && !Array.isArray(v);
}

const NUMERIC_FIELDS = [
  'time_s',
  'water_level_pct',
  'oil_level_pct',
  'left_total_pct',
  'setpoint_w',
  'setpoint_o',
  'alarm_count',
] as const;

export function decodeSnapshot(raw: unknown): StateSnapshot | null {
  if (!isRecord(raw)) return null;
  for (const field of NUMERIC_FIELDS) {
    if (!isNumber(raw[field])) return null;
  }
  if (typeof raw.pump_running !== 'boolean' || typeof raw.safety_latched !== 'boolean') {
    return null;
  }
  if (raw.trip_reason !== null && typeof raw.trip_reason !== 'string') return null;
  if (!isRecord(raw.valves) || !isRecord(raw.sensors) || !isRecord(raw.network)) return null;
  for (const valve of Object.values(raw.valves)) {
    if (!isRecord(valve) || !isNumber(valve.position_pct) || !isNumber(valve.command_pct)) {
      return null;
    }
  }
  const blacklist = raw.blacklist;
  if (!isRecord(blacklist) || typeof blacklist.enabled !== 'boolean' || !Array.isArray(blacklist.channels)) {
    return null;
  }
  return raw as unknown as StateSnapshot;
}

function decodeAck(raw: Record<string, unknown>): AckMessage | null {
  if (typeof raw.command_id !== 'string') return null;
  if (raw.status !== 'accepted' && raw.status !== 'rejected') return null;
  if (raw.reason !== undefined && typeof raw.reason !== 'string') return null;
  return raw as unknown as AckMessage;
}

export function decodeServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (!isRecord(raw)) return null;
  switch (raw.type) {
    case 'snapshot': {
      const snapshot = decodeSnapshot(raw.snapshot);
      return snapshot === null ? null : { type: 'snapshot', snapshot };
    }
    case 'ack':
      return decodeAck(raw);
    case 'error':
      return typeof raw.reason === 'string' ? { type: 'error', reason: raw.reason } : null;
    default:
      return null;
  }
}

export function encodeCommand(cmd: CommandMessage): string {
  return JSON.stringify(cmd);
}
