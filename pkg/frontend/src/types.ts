/** Wire shapes shared with the separator service socket. */

export interface ValveState {
  position_pct: number;
  command_pct: number;
}

export interface NetworkStats {
  reliability_pct: number;
  path_stability_pct: number;
  latency_ms: number | null;
  [extra: string]: unknown;
}

export interface BlacklistState {
  enabled: boolean;
  channels: number[];
}

export interface StateSnapshot {
  time_s: number;
  water_level_pct: number;
  oil_level_pct: number;
  left_total_pct: number;
  setpoint_w: number;
  setpoint_o: number;
  valves: Record<string, ValveState>;
  pump_running: boolean;
  safety_latched: boolean;
  trip_reason: string | null;
  sensors: Record<string, number | null>;
  network: NetworkStats;
  blacklist: BlacklistState;
  alarm_count: number;
}

export type CommandKind =
  | 'stop_pump'
  | 'start_pump'
  | 'set_valve'
  | 'set_setpoint'
  | 'emergency_stop'
  | 'reset_latch'
  | 'set_blacklist'
  | 'start_jam'
  | 'stop_jam';

export interface CommandMessage {
  type: 'command';
  command_id: string;
  kind: CommandKind;
  args: Record<string, unknown>;
}

export interface SnapshotMessage {
  type: 'snapshot';
  snapshot: StateSnapshot;
}

export interface AckMessage {
  type: 'ack';
  command_id: string;
  status: 'accepted' | 'rejected';
  reason?: string;
}

export interface ErrorMessage {
  type: 'error';
  reason: string;
}

export type ServerMessage = SnapshotMessage | AckMessage | ErrorMessage;
