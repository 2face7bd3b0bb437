export { decodeServerMessage, decodeSnapshot, encodeCommand } from './codec';
export { CommandTracker, DEFAULT_TIMEOUT_MS } from './commands';
export type { CommandState, TrackedCommand } from './commands';
export { buildMimic, clampPercent } from './mimic';
export type { ControlGates, MimicView, ValveView } from './mimic';
export { UiSession } from './session';
export type { Banner, Transport } from './session';
export { ServiceSocket, withToken } from './socket';
export type { ConnectionStatus, SocketLike } from './socket';
export { DEFAULT_CAPACITY, TrendBuffer } from './trends';
export type { TrendPoint } from './trends';
export type {
  AckMessage,
  CommandKind,
  CommandMessage,
  ServerMessage,
  SnapshotMessage,
  StateSnapshot,
} from './types';
