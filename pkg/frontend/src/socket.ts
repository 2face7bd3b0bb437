/** Reconnecting socket to the separator service.
 *
 * Wraps one browser WebSocket at a time, decodes every frame through the
 * codec, and reconnects on loss with doubling backoff. The socket factory
 * and timer hooks are injectable so tests can drive the lifecycle without
 * a network.
 */

import { decodeServerMessage, encodeCommand } from './codec';
import type { CommandMessage, ServerMessage } from './types';

export type ConnectionStatus = 'connecting' | 'open' | 'reconnecting' | 'closed';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface SocketHandlers {
  onMessage: (msg: ServerMessage) => void;
  onStatus?: (status: ConnectionStatus) => void;
}

export interface SocketOptions {
  token?: string;
  backoffBaseMs?: number;
  backoffMaxMs?: number;
  makeSocket?: (url: string) => SocketLike;
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
}

export function withToken(url: string, token?: string): string {
  if (!token) return url;
  const sep = url.includes('?') ? '&' : '?';
  return `${url}${sep}token=${encodeURIComponent(token)}`;
}

export class ServiceSocket {
  status: ConnectionStatus = 'closed';
  /** Frames that failed to decode; visible for diagnostics. */
  droppedFrames = 0;

  private socket: SocketLike | null = null;
  private attempts = 0;
  private timer: unknown = null;
  private readonly url: string;
  private readonly backoffBaseMs: number;
  private readonly backoffMaxMs: number;
  private readonly makeSocket: (url: string) => SocketLike;
  private readonly schedule: (fn: () => void, ms: number) => unknown;
  private readonly cancel: (handle: unknown) => void;

  constructor(url: string, private readonly handlers: SocketHandlers, opts: SocketOptions = {}) {
    this.url = withToken(url, opts.token);
    this.backoffBaseMs = opts.backoffBaseMs ?? 1000;
    this.backoffMaxMs = opts.backoffMaxMs ?? 30000;
    this.makeSocket = opts.makeSocket ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancel = opts.cancel ?? ((handle) => clearTimeout(handle as number));
  }

  connect(): void {
    if (this.socket !== null) return;
    this.setStatus(this.attempts === 0 ? 'connecting' : 'reconnecting');
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.setStatus('open');
    };
    socket.onmessage = (ev) => {
      const msg = decodeServerMessage(ev.data);
      if (msg === null) {
        this.droppedFrames += 1;
        return;
      }
      this.handlers.onMessage(msg);
    };
    socket.onclose = () => {
      this.socket = null;
      if (this.status === 'closed') return;
      this.setStatus('reconnecting');
      const delay = this.delayForAttempt(this.attempts);
      this.attempts += 1;
      this.timer = this.schedule(() => {
        this.timer = null;
        this.connect();
      }, delay);
    };
    socket.onerror = () => {
      // The close handler owns recovery; errors alone carry no state.
    };
  }

  delayForAttempt(attempt: number): number {
    return Math.min(this.backoffBaseMs * 2 ** attempt, this.backoffMaxMs);
  }

  /** Deliver a command if the socket is open; false means it never left. */
  send(cmd: CommandMessage): boolean {
    if (this.socket === null || this.status !== 'open') return false;
    this.socket.send(encodeCommand(cmd));
    return true;
  }

  close(): void {
    this.setStatus('closed');
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
    if (this.socket !== null) {
      const socket = this.socket;
      this.socket = null;
      socket.close();
    }
  }

  private setStatus(status: ConnectionStatus): void {
    if (this.status === status) return;
    this.status = status;
    this.handlers.onStatus?.(status);
  }
}
