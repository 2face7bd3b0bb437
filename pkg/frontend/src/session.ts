/** One operator session: latest state, trends, pending commands, banners.
 *
 * The session owns no socket; it consumes decoded messages and connection
 * status from whatever transport the app wires in, which keeps every rule
 * here synchronous and testable.
 */

import { CommandTracker, type TrackedCommand, type TrackerOptions } from './commands';
import { buildMimic, type MimicView } from './mimic';
import type { ConnectionStatus } from './socket';
import { TrendBuffer } from './trends';
import type { CommandKind, CommandMessage, ServerMessage, StateSnapshot } from './types';

export interface Transport {
  send(cmd: CommandMessage): boolean;
}

export interface Banner {
  kind: 'timeout' | 'error' | 'transport';
  text: string;
}

export interface SessionOptions extends TrackerOptions {
  trendCapacity?: number;
}

export class UiSession {
  latest: StateSnapshot | null = null;
  status: ConnectionStatus = 'closed';
  readonly trends: TrendBuffer;
  readonly tracker: CommandTracker;
  readonly banners: Banner[] = [];
  /** Bumped on every state change; the render loop keys off it. */
  revision = 0;

  constructor(private readonly transport: Transport, opts: SessionOptions = {}) {
    this.trends = new TrendBuffer(opts.trendCapacity);
    this.tracker = new CommandTracker(opts);
  }

  get connected(): boolean {
    return this.status === 'open';
  }

  handleStatus(status: ConnectionStatus): void {
    this.status = status;
    this.revision += 1;
  }

  handleMessage(msg: ServerMessage): void {
    switch (msg.type) {
      case 'snapshot':
        this.latest = msg.snapshot;
        this.trends.push(msg.snapshot);
        // The 5 Hz stream doubles as the timeout clock.
        for (const expired of this.tracker.sweep()) {
          this.banners.push({
            kind: 'timeout',
            text: `${expired.kind} (${expired.commandId}) got no answer`,
          });
        }
        break;
      case 'ack':
        this.tracker.resolve(msg);
        break;
      case 'error':
        this.banners.push({ kind: 'error', text: msg.reason });
        break;
    }
    this.revision += 1;
  }

  /** Issue one command; the returned record tracks pending/ack state. */
  send(kind: CommandKind, args: Record<string, unknown> = {}): TrackedCommand {
    const { command, message } = this.tracker.issue(kind, args);
    if (!this.transport.send(message)) {
      this.tracker.resolve({
        type: 'ack',
        command_id: command.commandId,
        status: 'rejected',
        reason: 'not connected',
      });
      this.banners.push({ kind: 'transport', text: `${kind} not sent: socket closed` });
    }
    this.revision += 1;
    return command;
  }

  startJam(channels: number[], intensity = 1.0): TrackedCommand {
    return this.send('start_jam', { channels, intensity });
  }

  stopJam(): TrackedCommand {
    return this.send('stop_jam');
  }

  dismissBanner(index: number): void {
    this.banners.splice(index, 1);
    this.revision += 1;
  }

  view(): MimicView {
    return buildMimic(this.latest, this.connected);
  }
}
