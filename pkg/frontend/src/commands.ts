/** Pending-command bookkeeping.
 *
 * Every user action issues exactly one command with a fresh id. The
 * control rendering that id shows "pending" until the matching ack lands
 * or the timeout passes, and the resolution (with any rejection reason)
 * stays available for the inline display.
 */

import type { AckMessage, CommandKind, CommandMessage } from './types';

export const DEFAULT_TIMEOUT_MS = 3000;

export type CommandState = 'pending' | 'accepted' | 'rejected' | 'timed-out';

export interface TrackedCommand {
  commandId: string;
  kind: CommandKind;
  args: Record<string, unknown>;
  issuedAtMs: number;
  state: CommandState;
  reason?: string;
}

export interface TrackerOptions {
  timeoutMs?: number;
  /** Clock injection point for tests; defaults to Date.now. */
  now?: () => number;
}

export class CommandTracker {
  private readonly timeoutMs: number;
  private readonly now: () => number;
  private readonly live = new Map<string, TrackedCommand>();
  private readonly log: TrackedCommand[] = [];
  private serial = 0;

  constructor(opts: TrackerOptions = {}) {
    this.timeoutMs = opts.timeoutMs ?? DEFAULT_TIMEOUT_MS;
    this.now = opts.now ?? Date.now;
  }

  issue(kind: CommandKind, args: Record<string, unknown> = {}): { command: TrackedCommand; message: CommandMessage } {
    this.serial += 1;
    const command: TrackedCommand = {
      commandId: `cmd-${this.serial}`,
      kind,
      args,
      issuedAtMs: this.now(),
      state: 'pending',
    };
    this.live.set(command.commandId, command);
    this.log.push(command);
    const message: CommandMessage = {
      type: 'command',
      command_id: command.commandId,
      kind,
      args,
    };
    return { command, message };
  }

  /** Match an ack to its command; unknown or already-settled ids return null. */
  resolve(ack: AckMessage): TrackedCommand | null {
    const command = this.live.get(ack.command_id);
    if (command === undefined) return null;
    this.live.delete(ack.command_id);
    command.state = ack.status;
    if (ack.reason !== undefined) command.reason = ack.reason;
    return command;
  }

  /** Expire overdue commands, returning the ones that just timed out. */
  sweep(): TrackedCommand[] {
    const cutoff = this.now() - this.timeoutMs;
    const expired: TrackedCommand[] = [];
    for (const command of this.live.values()) {
      if (command.issuedAtMs <= cutoff) {
        command.state = 'timed-out';
        expired.push(command);
      }
    }
    for (const command of expired) this.live.delete(command.commandId);
    return expired;
  }

  pending(): TrackedCommand[] {
    return [...this.live.values()];
  }

  history(): readonly TrackedCommand[] {
    return this.log;
  }
}
