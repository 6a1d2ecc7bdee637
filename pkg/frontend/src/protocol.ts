// Wire protocol types and request bookkeeping for the robot's config/telemetry
// socket (newline-delimited JSON over a WebSocket).

export type ParamValue = number | boolean | string;

export interface ParamMeta {
  min: number;
  max: number;
  step: number;
  default: number;
}

export interface ParamEntry {
  path: string;
  value: ParamValue;
  meta: ParamMeta | null;
}

export interface ParamEvent {
  event: "param";
  path: string;
  value: ParamValue;
  seq: number;
}

export interface TelemetryFrame {
  cycle: number;
  t_us: number;
  targets: number[];
  positions: number[];
  attitude: { roll: number; pitch: number; yaw: number };
  fall_state: string;
  behavior_state: string;
  battery_v: number;
  detections: {
    ball: { bearing: number; distance: number | null; age_s: number } | null;
    goal_posts: number;
    crossings: number;
  };
  notices: string[];
  warnings: number;
}

export interface Reply {
  id: number;
  ok: boolean;
  error?: string;
  value?: ParamValue;
  entries?: ParamEntry[];
  data?: string;
  names?: string[];
}

// Reconnect backoff: 1 s, 2 s, 4 s, ... capped at 10 s.
export function backoffDelayMs(attempt: number): number {
  return Math.min(10000, 1000 * 2 ** Math.max(0, attempt));
}

interface Pending {
  resolve: (reply: Reply) => void;
  reject: (err: Error) => void;
}

// Correlates request ids with their replies; events pass through untouched.
export class RequestTracker {
  private nextId = 0;
  private pending = new Map<number, Pending>();

  issue(): { id: number; promise: Promise<Reply> } {
    const id = ++this.nextId;
    let entry: Pending;
    const promise = new Promise<Reply>((resolve, reject) => {
      entry = { resolve, reject };
    });
    this.pending.set(id, entry!);
    return { id, promise };
  }

  /** Returns true when the message settled a pending request. */
  settle(message: { id?: number }): boolean {
    if (typeof message.id !== "number") return false;
    const entry = this.pending.get(message.id);
    if (!entry) return false;
    this.pending.delete(message.id);
    entry.resolve(message as Reply);
    return true;
  }

  abortAll(reason: string): void {
    for (const entry of this.pending.values()) {
      entry.reject(new Error(reason));
    }
    this.pending.clear();
  }

  get inFlight(): number {
    return this.pending.size;
  }
}
