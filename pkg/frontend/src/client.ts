// WebSocket client for the robot: request/reply, parameter subscription,
// telemetry stream, and automatic reconnection with capped backoff.

import {
  backoffDelayMs,
  ParamEvent,
  ParamValue,
  Reply,
  RequestTracker,
  TelemetryFrame,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientHandlers {
  onParam?: (event: ParamEvent) => void;
  onTelemetry?: (frame: TelemetryFrame) => void;
  onStatus?: (connected: boolean, attempt: number) => void;
}

export class RobotClient {
  private tracker = new RequestTracker();
  private socket: SocketLike | null = null;
  private attempt = 0;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private handlers: ClientHandlers,
    private factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    if (this.closed) return;
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempt = 0;
      this.handlers.onStatus?.(true, 0);
      void this.request({ op: "subscribe", path: "/" });
    };
    socket.onmessage = (event) => this.handleMessage(event.data);
    socket.onclose = () => this.scheduleReconnect();
    socket.onerror = () => {
      /* close follows */
    };
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    this.tracker.abortAll("connection lost");
    this.handlers.onStatus?.(false, this.attempt);
    const delay = backoffDelayMs(this.attempt);
    this.attempt += 1;
    this.timer = setTimeout(() => this.connect(), delay);
  }

  private handleMessage(data: string): void {
    let message: Record<string, unknown>;
    try {
      message = JSON.parse(data);
    } catch {
      return;
    }
    if (this.tracker.settle(message as { id?: number })) return;
    if (message.event === "param") {
      this.handlers.onParam?.(message as unknown as ParamEvent);
    } else if (message.event === "telemetry") {
      this.handlers.onTelemetry?.(message as unknown as TelemetryFrame);
    }
  }

  request(body: Record<string, unknown>): Promise<Reply> {
    if (!this.socket) return Promise.reject(new Error("not connected"));
    const { id, promise } = this.tracker.issue();
    this.socket.send(JSON.stringify({ ...body, id }));
    return promise;
  }

  set(path: string, value: ParamValue): Promise<Reply> {
    return this.request({ op: "set", path, value });
  }

  list(path = "/"): Promise<Reply> {
    return this.request({ op: "list", path });
  }

  close(): void {
    this.closed = true;
    if (this.timer) clearTimeout(this.timer);
    this.socket?.close();
  }
}
