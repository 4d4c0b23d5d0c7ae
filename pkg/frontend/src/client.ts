// Reconnecting WebSocket client for the session wire protocol. Every
// dispatched command resolves: with the server ack, or with a synthesized
// failure on timeout/disconnect. Frames are handed to the owner in order.

import { Ack, Command, CommandKind, TelemetryFrame, makeCommand, parseServerMessage } from "./protocol";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientOptions {
  socketFactory?: SocketFactory;
  ackTimeoutMs?: number;    // command failure deadline (default 3000)
  backoffMs?: number[];     // reconnect schedule, last entry repeats
  setTimeoutFn?: typeof setTimeout;
  clearTimeoutFn?: typeof clearTimeout;
}

export interface ClientCallbacks {
  onFrame?: (frame: TelemetryFrame) => void;
  onStatus?: (status: "connecting" | "connected" | "disconnected") => void;
  onServerClose?: (reason: string) => void;
  /** fired when a new connection opens: history must be cleared, seq may restart */
  onSessionReset?: () => void;
}

interface Pending {
  resolve: (ack: Ack) => void;
  timer: ReturnType<typeof setTimeout>;
}

const DEFAULT_BACKOFF = [500, 1000, 2000, 5000];

export class SessionClient {
  private socket: SocketLike | null = null;
  private pending = new Map<string, Pending>();
  private attempts = 0;
  private closed = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private readonly factory: SocketFactory;
  private readonly ackTimeoutMs: number;
  private readonly backoff: number[];
  private readonly setT: typeof setTimeout;
  private readonly clearT: typeof clearTimeout;

  constructor(
    readonly url: string,
    private readonly callbacks: ClientCallbacks,
    options: ClientOptions = {},
  ) {
    this.factory =
      options.socketFactory ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.ackTimeoutMs = options.ackTimeoutMs ?? 3000;
    this.backoff = options.backoffMs ?? DEFAULT_BACKOFF;
    this.setT = options.setTimeoutFn ?? setTimeout;
    this.clearT = options.clearTimeoutFn ?? clearTimeout;
  }

  get connected(): boolean {
    return this.socket !== null;
  }

  connect(): void {
    if (this.closed) return;
    this.callbacks.onStatus?.("connecting");
    let sock: SocketLike;
    try {
      sock = this.factory(this.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    sock.onopen = () => {
      this.socket = sock;
      this.attempts = 0;
      this.callbacks.onSessionReset?.();
      this.callbacks.onStatus?.("connected");
    };
    sock.onmessage = (ev) => this.handleMessage(ev.data);
    sock.onerror = () => {
      /* close follows; nothing to do here */
    };
    sock.onclose = () => {
      const wasConnected = this.socket !== null;
      this.socket = null;
      this.failAllPending("disconnected");
      this.callbacks.onStatus?.("disconnected");
      if (!this.closed && (wasConnected || true)) this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.closed || this.reconnectTimer !== null) return;
    const delay = this.backoff[Math.min(this.attempts, this.backoff.length - 1)];
    this.attempts += 1;
    this.reconnectTimer = this.setT(() => {
      this.reconnectTimer = null;
      this.connect();
    }, delay);
  }

  private handleMessage(data: string): void {
    const msg = parseServerMessage(data);
    if (msg === null) return;
    if (msg.type === "frame") {
      this.callbacks.onFrame?.(msg);
    } else if (msg.type === "ack") {
      const entry = this.pending.get(msg.id);
      if (entry) {
        this.pending.delete(msg.id);
        this.clearT(entry.timer);
        entry.resolve(msg);
      }
    } else {
      this.callbacks.onServerClose?.(msg.reason);
    }
  }

  /** Send a command; always resolves to an ack-shaped result. */
  dispatch(kind: CommandKind, value?: number): Promise<Ack> {
    const cmd: Command = makeCommand(kind, value);
    if (this.socket === null) {
      return Promise.resolve({ type: "ack", id: cmd.id, ok: false, err: "not connected" });
    }
    const sock = this.socket;
    return new Promise<Ack>((resolve) => {
      const timer = this.setT(() => {
        this.pending.delete(cmd.id);
        resolve({ type: "ack", id: cmd.id, ok: false, err: "timeout waiting for ack" });
      }, this.ackTimeoutMs);
      this.pending.set(cmd.id, { resolve, timer });
      try {
        sock.send(JSON.stringify(cmd));
      } catch {
        this.pending.delete(cmd.id);
        this.clearT(timer);
        resolve({ type: "ack", id: cmd.id, ok: false, err: "send failed" });
      }
    });
  }

  private failAllPending(reason: string): void {
    for (const [id, entry] of this.pending) {
      this.clearT(entry.timer);
      entry.resolve({ type: "ack", id, ok: false, err: reason });
    }
    this.pending.clear();
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) {
      this.clearT(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.failAllPending("client closed");
    this.socket?.close();
    this.socket = null;
  }
}
