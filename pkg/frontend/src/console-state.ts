// Client-side session state: bounded frame history in seq order, the event
// feed, and derived readouts (mode, measured output edge rate).

import { RingBuffer } from "./ring-buffer";
import { FrameEvent, TelemetryFrame } from "./protocol";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface FeedEntry extends FrameEvent {
  seq: number;
}

const DEFAULT_HISTORY_S = 10;
const EVENT_FEED_LIMIT = 200;

export class ConsoleState {
  readonly frames: RingBuffer<TelemetryFrame>;
  readonly eventFeed: FeedEntry[] = [];
  status: ConnectionStatus = "connecting";
  selectedFrequency = 6;
  private lastSeq = -1;
  private dropped = 0;

  constructor(telemetryHz = 30, historySeconds = DEFAULT_HISTORY_S) {
    this.frames = new RingBuffer<TelemetryFrame>(
      Math.max(1, Math.round(telemetryHz * historySeconds)),
    );
  }

  /** Accept a frame only if it advances seq; stale/duplicate frames are counted, not shown. */
  ingest(frame: TelemetryFrame): boolean {
    if (frame.seq <= this.lastSeq) {
      this.dropped += 1;
      return false;
    }
    this.lastSeq = frame.seq;
    this.frames.push(frame);
    for (const ev of frame.events) {
      this.eventFeed.push({ ...ev, seq: frame.seq });
    }
    if (this.eventFeed.length > EVENT_FEED_LIMIT) {
      this.eventFeed.splice(0, this.eventFeed.length - EVENT_FEED_LIMIT);
    }
    return true;
  }

  /** Seq restarts are expected after a service restart; history is wiped. */
  reset(): void {
    this.lastSeq = -1;
    this.frames.clear();
    this.eventFeed.length = 0;
  }

  get droppedFrames(): number {
    return this.dropped;
  }

  get mode(): string {
    return this.frames.last()?.mode ?? "-";
  }

  get currentSeq(): number {
    return this.lastSeq;
  }

  /** Rising edges of the output bit per second over the trailing window. */
  edgeRate(windowSeconds = 4): number | null {
    const arr = this.frames.toArray();
    if (arr.length < 2) return null;
    const tEnd = arr[arr.length - 1].t_sim;
    const from = tEnd - windowSeconds;
    let edges = 0;
    let t0: number | null = null;
    for (let i = 1; i < arr.length; i++) {
      if (arr[i].t_sim < from) continue;
      if (t0 === null) t0 = arr[i - 1].t_sim;
      if (arr[i - 1].out === 0 && arr[i].out === 1) edges += 1;
    }
    if (t0 === null || tEnd <= t0) return null;
    return edges / (tEnd - t0);
  }
}
