// Console-side state: last frame/report/params plus a bounded pose trail.

import type { Pose, Telemetry } from "./protocol.js";
import { decodeFrame } from "./frame.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

/** Fixed-capacity ring buffer for the trajectory trail. */
export class PoseRing {
  private buf: Pose[];
  private head = 0;
  private count = 0;

  constructor(readonly capacity = 10000) {
    this.buf = new Array(capacity);
  }

  push(p: Pose): void {
    this.buf[this.head] = p;
    this.head = (this.head + 1) % this.capacity;
    if (this.count < this.capacity) this.count++;
  }

  get length(): number {
    return this.count;
  }

  /** Oldest-first snapshot. */
  toArray(): Pose[] {
    const out: Pose[] = new Array(this.count);
    const start = (this.head - this.count + this.capacity) % this.capacity;
    for (let i = 0; i < this.count; i++) {
      out[i] = this.buf[(start + i) % this.capacity];
    }
    return out;
  }

  clear(): void {
    this.head = 0;
    this.count = 0;
  }
}

export class ConsoleState {
  status: ConnectionStatus = "connecting";
  latest: Telemetry | null = null;
  frame: Uint8Array | null = null; // decoded 65536-byte grayscale
  trail = new PoseRing(10000);
  lastError: string | null = null;

  applyTelemetry(msg: Telemetry): void {
    // exactly one frame is kept; no queue growth however fast the feed is
    this.latest = msg;
    this.frame = decodeFrame(msg.frame);
    this.trail.push(msg.pose);
  }

  applyError(message: string): void {
    this.lastError = message;
  }

  /** Displayed params mirror the last acknowledged server values. */
  get params(): Record<string, number> {
    return this.latest ? this.latest.params : {};
  }
}
