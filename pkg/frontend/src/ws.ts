// Telemetry session: connect, parse, hand messages to the state layer,
// and reconnect with capped exponential backoff when the link drops.

import { parseMessage, setParamMessage, type ParamKey, type ServerMessage } from "./protocol.js";

export interface SocketLike {
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  readyState: number;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientHandlers {
  onMessage: (msg: ServerMessage) => void;
  onStatus: (status: "connecting" | "open" | "closed") => void;
}

const OPEN = 1;

export class TelemetryClient {
  private sock: SocketLike | null = null;
  private stopped = false;
  retryMs = 1000;
  readonly maxRetryMs = 8000;

  constructor(
    private readonly url: string,
    private readonly handlers: ClientHandlers,
    private readonly factory: SocketFactory,
    private readonly schedule: (fn: () => void, ms: number) => void = (fn, ms) => {
      setTimeout(fn, ms);
    },
  ) {}

  connect(): void {
    if (this.stopped) return;
    this.handlers.onStatus("connecting");
    const sock = this.factory(this.url);
    this.sock = sock;
    sock.onopen = () => {
      this.retryMs = 1000; // fresh link, reset the backoff
      this.handlers.onStatus("open");
    };
    sock.onmessage = (ev) => {
      if (typeof ev.data !== "string") return;
      const msg = parseMessage(ev.data);
      if (msg) this.handlers.onMessage(msg);
    };
    sock.onclose = () => {
      this.handlers.onStatus("closed");
      if (!this.stopped) {
        this.schedule(() => this.connect(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, this.maxRetryMs);
      }
    };
    sock.onerror = () => {
      // onclose follows and owns the reconnect
    };
  }

  /** Queue a live parameter update; false when the link is down. */
  setParam(key: ParamKey, value: number): boolean {
    if (!this.sock || this.sock.readyState !== OPEN) return false;
    this.sock.send(setParamMessage(key, value));
    return true;
  }

  close(): void {
    this.stopped = true;
    this.sock?.close();
  }
}

export function telemetryUrl(loc: { protocol: string; host: string }): string {
  const scheme = loc.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${loc.host}/telemetry`;
}
