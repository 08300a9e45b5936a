import { describe, expect, it } from "vitest";

import type { ServerMessage } from "../src/protocol.js";
import { TelemetryClient, telemetryUrl, type SocketLike } from "../src/ws.js";

class FakeSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  readyState = 0;
  sent: string[] = [];

  open() {
    this.readyState = 1;
    this.onopen?.();
  }

  drop() {
    this.readyState = 3;
    this.onclose?.();
  }

  send(data: string) {
    this.sent.push(data);
  }

  close() {
    this.drop();
  }
}

function harness() {
  const sockets: FakeSocket[] = [];
  const timers: { fn: () => void; ms: number }[] = [];
  const messages: ServerMessage[] = [];
  const statuses: string[] = [];
  const client = new TelemetryClient(
    "ws://x/telemetry",
    {
      onMessage: (m) => messages.push(m),
      onStatus: (s) => statuses.push(s),
    },
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    (fn, ms) => timers.push({ fn, ms }),
  );
  return { client, sockets, timers, messages, statuses };
}

describe("TelemetryClient", () => {
  it("delivers parsed messages and drops junk", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].open();
    h.sockets[0].onmessage?.({ data: JSON.stringify({ type: "error", message: "nope" }) });
    h.sockets[0].onmessage?.({ data: "pong" });
    h.sockets[0].onmessage?.({ data: 123 });
    expect(h.messages).toEqual([{ type: "error", message: "nope" }]);
  });

  it("reconnects with doubling capped backoff and resets on success", () => {
    const h = harness();
    h.client.connect();
    expect(h.statuses).toEqual(["connecting"]);
    h.sockets[0].drop();
    expect(h.timers.map((t) => t.ms)).toEqual([1000]);
    h.timers[0].fn(); // first retry
    h.sockets[1].drop();
    h.timers[1].fn();
    h.sockets[2].drop();
    h.timers[2].fn();
    h.sockets[3].drop();
    h.timers[3].fn();
    h.sockets[4].drop();
    expect(h.timers.map((t) => t.ms)).toEqual([1000, 2000, 4000, 8000, 8000]);
    h.timers[4].fn();
    h.sockets[5].open(); // success resets the backoff
    h.sockets[5].drop();
    expect(h.timers[5].ms).toBe(1000);
  });

  it("stops reconnecting after close()", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].open();
    h.client.close();
    expect(h.timers).toEqual([]);
    expect(h.statuses[h.statuses.length - 1]).toBe("closed");
  });

  it("setParam only succeeds on an open link", () => {
    const h = harness();
    h.client.connect();
    expect(h.client.setParam("threshold", 140)).toBe(false);
    h.sockets[0].open();
    expect(h.client.setParam("threshold", 140)).toBe(true);
    expect(JSON.parse(h.sockets[0].sent[0])).toEqual({
      type: "set_param",
      key: "threshold",
      value: 140,
    });
  });
});

describe("telemetryUrl", () => {
  it("maps http(s) to ws(s) on the same host", () => {
    expect(telemetryUrl({ protocol: "http:", host: "127.0.0.1:27727" })).toBe(
      "ws://127.0.0.1:27727/telemetry",
    );
    expect(telemetryUrl({ protocol: "https:", host: "robot.example" })).toBe(
      "wss://robot.example/telemetry",
    );
  });
});
