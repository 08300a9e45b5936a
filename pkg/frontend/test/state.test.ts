import { describe, expect, it } from "vitest";

import { encodeFrameBase64, FRAME_BYTES } from "../src/frame.js";
import type { Telemetry } from "../src/protocol.js";
import { ConsoleState, PoseRing } from "../src/state.js";

function telemetry(tick: number, x = 0): Telemetry {
  const frame = new Uint8Array(FRAME_BYTES);
  frame[0] = tick % 256;
  return {
    type: "telemetry",
    tick,
    pose: { x, y: 0, heading: 0 },
    mode: "target_nav",
    steer: 0,
    e_dis: 1,
    target_index: 0,
    report: { closest_x: 0, closest_y: 0, closest_dis: 1e6, direction: 0 },
    params: { threshold: 100 },
    areas: {
      distant_x_max: 50,
      forbidden_x_min: 240,
      safe_y_low: 10,
      safe_y_high: 245,
      right_y: [15, 127],
      left_y: [128, 240],
    },
    frame: encodeFrameBase64(frame),
  };
}

describe("PoseRing", () => {
  it("keeps insertion order below capacity", () => {
    const ring = new PoseRing(5);
    for (let i = 0; i < 3; i++) ring.push({ x: i, y: 0, heading: 0 });
    expect(ring.toArray().map((p) => p.x)).toEqual([0, 1, 2]);
  });

  it("drops the oldest entries at capacity", () => {
    const ring = new PoseRing(4);
    for (let i = 0; i < 10; i++) ring.push({ x: i, y: 0, heading: 0 });
    expect(ring.length).toBe(4);
    expect(ring.toArray().map((p) => p.x)).toEqual([6, 7, 8, 9]);
  });

  it("default capacity is the 10k trail bound", () => {
    const ring = new PoseRing();
    expect(ring.capacity).toBe(10000);
    for (let i = 0; i < 10050; i++) ring.push({ x: i, y: 0, heading: 0 });
    expect(ring.length).toBe(10000);
    expect(ring.toArray()[0].x).toBe(50);
  });

  it("clear resets the trail", () => {
    const ring = new PoseRing(3);
    ring.push({ x: 1, y: 2, heading: 0 });
    ring.clear();
    expect(ring.length).toBe(0);
    expect(ring.toArray()).toEqual([]);
  });
});

describe("ConsoleState", () => {
  it("keeps exactly one decoded frame", () => {
    const state = new ConsoleState();
    state.applyTelemetry(telemetry(1));
    state.applyTelemetry(telemetry(2));
    expect(state.latest?.tick).toBe(2);
    expect(state.frame?.[0]).toBe(2);
    expect(state.trail.length).toBe(2);
  });

  it("params mirror the last acknowledged telemetry", () => {
    const state = new ConsoleState();
    expect(state.params).toEqual({});
    state.applyTelemetry(telemetry(1));
    expect(state.params.threshold).toBe(100);
  });

  it("stores server errors", () => {
    const state = new ConsoleState();
    state.applyError("unknown param: q");
    expect(state.lastError).toContain("unknown param");
  });
});
