// Telemetry wire types for the console socket (JSON over WebSocket).

export interface Pose {
  x: number;
  y: number;
  heading: number;
}

export interface Report {
  closest_x: number;
  closest_y: number;
  closest_dis: number;
  direction: number; // -1 right, +1 left, 0 none
}

export interface Areas {
  distant_x_max: number;
  forbidden_x_min: number;
  safe_y_low: number;   // inclusive top of the low safe band
  safe_y_high: number;  // inclusive bottom of the high safe band
  right_y: [number, number];
  left_y: [number, number];
}

export interface Telemetry {
  type: "telemetry";
  tick: number;
  pose: Pose;
  mode: string;
  steer: number;
  e_dis: number | null;
  target_index: number;
  report: Report;
  params: Record<string, number>;
  areas: Areas;
  frame: string; // base64, 65536 bytes of row-major grayscale
}

export interface ServerError {
  type: "error";
  message: string;
}

export type ServerMessage = Telemetry | ServerError;

// Tunable keys, mirroring the runner's parameter registry.
export const PARAM_KEYS = [
  "threshold",
  "k_safe",
  "k_steer",
  "d_safe",
  "e_safe",
  "distant_x_max",
  "forbidden_x_min",
  "safe_y_low",
  "safe_y_high",
] as const;

export type ParamKey = (typeof PARAM_KEYS)[number];

// Slider ranges for the tuning panel.
export const PARAM_RANGES: Record<ParamKey, { min: number; max: number; step: number }> = {
  threshold: { min: 0, max: 255, step: 1 },
  k_safe: { min: 1, max: 500, step: 1 },
  k_steer: { min: 1, max: 100, step: 1 },
  d_safe: { min: 10, max: 300, step: 5 },
  e_safe: { min: 0.2, max: 3, step: 0.1 },
  distant_x_max: { min: 0, max: 200, step: 5 },
  forbidden_x_min: { min: 200, max: 255, step: 1 },
  safe_y_low: { min: 0, max: 14, step: 1 },
  safe_y_high: { min: 241, max: 255, step: 1 },
};

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

/** Parse one socket payload; null for anything malformed or unknown. */
export function parseMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null; // e.g. keepalive noise
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as Record<string, unknown>;
  if (msg.type === "error" && typeof msg.message === "string") {
    return { type: "error", message: msg.message };
  }
  if (msg.type !== "telemetry") return null;
  const pose = msg.pose as Record<string, unknown> | undefined;
  const report = msg.report as Record<string, unknown> | undefined;
  if (
    !isFiniteNumber(msg.tick) ||
    !pose || !isFiniteNumber(pose.x) || !isFiniteNumber(pose.y) || !isFiniteNumber(pose.heading) ||
    !report || !isFiniteNumber(report.closest_dis) ||
    typeof msg.frame !== "string" ||
    typeof msg.mode !== "string"
  ) {
    return null;
  }
  return msg as unknown as Telemetry;
}

export function setParamMessage(key: ParamKey, value: number): string {
  return JSON.stringify({ type: "set_param", key, value });
}
