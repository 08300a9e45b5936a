// Area-band overlay geometry, derived from the live area config so that
// tuning a bound redraws the bands immediately.

import type { Areas, Report } from "./protocol.js";
import { FRAME_SIZE } from "./frame.js";

export type BandKind = "distant" | "forbidden" | "safe" | "right" | "left";

export interface Band {
  kind: BandKind;
  x: number; // canvas x = image column
  y: number; // canvas y = image row
  w: number;
  h: number;
}

/** Rectangles (in pixel coordinates) for every named image area. */
export function areaBands(a: Areas): Band[] {
  const W = FRAME_SIZE;
  const validTop = a.distant_x_max + 1;
  const validH = Math.max(a.forbidden_x_min - validTop, 0);
  return [
    { kind: "distant", x: 0, y: 0, w: W, h: a.distant_x_max + 1 },
    { kind: "forbidden", x: 0, y: a.forbidden_x_min, w: W, h: W - a.forbidden_x_min },
    { kind: "safe", x: 0, y: 0, w: a.safe_y_low + 1, h: W },
    { kind: "safe", x: a.safe_y_high, y: 0, w: W - a.safe_y_high, h: W },
    { kind: "right", x: a.right_y[0], y: validTop, w: a.right_y[1] - a.right_y[0] + 1, h: validH },
    { kind: "left", x: a.left_y[0], y: validTop, w: a.left_y[1] - a.left_y[0] + 1, h: validH },
  ];
}

export interface Marker {
  x: number; // column of the winning bottom centre
  y: number; // row
  side: "right" | "left" | "none";
}

/** Closest-box marker position, or null when no obstacle is reported. */
export function closestMarker(report: Report, a: Areas): Marker | null {
  if (report.closest_dis >= 1e6 || (report.direction === 0 && report.closest_x === 0)) {
    return null;
  }
  const side =
    report.direction === -1 ? "right" : report.direction === 1 ? "left" : "none";
  return { x: report.closest_y, y: report.closest_x, side };
}

export const BAND_COLORS: Record<BandKind, string> = {
  distant: "rgba(120, 120, 255, 0.18)",
  forbidden: "rgba(255, 80, 80, 0.22)",
  safe: "rgba(80, 220, 120, 0.20)",
  right: "rgba(255, 210, 80, 0.10)",
  left: "rgba(80, 200, 255, 0.10)",
};
