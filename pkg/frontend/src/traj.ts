// Top-down trajectory view: world coordinates to canvas pixels with an
// auto-fitted, padded viewport.

import type { Pose } from "./protocol.js";

export interface Transform {
  scale: number;
  ox: number; // canvas x of world origin
  oy: number;
}

/** Fit the pose trail into a canvas, keeping the aspect ratio square. */
export function fitTransform(
  trail: Pose[],
  width: number,
  height: number,
  pad = 20,
): Transform {
  if (trail.length === 0) {
    return { scale: 20, ox: width / 2, oy: height / 2 };
  }
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const p of trail) {
    if (p.x < minX) minX = p.x;
    if (p.x > maxX) maxX = p.x;
    if (p.y < minY) minY = p.y;
    if (p.y > maxY) maxY = p.y;
  }
  const spanX = Math.max(maxX - minX, 1e-6);
  const spanY = Math.max(maxY - minY, 1e-6);
  const scale = Math.min((width - 2 * pad) / spanX, (height - 2 * pad) / spanY, 100);
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  // world +y is the robot's left; draw it to the canvas left (flip y)
  return { scale, ox: width / 2 - cx * scale, oy: height / 2 + cy * scale };
}

export function toCanvas(t: Transform, x: number, y: number): [number, number] {
  return [t.ox + x * t.scale, t.oy - y * t.scale];
}

/** Flattened [x0,y0,x1,y1,...] canvas polyline of the trail. */
export function trailPolyline(trail: Pose[], t: Transform): number[] {
  const out: number[] = new Array(trail.length * 2);
  for (let i = 0; i < trail.length; i++) {
    const [cx, cy] = toCanvas(t, trail[i].x, trail[i].y);
    out[2 * i] = cx;
    out[2 * i + 1] = cy;
  }
  return out;
}
