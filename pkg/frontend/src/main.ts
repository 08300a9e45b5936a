// Console page wiring: live frame + overlay, trajectory trail, status
// banner and the parameter sliders.

import { FRAME_SIZE, grayToRgba } from "./frame.js";
import { areaBands, closestMarker, BAND_COLORS } from "./overlay.js";
import { PARAM_KEYS, PARAM_RANGES, type ParamKey, type Telemetry } from "./protocol.js";
import { ConsoleState } from "./state.js";
import { fitTransform, toCanvas, trailPolyline } from "./traj.js";
import { TelemetryClient, telemetryUrl } from "./ws.js";

const state = new ConsoleState();

const frameCanvas = document.getElementById("frame") as HTMLCanvasElement;
const trajCanvas = document.getElementById("traj") as HTMLCanvasElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const readout = document.getElementById("readout") as HTMLDivElement;
const sliders = document.getElementById("sliders") as HTMLDivElement;
const errorBox = document.getElementById("errors") as HTMLDivElement;

const frameCtx = frameCanvas.getContext("2d")!;
const trajCtx = trajCanvas.getContext("2d")!;

const sliderInputs = new Map<ParamKey, HTMLInputElement>();
const sliderLabels = new Map<ParamKey, HTMLSpanElement>();
let dragging: ParamKey | null = null;

function buildSliders(): void {
  for (const key of PARAM_KEYS) {
    const range = PARAM_RANGES[key];
    const row = document.createElement("div");
    row.className = "slider-row";
    const name = document.createElement("label");
    name.textContent = key;
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(range.min);
    input.max = String(range.max);
    input.step = String(range.step);
    const value = document.createElement("span");
    value.textContent = "-";
    input.addEventListener("pointerdown", () => (dragging = key));
    input.addEventListener("pointerup", () => (dragging = null));
    input.addEventListener("change", () => {
      dragging = null;
      client.setParam(key, Number(input.value));
    });
    input.addEventListener("input", () => {
      value.textContent = input.value;
    });
    row.append(name, input, value);
    sliders.append(row);
    sliderInputs.set(key, input);
    sliderLabels.set(key, value);
  }
}

function syncSliders(msg: Telemetry): void {
  for (const key of PARAM_KEYS) {
    const current = msg.params[key];
    if (current === undefined || dragging === key) continue;
    const input = sliderInputs.get(key)!;
    if (document.activeElement !== input) {
      input.value = String(current);
      sliderLabels.get(key)!.textContent = String(current);
    }
  }
}

function drawFrame(msg: Telemetry): void {
  if (!state.frame) return;
  const image = new ImageData(grayToRgba(state.frame), FRAME_SIZE, FRAME_SIZE);
  frameCtx.putImageData(image, 0, 0);
  for (const band of areaBands(msg.areas)) {
    frameCtx.fillStyle = BAND_COLORS[band.kind];
    frameCtx.fillRect(band.x, band.y, band.w, band.h);
  }
  const marker = closestMarker(msg.report, msg.areas);
  if (marker) {
    frameCtx.strokeStyle = marker.side === "left" ? "#4fc3f7" : "#ffd54f";
    frameCtx.lineWidth = 2;
    frameCtx.beginPath();
    frameCtx.arc(marker.x, marker.y, 6, 0, 2 * Math.PI);
    frameCtx.stroke();
  }
}

function drawTrail(msg: Telemetry): void {
  const trail = state.trail.toArray();
  const t = fitTransform(trail, trajCanvas.width, trajCanvas.height);
  trajCtx.fillStyle = "#111";
  trajCtx.fillRect(0, 0, trajCanvas.width, trajCanvas.height);
  const line = trailPolyline(trail, t);
  trajCtx.strokeStyle = "#6fdc8c";
  trajCtx.lineWidth = 1.5;
  trajCtx.beginPath();
  for (let i = 0; i < line.length; i += 2) {
    if (i === 0) trajCtx.moveTo(line[0], line[1]);
    else trajCtx.lineTo(line[i], line[i + 1]);
  }
  trajCtx.stroke();
  // heading arrow at the latest pose
  const p = msg.pose;
  const [hx, hy] = toCanvas(t, p.x, p.y);
  const [tx, ty] = toCanvas(
    t,
    p.x + (12 / t.scale) * Math.cos(p.heading),
    p.y + (12 / t.scale) * Math.sin(p.heading),
  );
  trajCtx.strokeStyle = "#ff7043";
  trajCtx.lineWidth = 2;
  trajCtx.beginPath();
  trajCtx.moveTo(hx, hy);
  trajCtx.lineTo(tx, ty);
  trajCtx.stroke();
}

function updateReadout(msg: Telemetry): void {
  const r = msg.report;
  const eDis = msg.e_dis === null ? "-" : msg.e_dis.toFixed(2);
  readout.textContent =
    `tick ${msg.tick}  mode ${msg.mode}  target #${msg.target_index}  ` +
    `pose (${msg.pose.x.toFixed(2)}, ${msg.pose.y.toFixed(2)}, ` +
    `${msg.pose.heading.toFixed(2)})  steer ${msg.steer.toFixed(3)}  E_dis ${eDis}  ` +
    (r.closest_dis < 1e6
      ? `closest (${r.closest_x}, ${r.closest_y}) D=${r.closest_dis.toFixed(1)} dir ${r.direction}`
      : "no obstacle");
}

const client = new TelemetryClient(
  telemetryUrl(window.location),
  {
    onMessage: (msg) => {
      if (msg.type === "error") {
        state.applyError(msg.message);
        errorBox.textContent = msg.message;
        return;
      }
      state.applyTelemetry(msg);
      errorBox.textContent = "";
      drawFrame(msg);
      drawTrail(msg);
      updateReadout(msg);
      syncSliders(msg);
    },
    onStatus: (status) => {
      state.status = status;
      banner.textContent =
        status === "open" ? "live" : status === "connecting" ? "connecting..." : "disconnected, retrying";
      banner.className = `banner ${status}`;
    },
  },
  // the native socket satisfies SocketLike structurally at runtime
  (url) => new WebSocket(url) as unknown as import("./ws.js").SocketLike,
);

buildSliders();
client.connect();
