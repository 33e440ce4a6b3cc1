/** Pure renderer: (ViewState, canvas size, now) -> RGBA pixel buffer.
 *
 * Same inputs always produce identical pixels, so snapshot tests compare
 * buffers directly and the browser just blits the result via putImageData.
 *
 * Drawing rules:
 *   - map grayscale: log-odds -128 -> white (255), +127 -> black (0),
 *     0 -> mid-gray (127); gray = 127 - logodds clamped to [0, 255]
 *   - pose: filled triangle, apex toward theta (theta=0 -> screen-right)
 *   - scan: points transformed into the world by the current pose
 *   - path: polyline through the waypoints
 *   - any overlay whose data is older than STALE_MS gets a warning border
 */

import { GridData } from "./messages.js";
import { Transform, fitTransform, screenToWorld, worldToScreen } from "./transform.js";
import { ViewState, isStale } from "./viewstate.js";

export type RGB = [number, number, number];

export const COLOR_BACKGROUND: RGB = [46, 46, 56];
export const COLOR_POSE: RGB = [58, 116, 235];
export const COLOR_SCAN: RGB = [226, 66, 66];
export const COLOR_PATH: RGB = [62, 196, 96];
export const COLOR_STALE: RGB = [255, 148, 0];

export const POSE_APEX_M = 0.18;
export const POSE_BASE_M = 0.11;
const STALE_BORDER_PX = 3;

function putPixel(
  buf: Uint8ClampedArray, w: number, h: number,
  x: number, y: number, c: RGB,
): void {
  if (x < 0 || y < 0 || x >= w || y >= h) return;
  const i = (y * w + x) * 4;
  buf[i] = c[0];
  buf[i + 1] = c[1];
  buf[i + 2] = c[2];
  buf[i + 3] = 255;
}

function fillRect(
  buf: Uint8ClampedArray, w: number, h: number,
  x0: number, y0: number, x1: number, y1: number, c: RGB,
): void {
  for (let y = Math.max(0, y0); y < Math.min(h, y1); y++) {
    for (let x = Math.max(0, x0); x < Math.min(w, x1); x++) {
      putPixel(buf, w, h, x, y, c);
    }
  }
}

function drawLine(
  buf: Uint8ClampedArray, w: number, h: number,
  x0: number, y0: number, x1: number, y1: number, c: RGB,
): void {
  // Bresenham over rounded endpoints.
  let x = Math.round(x0);
  let y = Math.round(y0);
  const xe = Math.round(x1);
  const ye = Math.round(y1);
  const dx = Math.abs(xe - x);
  const dy = -Math.abs(ye - y);
  const sx = x < xe ? 1 : -1;
  const sy = y < ye ? 1 : -1;
  let err = dx + dy;
  for (;;) {
    putPixel(buf, w, h, x, y, c);
    if (x === xe && y === ye) break;
    const e2 = 2 * err;
    if (e2 >= dy) { err += dy; x += sx; }
    if (e2 <= dx) { err += dx; y += sy; }
  }
}

function fillTriangle(
  buf: Uint8ClampedArray, w: number, h: number,
  pts: [number, number][], c: RGB,
): void {
  const [a, b, d] = pts as [[number, number], [number, number], [number, number]];
  const minX = Math.max(0, Math.floor(Math.min(a[0], b[0], d[0])));
  const maxX = Math.min(w - 1, Math.ceil(Math.max(a[0], b[0], d[0])));
  const minY = Math.max(0, Math.floor(Math.min(a[1], b[1], d[1])));
  const maxY = Math.min(h - 1, Math.ceil(Math.max(a[1], b[1], d[1])));
  const edge = (p: [number, number], q: [number, number], x: number, y: number) =>
    (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]);
  const area = edge(a, b, d[0], d[1]);
  if (area === 0) return;
  for (let y = minY; y <= maxY; y++) {
    for (let x = minX; x <= maxX; x++) {
      const e0 = edge(a, b, x, y) / area;
      const e1 = edge(b, d, x, y) / area;
      const e2 = edge(d, a, x, y) / area;
      if (e0 >= 0 && e1 >= 0 && e2 >= 0) putPixel(buf, w, h, x, y, c);
    }
  }
}

export function logOddsToGray(logOdds: number): number {
  return Math.max(0, Math.min(255, 127 - logOdds));
}

function drawMap(
  buf: Uint8ClampedArray, w: number, h: number,
  grid: GridData, t: Transform,
): void {
  // Nearest-neighbor sample the grid per screen pixel.
  for (let sy = 0; sy < h; sy++) {
    for (let sx = 0; sx < w; sx++) {
      const [wx, wy] = screenToWorld(t, sx + 0.5, sy + 0.5);
      const col = Math.floor((wx - grid.originX) / grid.resolution);
      const row = Math.floor((wy - grid.originY) / grid.resolution);
      if (col < 0 || row < 0 || col >= grid.width || row >= grid.height) continue;
      const g = logOddsToGray(grid.cells[row * grid.width + col] as number);
      putPixel(buf, w, h, sx, sy, [g, g, g]);
    }
  }
}

function drawPose(
  buf: Uint8ClampedArray, w: number, h: number,
  pose: { x: number; y: number; theta: number }, t: Transform,
): void {
  const { x, y, theta } = pose;
  const corner = (r: number, ang: number): [number, number] =>
    worldToScreen(t, x + r * Math.cos(theta + ang), y + r * Math.sin(theta + ang));
  fillTriangle(buf, w, h, [
    corner(POSE_APEX_M, 0),
    corner(POSE_BASE_M, (2 * Math.PI) / 3),
    corner(POSE_BASE_M, -(2 * Math.PI) / 3),
  ], COLOR_POSE);
}

function drawScan(
  buf: Uint8ClampedArray, w: number, h: number,
  scan: { ranges: number[]; thetas: number[] },
  pose: { x: number; y: number; theta: number }, t: Transform,
): void {
  for (let i = 0; i < scan.ranges.length; i++) {
    const r = scan.ranges[i] as number;
    if (r <= 0) continue; // dropped beam
    const ang = pose.theta + (scan.thetas[i] as number);
    const [sx, sy] = worldToScreen(
      t, pose.x + r * Math.cos(ang), pose.y + r * Math.sin(ang));
    const px = Math.round(sx);
    const py = Math.round(sy);
    fillRect(buf, w, h, px - 1, py - 1, px + 1, py + 1, COLOR_SCAN);
  }
}

function drawPath(
  buf: Uint8ClampedArray, w: number, h: number,
  path: { x: number; y: number }[], t: Transform,
): void {
  for (let i = 1; i < path.length; i++) {
    const a = path[i - 1] as { x: number; y: number };
    const b = path[i] as { x: number; y: number };
    const [x0, y0] = worldToScreen(t, a.x, a.y);
    const [x1, y1] = worldToScreen(t, b.x, b.y);
    drawLine(buf, w, h, x0, y0, x1, y1, COLOR_PATH);
  }
}

function drawStaleBorder(buf: Uint8ClampedArray, w: number, h: number): void {
  fillRect(buf, w, h, 0, 0, w, STALE_BORDER_PX, COLOR_STALE);
  fillRect(buf, w, h, 0, h - STALE_BORDER_PX, w, h, COLOR_STALE);
  fillRect(buf, w, h, 0, 0, STALE_BORDER_PX, h, COLOR_STALE);
  fillRect(buf, w, h, w - STALE_BORDER_PX, 0, w, h, COLOR_STALE);
}

/** True if any displayed overlay is older than STALE_MS. */
export function anyStale(state: ViewState, nowMs: number): boolean {
  return (state.map !== null && isStale(state.mapAtMs, nowMs))
    || (state.pose !== null && isStale(state.poseAtMs, nowMs))
    || (state.scan !== null && isStale(state.scanAtMs, nowMs))
    || (state.path !== null && isStale(state.pathAtMs, nowMs));
}

export function render(
  state: ViewState, width: number, height: number, nowMs: number,
): Uint8ClampedArray<ArrayBuffer> {
  const buf = new Uint8ClampedArray(width * height * 4);
  fillRect(buf, width, height, 0, 0, width, height, COLOR_BACKGROUND);
  if (state.map === null) return buf;

  const t = fitTransform(state.map, width, height);
  drawMap(buf, width, height, state.map, t);
  if (state.path !== null) drawPath(buf, width, height, state.path, t);
  if (state.pose !== null) {
    if (state.scan !== null) {
      drawScan(buf, width, height, state.scan, state.pose, t);
    }
    drawPose(buf, width, height, state.pose, t);
  }
  if (anyStale(state, nowMs)) drawStaleBorder(buf, width, height);
  return buf;
}
