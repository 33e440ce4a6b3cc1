/** Wire types and envelope builders for the bridge websocket protocol.
 *
 * One JSON envelope per text frame:
 *   {"op": "publish",   "channel": "...", "data": {...}}
 *   {"op": "subscribe", "channel": "..."}
 *   {"op": "unsubscribe", "channel": "..."}
 *   {"op": "request",   "channel": "...", "as_bytes": true}
 *   {"op": "response",  "channel": "...", "data": {...}, "utime": ...}
 *   {"op": "error",     "channel": "..." | null, "msg": "..."}
 */

export const CHANNELS = {
  VEL_CMD: "MBOT_VEL_CMD",
  ODOMETRY: "ODOMETRY",
  LIDAR: "LIDAR",
  SLAM_POSE: "SLAM_POSE",
  SLAM_MAP: "SLAM_MAP",
  PATH: "CONTROLLER_PATH",
  SLAM_MODE: "SLAM_MODE",
  SLAM_RESET: "SLAM_RESET",
  SLAM_STATUS: "SLAM_STATUS",
} as const;

export type SlamMode = "IDLE" | "LOCALIZATION_ONLY" | "FULL_SLAM";

export interface TwistData {
  vx: number;
  vy: number;
  wz: number;
  utime: number;
}

export interface PoseData {
  x: number;
  y: number;
  theta: number;
  utime: number;
}

export interface ScanData {
  utime: number;
  ranges: number[];
  thetas: number[];
}

/** Occupancy grid decoded for rendering: int8 log-odds, row-major. */
export interface GridData {
  originX: number;
  originY: number;
  resolution: number;
  width: number;
  height: number;
  cells: Int8Array;
  utime: number;
}

export function publishEnvelope(channel: string, data: unknown): string {
  return JSON.stringify({ op: "publish", channel, data });
}

export function subscribeEnvelope(channel: string): string {
  return JSON.stringify({ op: "subscribe", channel });
}

export function requestEnvelope(channel: string, asBytes = true): string {
  return JSON.stringify({ op: "request", channel, as_bytes: asBytes });
}

export function twistEnvelope(t: TwistData): string {
  return publishEnvelope(CHANNELS.VEL_CMD, t);
}

export function modeEnvelope(mode: SlamMode, utime: number): string {
  return publishEnvelope(CHANNELS.SLAM_MODE, { utime, mode });
}

export function resetEnvelope(utime: number): string {
  return publishEnvelope(CHANNELS.SLAM_RESET, { utime });
}

/** Decode base64 to signed bytes; works in both browser and Node. */
export function base64ToInt8(b64: string): Int8Array {
  if (typeof atob === "function") {
    const bin = atob(b64);
    const out = new Int8Array(bin.length);
    for (let i = 0; i < bin.length; i++) {
      out[i] = (bin.charCodeAt(i) << 24) >> 24;
    }
    return out;
  }
  const buf = Buffer.from(b64, "base64");
  return new Int8Array(buf.buffer, buf.byteOffset, buf.byteLength);
}

function asNumber(v: unknown, name: string): number {
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new Error(`${name} must be a finite number`);
  }
  return v;
}

export function parsePose(data: Record<string, unknown>): PoseData {
  return {
    x: asNumber(data.x, "x"),
    y: asNumber(data.y, "y"),
    theta: asNumber(data.theta, "theta"),
    utime: asNumber(data.utime, "utime"),
  };
}

export function parseScan(data: Record<string, unknown>): ScanData {
  const ranges = data.ranges;
  const thetas = data.thetas;
  if (!Array.isArray(ranges) || !Array.isArray(thetas)
      || ranges.length !== thetas.length) {
    throw new Error("scan needs matching ranges/thetas arrays");
  }
  return {
    utime: asNumber(data.utime, "utime"),
    ranges: ranges.map((r, i) => asNumber(r, `ranges[${i}]`)),
    thetas: thetas.map((t, i) => asNumber(t, `thetas[${i}]`)),
  };
}

export function parseGrid(data: Record<string, unknown>): GridData {
  const width = asNumber(data.width, "width");
  const height = asNumber(data.height, "height");
  let cells: Int8Array;
  if (typeof data.cells_b64 === "string") {
    cells = base64ToInt8(data.cells_b64);
  } else if (Array.isArray(data.cells)) {
    cells = Int8Array.from(data.cells as number[]);
  } else {
    throw new Error("grid needs cells_b64 or cells");
  }
  if (cells.length !== width * height) {
    throw new Error("cell count does not match width*height");
  }
  return {
    originX: asNumber(data.origin_x, "origin_x"),
    originY: asNumber(data.origin_y, "origin_y"),
    resolution: asNumber(data.resolution, "resolution"),
    width,
    height,
    cells,
    utime: asNumber(data.utime, "utime"),
  };
}

export function parsePath(data: Record<string, unknown>): PoseData[] {
  if (!Array.isArray(data.poses)) {
    throw new Error("path needs a poses array");
  }
  return data.poses.map((p) => parsePose(p as Record<string, unknown>));
}
