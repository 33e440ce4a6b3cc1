/** ViewState: the cache between message arrival and rendering.
 *
 * applyEnvelope is a pure reducer: (state, raw frame, now) -> new state.
 * Malformed envelopes are reported through onWarn and skipped, leaving
 * the state unchanged. Data older than STALE_MS is flagged by the
 * renderer.
 */

import {
  CHANNELS,
  GridData,
  PoseData,
  ScanData,
  parseGrid,
  parsePath,
  parsePose,
  parseScan,
} from "./messages.js";

export const STALE_MS = 2000;

export interface ViewState {
  connected: boolean;
  map: GridData | null;
  mapAtMs: number;
  pose: PoseData | null;
  poseAtMs: number;
  scan: ScanData | null;
  scanAtMs: number;
  path: PoseData[] | null;
  pathAtMs: number;
  /** Last mode the stack reported (SLAM_STATUS), not what we asked for. */
  mode: string | null;
}

export function initialViewState(): ViewState {
  return {
    connected: false,
    map: null, mapAtMs: 0,
    pose: null, poseAtMs: 0,
    scan: null, scanAtMs: 0,
    path: null, pathAtMs: 0,
    mode: null,
  };
}

export function isStale(receivedAtMs: number, nowMs: number): boolean {
  return receivedAtMs === 0 || nowMs - receivedAtMs > STALE_MS;
}

export function applyEnvelope(
  state: ViewState,
  raw: string,
  nowMs: number,
  onWarn: (msg: string) => void = (m) => console.warn(m),
): ViewState {
  let env: unknown;
  try {
    env = JSON.parse(raw);
  } catch {
    onWarn("skipping malformed JSON envelope");
    return state;
  }
  if (typeof env !== "object" || env === null) {
    onWarn("skipping non-object envelope");
    return state;
  }
  const { op, channel, data, msg } = env as Record<string, unknown>;
  if (op === "error") {
    onWarn(`bridge error on ${channel}: ${msg}`);
    return state;
  }
  if (op !== "response" || typeof data !== "object" || data === null) {
    onWarn(`skipping unexpected envelope op=${op}`);
    return state;
  }
  const payload = data as Record<string, unknown>;
  try {
    switch (channel) {
      case CHANNELS.SLAM_MAP:
        return { ...state, map: parseGrid(payload), mapAtMs: nowMs };
      case CHANNELS.SLAM_POSE:
        return { ...state, pose: parsePose(payload), poseAtMs: nowMs };
      case CHANNELS.LIDAR:
        return { ...state, scan: parseScan(payload), scanAtMs: nowMs };
      case CHANNELS.PATH:
        return { ...state, path: parsePath(payload), pathAtMs: nowMs };
      case CHANNELS.SLAM_STATUS: {
        const mode = payload.mode;
        if (typeof mode !== "string") throw new Error("mode must be a string");
        return { ...state, mode };
      }
      default:
        return state; // channel we did not ask for; ignore
    }
  } catch (e) {
    onWarn(`skipping bad ${channel} payload: ${(e as Error).message}`);
    return state;
  }
}
