/** Deterministic scenes for the renderer snapshot tests and goldens. */

import { GridData, PoseData, ScanData } from "./messages.js";
import { ViewState, initialViewState } from "./viewstate.js";

export const GOLDEN_SIZE = 240;
/** Timestamp used when rendering goldens; fixtures are received "now". */
export const GOLDEN_NOW_MS = 10_000;

/** 60x60 all-zero (unknown) map covering 6x6 m at 0.1 m resolution. */
export function allZeroMapState(): ViewState {
  const grid: GridData = {
    originX: 0, originY: 0, resolution: 0.1,
    width: 60, height: 60,
    cells: new Int8Array(60 * 60),
    utime: 1,
  };
  return { ...initialViewState(), map: grid, mapAtMs: GOLDEN_NOW_MS };
}

/** Walled room with free interior, a pillar, a pose, a scan, and a path. */
export function fixtureSceneState(): ViewState {
  const width = 80;
  const height = 80;
  const cells = new Int8Array(width * height);
  const set = (row: number, col: number, v: number) => {
    cells[row * width + col] = v;
  };
  for (let row = 0; row < height; row++) {
    for (let col = 0; col < width; col++) {
      const wall = row === 0 || col === 0 || row === height - 1 || col === width - 1;
      set(row, col, wall ? 120 : -100);
    }
  }
  for (let row = 30; row < 36; row++) { // a pillar near the middle
    for (let col = 52; col < 58; col++) set(row, col, 127);
  }
  for (let row = 60; row < 70; row++) { // an unexplored patch
    for (let col = 10; col < 26; col++) set(row, col, 0);
  }
  const grid: GridData = {
    originX: 0, originY: 0, resolution: 0.1,
    width, height, cells, utime: 2,
  };

  const pose: PoseData = { x: 3.0, y: 3.5, theta: 0.6, utime: 2 };

  // Synthetic but deterministic scan: a lumpy ring around the pose.
  const ranges: number[] = [];
  const thetas: number[] = [];
  for (let i = 0; i < 72; i++) {
    const theta = (2 * Math.PI * i) / 72;
    thetas.push(theta);
    ranges.push(i % 9 === 0 ? 0 : 1.6 + 0.5 * Math.sin(3 * theta));
  }
  const scan: ScanData = { utime: 2, ranges, thetas };

  const path: PoseData[] = [
    { x: 3.0, y: 3.5, theta: 0, utime: 2 },
    { x: 4.5, y: 3.5, theta: 0, utime: 2 },
    { x: 4.5, y: 6.0, theta: 0, utime: 2 },
    { x: 6.5, y: 6.5, theta: 0, utime: 2 },
  ];

  return {
    ...initialViewState(),
    connected: true,
    map: grid, mapAtMs: GOLDEN_NOW_MS,
    pose, poseAtMs: GOLDEN_NOW_MS,
    scan, scanAtMs: GOLDEN_NOW_MS,
    path, pathAtMs: GOLDEN_NOW_MS,
    mode: "FULL_SLAM",
  };
}
