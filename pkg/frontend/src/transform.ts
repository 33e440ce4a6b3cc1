/** The one shared world-to-screen transform every overlay draws through.
 *
 * World: meters, +x right, +y up (map convention). Screen: pixels, +x
 * right, +y down. The transform fits the map extent into the canvas,
 * preserving aspect ratio and centering.
 */

import { GridData } from "./messages.js";

export interface Transform {
  /** Pixels per meter. */
  scale: number;
  /** World coordinates of the screen point (0, canvasHeight). */
  worldX0: number;
  worldY0: number;
  canvasHeight: number;
}

export function fitTransform(
  grid: Pick<GridData, "originX" | "originY" | "resolution" | "width" | "height">,
  canvasWidth: number,
  canvasHeight: number,
): Transform {
  const extentX = grid.width * grid.resolution;
  const extentY = grid.height * grid.resolution;
  const scale = Math.min(canvasWidth / extentX, canvasHeight / extentY);
  const worldX0 = grid.originX - (canvasWidth / scale - extentX) / 2;
  const worldY0 = grid.originY - (canvasHeight / scale - extentY) / 2;
  return { scale, worldX0, worldY0, canvasHeight };
}

export function worldToScreen(
  t: Transform, wx: number, wy: number,
): [number, number] {
  return [
    (wx - t.worldX0) * t.scale,
    t.canvasHeight - (wy - t.worldY0) * t.scale,
  ];
}

export function screenToWorld(
  t: Transform, sx: number, sy: number,
): [number, number] {
  return [
    sx / t.scale + t.worldX0,
    (t.canvasHeight - sy) / t.scale + t.worldY0,
  ];
}
