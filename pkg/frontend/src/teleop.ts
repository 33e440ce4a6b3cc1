/** Teleoperation engine: keys + joystick in, velocity commands out.
 *
 * Pure with respect to time: the owner calls tick() at 10 Hz and sends
 * whatever it returns. While any drive input is engaged each tick yields
 * a twist scaled by the configured maxima; the first tick after release
 * yields exactly one zero twist, then silence.
 *
 * Keyboard map: W/S or Up/Down for vx, A/D or Left/Right for wz,
 * Q/E for strafing vy (omni drives only).
 */

import { TwistData } from "./messages.js";

export const TELEOP_HZ = 10;

export interface TeleopLimits {
  vxMax: number;
  vyMax: number;
  wzMax: number;
  omni: boolean;
}

export interface JoystickVector {
  /** Rightward deflection, -1..1; maps to -wz. */
  x: number;
  /** Forward deflection, -1..1; maps to +vx. */
  y: number;
}

type Action = "forward" | "back" | "turnLeft" | "turnRight"
  | "strafeLeft" | "strafeRight";

const KEY_ACTIONS: Record<string, Action> = {
  w: "forward", arrowup: "forward",
  s: "back", arrowdown: "back",
  a: "turnLeft", arrowleft: "turnLeft",
  d: "turnRight", arrowright: "turnRight",
  q: "strafeLeft",
  e: "strafeRight",
};

const clamp = (v: number, lim: number) => Math.max(-lim, Math.min(lim, v));

export class TeleopEngine {
  private held = new Set<Action>();
  private joystick: JoystickVector | null = null;
  private wasEngaged = false;

  constructor(readonly limits: TeleopLimits) {}

  /** Returns true if the key is a drive key (so the UI can preventDefault). */
  keyDown(key: string): boolean {
    const action = KEY_ACTIONS[key.toLowerCase()];
    if (action === undefined) return false;
    if (!this.limits.omni
        && (action === "strafeLeft" || action === "strafeRight")) {
      return false;
    }
    this.held.add(action);
    return true;
  }

  keyUp(key: string): void {
    const action = KEY_ACTIONS[key.toLowerCase()];
    if (action !== undefined) this.held.delete(action);
  }

  setJoystick(v: JoystickVector | null): void {
    this.joystick = v;
  }

  releaseAll(): void {
    this.held.clear();
    this.joystick = null;
  }

  engaged(): boolean {
    return this.held.size > 0 || this.joystick !== null;
  }

  /** One 10 Hz step: a twist while engaged, one zero twist after release,
   *  null otherwise. */
  tick(utime: number): TwistData | null {
    if (this.engaged()) {
      this.wasEngaged = true;
      return this.currentTwist(utime);
    }
    if (this.wasEngaged) {
      this.wasEngaged = false;
      return { vx: 0, vy: 0, wz: 0, utime };
    }
    return null;
  }

  private currentTwist(utime: number): TwistData {
    const { vxMax, vyMax, wzMax, omni } = this.limits;
    const has = (a: Action) => (this.held.has(a) ? 1 : 0);
    let vx = (has("forward") - has("back")) * vxMax;
    let vy = omni ? (has("strafeLeft") - has("strafeRight")) * vyMax : 0;
    let wz = (has("turnLeft") - has("turnRight")) * wzMax;
    if (this.joystick) {
      vx += this.joystick.y * vxMax;
      wz += -this.joystick.x * wzMax;
    }
    return {
      vx: clamp(vx, vxMax),
      vy: clamp(vy, vyMax),
      wz: clamp(wz, wzMax),
      utime,
    };
  }
}
