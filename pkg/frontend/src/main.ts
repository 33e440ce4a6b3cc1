/** Browser entry point: wires the websocket, teleop, and render loop.
 *
 * Served as static files by the bridge process; the websocket lives at
 * /ws on the same host and port.
 */

import {
  CHANNELS,
  modeEnvelope,
  requestEnvelope,
  resetEnvelope,
  subscribeEnvelope,
  twistEnvelope,
  SlamMode,
} from "./messages.js";
import { render } from "./render.js";
import { TELEOP_HZ, TeleopEngine } from "./teleop.js";
import { applyEnvelope, initialViewState } from "./viewstate.js";

const SUBSCRIBED = [
  CHANNELS.SLAM_MAP, CHANNELS.SLAM_POSE, CHANNELS.LIDAR,
  CHANNELS.PATH, CHANNELS.SLAM_STATUS,
];

const MODE_BUTTONS: [string, SlamMode][] = [
  ["btn-idle", "IDLE"],
  ["btn-localize", "LOCALIZATION_ONLY"],
  ["btn-slam", "FULL_SLAM"],
];

const nowUs = () => Math.round(Date.now() * 1000);

function main(): void {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const status = document.getElementById("status")!;
  const modeLabel = document.getElementById("mode")!;
  const joystickPad = document.getElementById("joystick") as HTMLElement;
  const knob = document.getElementById("knob") as HTMLElement;
  const controls = Array.from(
    document.querySelectorAll<HTMLButtonElement>("button"));

  let state = initialViewState();
  const teleop = new TeleopEngine({
    vxMax: 0.5, vyMax: 0.5, wzMax: 1.5, omni: false,
  });

  const ws = new WebSocket(`ws://${location.host}/ws`);

  const send = (frame: string) => {
    if (ws.readyState === WebSocket.OPEN) ws.send(frame);
  };

  ws.onopen = () => {
    state = { ...state, connected: true };
    status.textContent = "connected";
    for (const ch of SUBSCRIBED) send(subscribeEnvelope(ch));
    // Prime the view with whatever the stack last published.
    send(requestEnvelope(CHANNELS.SLAM_MAP));
    send(requestEnvelope(CHANNELS.SLAM_POSE));
    send(requestEnvelope(CHANNELS.SLAM_STATUS));
    controls.forEach((b) => { b.disabled = false; });
  };

  ws.onclose = () => {
    state = { ...state, connected: false };
    status.textContent = "disconnected";
    teleop.releaseAll();
    controls.forEach((b) => { b.disabled = true; });
  };

  ws.onmessage = (ev: MessageEvent) => {
    state = applyEnvelope(state, String(ev.data), performance.now());
  };

  // -- mode controls

  for (const [id, mode] of MODE_BUTTONS) {
    document.getElementById(id)!.addEventListener("click", () => {
      send(modeEnvelope(mode, nowUs()));
    });
  }
  document.getElementById("btn-reset")!.addEventListener("click", () => {
    send(resetEnvelope(nowUs()));
  });

  // -- keyboard teleop

  window.addEventListener("keydown", (ev) => {
    if (ev.repeat) return;
    if (teleop.keyDown(ev.key)) ev.preventDefault();
  });
  window.addEventListener("keyup", (ev) => teleop.keyUp(ev.key));
  window.addEventListener("blur", () => teleop.releaseAll());

  // -- pointer joystick

  const padRadius = joystickPad.clientWidth / 2;
  const setKnob = (dx: number, dy: number) => {
    knob.style.transform = `translate(${dx}px, ${dy}px)`;
  };
  joystickPad.addEventListener("pointerdown", (ev) => {
    joystickPad.setPointerCapture(ev.pointerId);
  });
  joystickPad.addEventListener("pointermove", (ev) => {
    if (!joystickPad.hasPointerCapture(ev.pointerId)) return;
    const rect = joystickPad.getBoundingClientRect();
    let dx = ev.clientX - rect.left - padRadius;
    let dy = ev.clientY - rect.top - padRadius;
    const mag = Math.hypot(dx, dy);
    if (mag > padRadius) {
      dx *= padRadius / mag;
      dy *= padRadius / mag;
    }
    setKnob(dx, dy);
    teleop.setJoystick({ x: dx / padRadius, y: -dy / padRadius });
  });
  const releaseJoystick = (ev: PointerEvent) => {
    if (joystickPad.hasPointerCapture(ev.pointerId)) {
      joystickPad.releasePointerCapture(ev.pointerId);
    }
    setKnob(0, 0);
    teleop.setJoystick(null);
  };
  joystickPad.addEventListener("pointerup", releaseJoystick);
  joystickPad.addEventListener("pointercancel", releaseJoystick);

  // -- loops

  setInterval(() => {
    const twist = teleop.tick(nowUs());
    if (twist !== null) send(twistEnvelope(twist));
  }, 1000 / TELEOP_HZ);

  const draw = () => {
    const buf = render(state, canvas.width, canvas.height, performance.now());
    ctx.putImageData(new ImageData(buf, canvas.width, canvas.height), 0, 0);
    modeLabel.textContent = state.mode ?? "unknown";
    requestAnimationFrame(draw);
  };
  requestAnimationFrame(draw);
}

main();
