// Operator console: drag a skeleton or trigger gesture presets, stream
// frames to the pipeline bridge, and watch the drone + classifiers live.

import { BONES, JOINT_NAMES, NUM_JOINTS, PresetFile, PuppetPose } from "./model.js";
import { BridgeClient, Snapshot } from "./bridge.js";

const JOINT_RADIUS = 6;
const STALE_MS = 1000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class PuppetEditor {
  pose = new PuppetPose();
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private dragging: number | null = null;

  constructor(canvas: HTMLCanvasElement, private onChange: () => void) {
    this.canvas = canvas;
    this.ctx = canvas.getContext("2d")!;
    canvas.addEventListener("mousedown", (ev) => this.onDown(ev));
    canvas.addEventListener("mousemove", (ev) => this.onMove(ev));
    window.addEventListener("mouseup", () => (this.dragging = null));
    canvas.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      const hit = this.hitJoint(ev);
      if (hit !== null) {
        this.pose.toggleVisibility(hit);
        this.onChange();
        this.draw();
      }
    });
  }

  private canvasPos(ev: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return [
      ((ev.clientX - rect.left) / rect.width) * this.canvas.width,
      ((ev.clientY - rect.top) / rect.height) * this.canvas.height,
    ];
  }

  private hitJoint(ev: MouseEvent): number | null {
    const [mx, my] = this.canvasPos(ev);
    let best: number | null = null;
    let bestD = 12 * 12;
    for (let i = 0; i < NUM_JOINTS; i++) {
      const j = this.pose.joints[i];
      const d = (j.x - mx) ** 2 + (j.y - my) ** 2;
      if (d < bestD) {
        best = i;
        bestD = d;
      }
    }
    return best;
  }

  private onDown(ev: MouseEvent): void {
    if (ev.button !== 0) return;
    this.dragging = this.hitJoint(ev);
  }

  private onMove(ev: MouseEvent): void {
    if (this.dragging === null) return;
    const [mx, my] = this.canvasPos(ev);
    const j = this.pose.joints[this.dragging];
    j.x = Math.max(0, Math.min(this.canvas.width, mx));
    j.y = Math.max(0, Math.min(this.canvas.height, my));
    this.onChange();
    this.draw();
  }

  draw(): void {
    const ctx = this.ctx;
    ctx.fillStyle = "#10141c";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.strokeStyle = "#3b4a63";
    ctx.lineWidth = 1;
    ctx.strokeRect(0, 0, this.canvas.width, this.canvas.height);

    ctx.strokeStyle = "#6ea8ff";
    ctx.lineWidth = 3;
    for (const [a, b] of BONES) {
      const ja = this.pose.joints[a];
      const jb = this.pose.joints[b];
      if (!ja.visible || !jb.visible) continue;
      ctx.beginPath();
      ctx.moveTo(ja.x, ja.y);
      ctx.lineTo(jb.x, jb.y);
      ctx.stroke();
    }
    for (let i = 0; i < NUM_JOINTS; i++) {
      const j = this.pose.joints[i];
      ctx.beginPath();
      ctx.arc(j.x, j.y, JOINT_RADIUS, 0, 2 * Math.PI);
      if (j.visible) {
        ctx.fillStyle = i === 0 ? "#ffd166" : "#e8edf7";
        ctx.fill();
      } else {
        ctx.strokeStyle = "#566178";
        ctx.lineWidth = 1.5;
        ctx.stroke();
      }
    }
  }
}

class TelemetryView {
  private track: { x: number; y: number }[] = [];
  private lastSnapshot: Snapshot | null = null;
  private lastSnapshotAt = 0;

  constructor(
    private topdown: HTMLCanvasElement,
    private altitude: HTMLCanvasElement,
  ) {}

  update(snap: Snapshot): void {
    this.lastSnapshot = snap;
    this.lastSnapshotAt = performance.now();
    this.track.push({ x: snap.drone.x, y: snap.drone.y });
    if (this.track.length > 400) this.track.shift();
    this.render();
    el<HTMLSpanElement>("view-class").textContent = snap.view ?? "-";
    el<HTMLSpanElement>("last-gesture").textContent = snap.last_gesture
      ? `${snap.last_gesture.name} (frame ${snap.last_gesture.frame_index})`
      : "-";
    el<HTMLSpanElement>("distance-est").textContent = snap.distance
      ? `${snap.distance.continuous_cm.toFixed(1)} cm`
      : "-";
    el<HTMLSpanElement>("mode").textContent = snap.mode;
    el<HTMLSpanElement>("battery").textContent = `${snap.drone.battery.toFixed(1)}%`;
    el<HTMLSpanElement>("flying").textContent = snap.drone.flying ? "airborne" : "grounded";
    el<HTMLSpanElement>("photos").textContent = String(snap.photos);
  }

  checkStaleness(): void {
    const stale =
      this.lastSnapshot === null || performance.now() - this.lastSnapshotAt > STALE_MS;
    el<HTMLDivElement>("stale-flag").style.display = stale ? "block" : "none";
  }

  private render(): void {
    const snap = this.lastSnapshot;
    if (!snap) return;
    const ctx = this.topdown.getContext("2d")!;
    const w = this.topdown.width;
    const h = this.topdown.height;
    ctx.fillStyle = "#10141c";
    ctx.fillRect(0, 0, w, h);
    const scale = 0.25; // cm to px: 800 cm across
    const toPx = (x: number, y: number): [number, number] => [
      w / 2 + x * scale,
      h / 2 - y * scale,
    ];
    ctx.strokeStyle = "#2c3750";
    ctx.beginPath();
    ctx.moveTo(w / 2, 0);
    ctx.lineTo(w / 2, h);
    ctx.moveTo(0, h / 2);
    ctx.lineTo(w, h / 2);
    ctx.stroke();
    ctx.strokeStyle = "#47d185";
    ctx.beginPath();
    this.track.forEach((p, i) => {
      const [px, py] = toPx(p.x, p.y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    // drone marker with heading
    const [dx, dy] = toPx(snap.drone.x, snap.drone.y);
    const yaw = (snap.drone.yaw * Math.PI) / 180;
    ctx.fillStyle = "#ffd166";
    ctx.beginPath();
    ctx.arc(dx, dy, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "#ffd166";
    ctx.beginPath();
    ctx.moveTo(dx, dy);
    ctx.lineTo(dx + 12 * Math.sin(yaw), dy - 12 * Math.cos(yaw));
    ctx.stroke();

    const actx = this.altitude.getContext("2d")!;
    const aw = this.altitude.width;
    const ah = this.altitude.height;
    actx.fillStyle = "#10141c";
    actx.fillRect(0, 0, aw, ah);
    const zPx = ah - Math.min(snap.drone.z, 300) * (ah / 300);
    actx.fillStyle = "#6ea8ff";
    actx.fillRect(aw / 2 - 14, zPx, 28, ah - zPx);
    actx.fillStyle = "#e8edf7";
    actx.font = "12px sans-serif";
    actx.fillText(`z = ${snap.drone.z.toFixed(0)} cm`, 6, 14);
    actx.fillText(`yaw = ${snap.drone.yaw.toFixed(0)}`, 6, 28);
  }
}

async function main(): Promise<void> {
  const wsUrl =
    new URLSearchParams(location.search).get("bridge") ??
    `ws://${location.hostname || "127.0.0.1"}:8765`;

  const editor = new PuppetEditor(el<HTMLCanvasElement>("puppet"), () => {});
  const telemetry = new TelemetryView(
    el<HTMLCanvasElement>("topdown"),
    el<HTMLCanvasElement>("altitude"),
  );

  const presets: PresetFile = await (await fetch("./presets.json")).json();
  editor.pose.applyPreset(presets.presets["neutral"]);
  editor.draw();

  const presetBox = el<HTMLDivElement>("presets");
  for (const name of Object.keys(presets.presets)) {
    const btn = document.createElement("button");
    btn.textContent = name;
    btn.addEventListener("click", () => {
      editor.pose.applyPreset(presets.presets[name]);
      editor.draw();
      syncVisibilityList();
    });
    presetBox.appendChild(btn);
  }

  const visList = el<HTMLDivElement>("joint-visibility");
  const checkboxes: HTMLInputElement[] = [];
  JOINT_NAMES.forEach((name, i) => {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = true;
    box.addEventListener("change", () => {
      editor.pose.joints[i].visible = box.checked;
      editor.draw();
    });
    checkboxes.push(box);
    label.appendChild(box);
    label.appendChild(document.createTextNode(name));
    visList.appendChild(label);
  });
  function syncVisibilityList(): void {
    checkboxes.forEach((box, i) => (box.checked = editor.pose.joints[i].visible));
  }

  const bridge = new BridgeClient(wsUrl);
  const banner = el<HTMLDivElement>("banner");
  bridge.onStatus = (status) => {
    banner.style.display = status === "open" ? "none" : "block";
    banner.textContent =
      status === "open" ? "" : `bridge ${status} (${wsUrl}) - retrying`;
    el<HTMLSpanElement>("conn-status").textContent = status;
  };
  bridge.onSnapshot = (snap) => telemetry.update(snap);
  bridge.connect();

  // frame streaming
  let streaming = false;
  let timestamp = 0;
  let timer: ReturnType<typeof setInterval> | null = null;
  const fpsInput = el<HTMLInputElement>("fps");
  const jitterInput = el<HTMLInputElement>("jitter");
  const streamBtn = el<HTMLButtonElement>("stream-toggle");

  function restartTimer(): void {
    if (timer) clearInterval(timer);
    if (!streaming) return;
    const fps = Math.max(1, Number(fpsInput.value) || 30);
    const interval = 1000 / fps;
    timer = setInterval(() => {
      timestamp += Math.round(interval);
      const sigma = Number(jitterInput.value) || 0;
      const sent = bridge.send(editor.pose.toFrameLine(timestamp, sigma));
      el<HTMLSpanElement>("stream-status").textContent = sent
        ? `streaming @ ${fps} fps`
        : "paused (disconnected)";
    }, interval);
  }
  streamBtn.addEventListener("click", () => {
    streaming = !streaming;
    streamBtn.textContent = streaming ? "Stop streaming" : "Start streaming";
    if (!streaming) el<HTMLSpanElement>("stream-status").textContent = "stopped";
    restartTimer();
  });
  fpsInput.addEventListener("change", restartTimer);

  // control buttons
  el<HTMLButtonElement>("btn-takeoff").addEventListener("click", () =>
    bridge.sendControl({ type: "takeoff" }),
  );
  el<HTMLButtonElement>("btn-land").addEventListener("click", () =>
    bridge.sendControl({ type: "land" }),
  );
  el<HTMLButtonElement>("btn-emergency").addEventListener("click", () =>
    bridge.sendControl({ type: "emergency" }),
  );
  el<HTMLButtonElement>("btn-reset").addEventListener("click", () =>
    bridge.sendControl({ type: "reset" }),
  );
  for (const mode of ["keyboard", "face_tracking", "gesture_control"]) {
    el<HTMLButtonElement>(`btn-mode-${mode}`).addEventListener("click", () =>
      bridge.sendControl({ type: "mode", mode }),
    );
  }

  // keyboard map: t/l takeoff-land, space emergency, 1/2/3 modes, r reset,
  // arrows manual velocity (keyboard mode)
  const keyMap: Record<string, string> = {
    t: "t", l: "l", " ": " ", "1": "1", "2": "2", "3": "3", r: "r",
    ArrowUp: "up", ArrowDown: "down", ArrowLeft: "left", ArrowRight: "right",
  };
  window.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLInputElement) return;
    const key = keyMap[ev.key];
    if (key === undefined) return;
    ev.preventDefault();
    bridge.sendControl({ type: "key", key });
  });

  setInterval(() => telemetry.checkStaleness(), 250);
}

main().catch((err) => {
  document.body.insertAdjacentText("afterbegin", `console failed to start: ${err}`);
});
