// End-to-end acceptance through the real bridge: spawns the Python
// pipeline (`pose2flight serve`), streams preset poses over the
// WebSocket, and checks the classifier + drone responses.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import WebSocket from "ws";

import { PresetFile, PuppetPose } from "../src/model.js";
import { BridgeClient, Snapshot } from "../src/bridge.js";

const here = dirname(fileURLToPath(import.meta.url));
const presets: PresetFile = JSON.parse(
  readFileSync(join(here, "..", "src", "presets.json"), "utf-8"),
);

const GESTURES = [
  "Up", "Down", "Left", "Right", "Forward", "Backward",
  "Cw", "Ccw", "Cheese", "SideLeft", "SideRight",
];
const N_FRAMES = 3; // pipeline stability window
const FRAME_INTERVAL_MS = 33;

let server: ChildProcess;
let client: BridgeClient;
let lastSnapshot: Snapshot | null = null;
const acks: Record<string, unknown>[] = [];

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor<T>(
  probe: () => T | null | undefined | false,
  timeoutMs = 8000,
  what = "condition",
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const value = probe();
    if (value) return value;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await sleep(20);
  }
}

beforeAll(async () => {
  const python = process.env.PYTHON ?? "python3";
  server = spawn(python, ["-m", "pose2flight.cli", "serve", "--port", "0"], {
    stdio: ["ignore", "pipe", "inherit"],
  });
  const port = await new Promise<number>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("server never announced its port")), 15000);
    server.stdout!.on("data", (chunk: Buffer) => {
      const m = chunk.toString().match(/ws:\/\/127\.0\.0\.1:(\d+)/);
      if (m) {
        clearTimeout(timer);
        resolve(Number(m[1]));
      }
    });
    server.on("exit", (code) => reject(new Error(`server exited early (${code})`)));
  });

  client = new BridgeClient(
    `ws://127.0.0.1:${port}`,
    WebSocket as unknown as ConstructorParameters<typeof BridgeClient>[1],
  );
  client.onSnapshot = (snap) => (lastSnapshot = snap);
  client.onAck = (msg) => acks.push(msg);
  client.connect();
  await waitFor(() => client.status === "open", 8000, "bridge connection");
}, 30000);

afterAll(() => {
  client?.close();
  server?.kill();
});

async function streamPose(
  pose: PuppetPose,
  frames: number,
  startTs: number,
): Promise<number> {
  let ts = startTs;
  for (let i = 0; i < frames; i++) {
    ts += FRAME_INTERVAL_MS;
    expect(client.send(pose.toFrameLine(ts))).toBe(true);
    await sleep(FRAME_INTERVAL_MS);
  }
  return ts;
}

describe("operator console end-to-end", () => {
  let ts = 0;

  it("switches to gesture-control mode", async () => {
    client.sendControl({ type: "mode", mode: "gesture_control" });
    await waitFor(() => lastSnapshot?.mode === "gesture_control", 5000, "mode switch");
  });

  it(
    "every preset produces its named gesture within N+2 frames",
    async () => {
      const neutral = new PuppetPose();
      neutral.applyPreset(presets.presets["neutral"]);
      for (const name of GESTURES) {
        // settle the stream on neutral so each preset starts a fresh streak
        ts = await streamPose(neutral, N_FRAMES + 1, ts);
        const baseline = await waitFor(
          () => lastSnapshot,
          5000,
          "baseline snapshot",
        );
        const framesBefore = baseline.frames_ingested;

        const pose = new PuppetPose();
        pose.applyPreset(presets.presets[name]);
        ts = await streamPose(pose, N_FRAMES + 2, ts);

        const snap = await waitFor(
          () =>
            lastSnapshot?.last_gesture?.name === name ? lastSnapshot : null,
          6000,
          `gesture ${name}`,
        );
        const used = snap.last_gesture!.frame_index - framesBefore;
        expect(used).toBeGreaterThanOrEqual(N_FRAMES);
        expect(used).toBeLessThanOrEqual(N_FRAMES + 2);
      }
    },
    120000,
  );

  it(
    "emergency zeroes the drone velocity within one control tick",
    async () => {
      client.sendControl({ type: "takeoff" });
      await waitFor(
        () => lastSnapshot && Math.abs(lastSnapshot.drone.velocity[2]) > 5,
        8000,
        "takeoff climb",
      );
      acks.length = 0;
      client.sendControl({ type: "emergency" });
      const ack = await waitFor(
        () => acks.find((a) => a.action === "emergency"),
        5000,
        "emergency ack",
      );
      // the ack carries the post-cut state: motors off, no motion
      expect(ack.velocity).toEqual([0, 0, 0]);
      expect(ack.yaw_rate).toBe(0);
      expect(ack.flying).toBe(false);
      const snap = await waitFor(
        () => (lastSnapshot?.mode === "emergency" ? lastSnapshot : null),
        5000,
        "emergency mode snapshot",
      );
      expect(snap.drone.velocity).toEqual([0, 0, 0]);
    },
    30000,
  );
});
