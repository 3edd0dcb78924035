// End-to-end against the real bridge: spawned as a subprocess, spoken
// to only over HTTP and the websocket, exactly like the browser would.
import { type ChildProcess, spawn } from "node:child_process";
import { mkdtemp, readFile, rm } from "node:fs/promises";
import { tmpdir } from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { BridgeClient, type SocketLike } from "../src/net";
import type { HelloMessage, StateMessage } from "../src/protocol";
import { parseTrace } from "../src/replay";

const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");

const nodeSocket = (url: string): SocketLike =>
  new WebSocket(url) as unknown as SocketLike;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function until(pred: () => boolean, what: string, ms = 15000): Promise<void> {
  const t0 = Date.now();
  while (!pred()) {
    if (Date.now() - t0 > ms) throw new Error(`timed out waiting for ${what}`);
    await sleep(15);
  }
}

interface Bridge {
  proc: ChildProcess;
  base: string;
  client: BridgeClient;
}

async function startBridge(extraArgs: string[]): Promise<Bridge> {
  const port = 8800 + Math.floor(Math.random() * 800);
  const proc = spawn(
    "python3",
    ["-m", "telesteer.cli", "serve", "--port", String(port), ...extraArgs],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  const base = `http://127.0.0.1:${port}`;
  const client = new BridgeClient(base, nodeSocket);
  const t0 = Date.now();
  for (;;) {
    if (Date.now() - t0 > 20000) {
      proc.kill();
      throw new Error("bridge did not come up");
    }
    try {
      const health = await client.health();
      if (health.status === "ok") break;
    } catch {
      // not listening yet
    }
    await sleep(100);
  }
  return { proc, base, client };
}

class Feed {
  hello: HelloMessage | null = null;
  frames: StateMessage[] = [];
  errors: string[] = [];
  closed = false;
}

function attach(bridge: Bridge, sessionId: string) {
  const feed = new Feed();
  const socket = bridge.client.connect(sessionId, {
    onHello: (msg) => (feed.hello = msg),
    onState: (msg) => feed.frames.push(msg),
    onError: (msg) => feed.errors.push(msg.message),
    onClose: () => (feed.closed = true),
  });
  return { feed, socket };
}

describe("stepped bridge reproduces the headless trace", () => {
  let bridge: Bridge;
  let workDir: string;

  beforeAll(async () => {
    bridge = await startBridge(["--stepped"]);
    workDir = await mkdtemp(path.join(tmpdir(), "cockpit-"));
  });

  afterAll(async () => {
    bridge?.proc.kill();
    if (workDir) await rm(workDir, { recursive: true, force: true });
  });

  it("matches a scripted-teleoperator run tick for tick", async () => {
    const ticks = 60;
    const id = await bridge.client.openSession({ scenario: "parking_lot", mode: "sim" });
    const { feed, socket } = attach(bridge, id);
    await until(() => feed.hello !== null, "hello");
    expect(feed.hello!.version).toBe(1);
    socket.start();
    socket.step(ticks);
    await until(() => feed.frames.length >= ticks, "stepped frames");
    socket.close();

    const tracePath = path.join(workDir, "parking.trace");
    const run = spawn(
      "python3",
      ["-m", "telesteer.cli", "run", "parking_lot", "--trace", tracePath],
      { cwd: REPO_ROOT, stdio: ["ignore", "ignore", "pipe"] },
    );
    const exitCode: number = await new Promise((resolve) => run.on("exit", (c) => resolve(c ?? -1)));
    expect(exitCode).toBe(0);

    const trace = parseTrace(await readFile(tracePath, "utf-8"));
    expect(trace.records.length).toBeGreaterThanOrEqual(ticks);

    for (let i = 0; i < ticks; i++) {
      const frame = feed.frames[i];
      const rec = trace.records[i];
      expect(frame.tick).toBe(i);
      // float-for-float equality: same engine, same scenario, both ends
      // serialized through shortest-round-trip decimal
      expect(frame.t).toBe(rec.t);
      expect(frame.x).toBe(rec.x);
      expect(frame.y).toBe(rec.y);
      expect(frame.heading).toBe(rec.heading);
      expect(frame.delta_fbl).toBe(rec.delta_fbl);
      expect(frame.delta_ref).toBe(rec.delta_ref);
      expect(frame.delta_applied).toBe(rec.delta_applied);
      expect(frame.p_fl).toBe(rec.p_fl);
      expect(frame.p_fr).toBe(rec.p_fr);
      expect(frame.fault).toBe(rec.fault);
    }
  }, 60000);

  it("rejects stepping a paused session with a useful error", async () => {
    const id = await bridge.client.openSession({ scenario: "lane_change", mode: "sim" });
    const { feed, socket } = attach(bridge, id);
    await until(() => feed.hello !== null, "hello");
    socket.step(1);
    await until(() => feed.errors.length > 0, "error reply");
    expect(feed.errors[0]).toContain("start");
    socket.close();
  });
});

describe("live steering round trip", () => {
  let bridge: Bridge;

  beforeAll(async () => {
    bridge = await startBridge([]);
  });

  afterAll(() => {
    bridge?.proc.kill();
  });

  it("reflects an operator input within two ticks", async () => {
    const id = await bridge.client.openSession({ scenario: "parking_lot", mode: "live" });
    const { feed, socket } = attach(bridge, id);
    await until(() => feed.hello !== null, "hello");
    const limit = feed.hello!.delta_limit;
    socket.start();

    // let the loop settle, then time the reflection
    await until(() => feed.frames.length >= 3, "first frames");
    const sentAfterTick = feed.frames[feed.frames.length - 1].tick;
    socket.steer(-1, Date.now());

    await until(
      () => feed.frames.some((f) => f.delta_ref < -0.5),
      "steering reflected",
      5000,
    );
    const reflected = feed.frames.find((f) => f.delta_ref < -0.5)!;
    expect(reflected.delta_ref).toBeCloseTo(-limit, 12);
    expect(reflected.tick - sentAfterTick).toBeLessThanOrEqual(2);

    // full lock from straight ahead exceeds the rate window, so the
    // corrector's applied angle lags and the override flag shows it
    expect(Math.abs(reflected.delta_applied - reflected.delta_ref)).toBeGreaterThan(0.008);
    expect(reflected.intervention).toBe(true);
    expect(reflected.client_ts).not.toBeNull();

    socket.stop();
    socket.close();
    await bridge.client.closeSession(id);
    const health = await bridge.client.health();
    expect(health.sessions).toBe(0);
  }, 30000);

  it("holds the last steering value across silent ticks", async () => {
    const id = await bridge.client.openSession({ scenario: "parking_lot", mode: "live" });
    const { feed, socket } = attach(bridge, id);
    await until(() => feed.hello !== null, "hello");
    socket.start();
    socket.steer(0.25);
    await until(() => feed.frames.length >= 8, "frames");
    socket.stop();
    socket.close();

    const limit = feed.hello!.delta_limit;
    const held = feed.frames.filter((f) => Math.abs(f.delta_ref - 0.25 * limit) < 1e-12);
    expect(held.length).toBeGreaterThanOrEqual(4); // zero-order hold, no decay
    await bridge.client.closeSession(id);
  }, 30000);
});
