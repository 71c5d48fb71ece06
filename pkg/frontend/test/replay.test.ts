/**
 * End-to-end acceptance against the real server: pilot the point-fire
 * fixture by keyboard to containment, then replay the recorded transcript
 * on a fresh connection and check the server hands back the same report.
 */

import { ChildProcess, spawn } from "node:child_process";
import net from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Phase } from "../src/protocol.js";
import { SUPPRESSED_PURPLE, paintGrid, pixelAt } from "../src/render.js";
import { Session, TransportFactory } from "../src/session.js";

let server: ChildProcess;
let port = 0;

beforeAll(async () => {
  server = spawn("python3", ["-m", "firegrid.cli", "serve", "--socket", "--port", "0"], {
    stdio: ["ignore", "ignore", "pipe"],
  });
  port = await new Promise<number>((resolve, reject) => {
    let err = "";
    server.stderr!.setEncoding("utf8");
    server.stderr!.on("data", (chunk: string) => {
      err += chunk;
      const m = err.match(/listening on [^:\s]+:(\d+)/);
      if (m) resolve(Number(m[1]));
    });
    server.on("exit", (code) => reject(new Error(`server exited ${code}\n${err}`)));
    setTimeout(() => reject(new Error(`server start timeout\n${err}`)), 20000);
  });
});

afterAll(() => {
  server?.kill();
});

function tcpTransport(): TransportFactory {
  return (events) => {
    const sock = net.createConnection({ host: "127.0.0.1", port });
    sock.setEncoding("utf8");
    let buf = "";
    sock.on("connect", () => events.onOpen());
    sock.on("data", (chunk: string) => {
      buf += chunk;
      let nl: number;
      while ((nl = buf.indexOf("\n")) >= 0) {
        const line = buf.slice(0, nl);
        buf = buf.slice(nl + 1);
        if (line.trim().length > 0) {
          events.onLine(line);
        }
      }
    });
    sock.on("error", (err) => events.onClose(err.message));
    sock.on("close", () => events.onClose(""));
    return {
      send: (line: string) => sock.write(line + "\n"),
      close: () => sock.end(),
    };
  };
}

function liveSession() {
  const checkers: Array<() => void> = [];
  const session = new Session(tcpTransport(), () => {
    for (const check of [...checkers]) {
      check();
    }
  });
  const waitFor = (pred: () => boolean, label: string, ms = 20000) =>
    new Promise<void>((resolve, reject) => {
      if (pred()) {
        resolve();
        return;
      }
      const timer = setTimeout(() => reject(new Error(`timed out waiting for ${label}`)), ms);
      checkers.push(() => {
        if (pred()) {
          clearTimeout(timer);
          resolve();
        }
      });
    });
  return { session, waitFor };
}

describe("live server session", () => {
  it("keyboard-contains the point fire, replays to the same report", async () => {
    const a = liveSession();
    a.session.connect();
    await a.waitFor(() => a.session.view.scenarios.length > 0, "scenario list");
    const entry = a.session.view.scenarios.find((s) => s.path === "synthetic:point_fire");
    expect(entry).toBeDefined();
    expect(entry!.width).toBe(64);
    expect(entry!.height).toBe(64);

    a.session.reset("synthetic:point_fire");
    await a.waitFor(() => a.session.view.episodeActive, "reset ack");
    expect(a.session.view.obs!.agentPos).toEqual([32, 32]);

    // Fire seeded six cells east of the start: run right, then drop.
    // All seven presses land at once; the queue feeds them out one per
    // acknowledged reply.
    for (let i = 0; i < 6; i += 1) {
      expect(a.session.pilotKey("ArrowRight")).toBe(true);
    }
    expect(a.session.pilotKey(" ")).toBe(true);
    await a.waitFor(() => a.session.view.done, "containment");

    const report = a.session.view.report!;
    expect(report).not.toBeNull();
    expect(report.suppression.containment_step).not.toBeNull();
    expect(report.suppression.containment_step!).toBeLessThan(30);
    expect(report.suppression.containment_step).toBe(7);
    expect(report.suppression.helitack_count).toBe(1);
    expect(report.suppression.water_gal).toBe(800);

    // Suppressant footprint renders purple in the final frame.
    const grid = a.session.view.obs!.grid;
    const suppressed: number[] = [];
    for (let i = 0; i < grid.phase.length; i += 1) {
      if (grid.phase[i] === Phase.Suppressed) {
        suppressed.push(i);
      }
    }
    expect(suppressed.length).toBeGreaterThanOrEqual(24);
    const pixels = paintGrid(grid);
    for (const i of suppressed) {
      expect(pixelAt(pixels, grid.width, Math.floor(i / grid.width), i % grid.width)).toEqual(
        SUPPRESSED_PURPLE,
      );
    }

    // Input after done is refused locally, nothing reaches the wire.
    const linesBefore = a.session.transcript.length;
    expect(a.session.pilotKey("ArrowLeft")).toBe(false);
    expect(a.session.transcript.length).toBe(linesBefore);

    a.session.requestClose();
    await a.waitFor(() => a.session.view.connection === "disconnected", "server close");

    // Fresh connection, same lines, same episode, same report.
    const recorded = [...a.session.transcript];
    const b = liveSession();
    b.session.connect();
    await b.waitFor(() => b.session.view.connection === "connected", "replay connect");
    b.session.replay(recorded);
    await b.waitFor(() => b.session.view.done && b.session.view.report !== null, "replay done");

    expect(b.session.view.report).toEqual(report);
    expect(b.session.view.stepCount).toBe(a.session.view.stepCount);
    expect(Array.from(b.session.view.obs!.grid.phase)).toEqual(
      Array.from(a.session.view.obs!.grid.phase),
    );
  });

  it("downsampled episodes halve the decoded grid", async () => {
    const s = liveSession();
    s.session.connect();
    await s.waitFor(() => s.session.view.connection === "connected", "connect");
    s.session.reset("synthetic:point_fire", "manual", true);
    await s.waitFor(() => s.session.view.episodeActive, "reset ack");
    expect(s.session.view.obs!.grid.height).toBe(32);
    expect(s.session.view.obs!.grid.width).toBe(32);
    s.session.requestClose();
    await s.waitFor(() => s.session.view.connection === "disconnected", "close");
  });

  it("an agent-driven episode runs from bare step ticks", async () => {
    const s = liveSession();
    s.session.connect();
    await s.waitFor(() => s.session.view.connection === "connected", "connect");
    s.session.reset("synthetic:point_fire", "circler");
    await s.waitFor(() => s.session.view.episodeActive, "reset ack");
    // same shape as the browser's playback timer, just faster
    const timer = setInterval(() => s.session.agentTick(), 2);
    try {
      await s.waitFor(() => s.session.view.done, "agent containment");
    } finally {
      clearInterval(timer);
    }
    expect(s.session.view.done).toBe(true);
    expect(s.session.view.report?.suppression.containment_step).not.toBeNull();
    s.session.requestClose();
  });
});
