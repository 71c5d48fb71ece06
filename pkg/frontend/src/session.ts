/**
 * One protocol session driving one view.
 *
 * The protocol is strict request/reply, so the session keeps exactly one
 * request in flight and queues the rest; a key pressed while a step is
 * pending is queued, never dropped and never duplicated. Every sent line
 * lands in `transcript`, which is enough to replay the whole session
 * against a fresh server and get the same episode back.
 */

import {
  AgentName,
  DecodedObservation,
  RewardBreakdown,
  ScenarioEntry,
  ThreatReport,
  closeRequest,
  decodeObservation,
  resetRequest,
  scenariosRequest,
  stateRequest,
  stepRequest,
} from "./protocol.js";

export interface Transport {
  send(line: string): void;
  close(): void;
}

export interface TransportEvents {
  onOpen(): void;
  onLine(line: string): void;
  onClose(reason: string): void;
}

export type TransportFactory = (events: TransportEvents) => Transport;

export type ConnectionState = "disconnected" | "connecting" | "connected" | "error";
export type ControlMode = "manual" | "blind" | "circler";

export interface RewardTotals {
  extinguish: number;
  containment: number;
  proximity: number;
  idle_penalty: number;
  waste_penalty: number;
  total: number;
}

const ZERO_TOTALS: RewardTotals = {
  extinguish: 0,
  containment: 0,
  proximity: 0,
  idle_penalty: 0,
  waste_penalty: 0,
  total: 0,
};

export interface SessionView {
  connection: ConnectionState;
  connectionError: string | null;
  scenarios: ScenarioEntry[];
  scenarioPath: string | null;
  mode: ControlMode;
  episodeActive: boolean;
  done: boolean;
  obs: DecodedObservation | null;
  stepCount: number;
  burntSeries: number[];
  lastReward: RewardBreakdown | null;
  rewardTotals: RewardTotals;
  report: ThreatReport | null;
  toast: string | null;
}

export function actionForKey(key: string): number | undefined {
  switch (key) {
    case "ArrowUp":
      return 0;
    case "ArrowDown":
      return 1;
    case "ArrowLeft":
      return 2;
    case "ArrowRight":
      return 3;
    case " ":
    case "Space":
      return 4;
    default:
      return undefined;
  }
}

interface Outgoing {
  line: string;
  cmd: string;
}

export class Session {
  readonly view: SessionView;
  /** Every request line sent, in order. */
  readonly transcript: string[] = [];

  private transport: Transport | null = null;
  private pending: Outgoing | null = null;
  private queue: Outgoing[] = [];
  private onChange: (view: SessionView) => void;
  // Bumped on every connect/disconnect so a slow close event from a
  // replaced transport cannot touch the live one.
  private generation = 0;

  constructor(
    private factory: TransportFactory,
    onChange: (view: SessionView) => void = () => {},
  ) {
    this.onChange = onChange;
    this.view = {
      connection: "disconnected",
      connectionError: null,
      scenarios: [],
      scenarioPath: null,
      mode: "manual",
      episodeActive: false,
      done: false,
      obs: null,
      stepCount: 0,
      burntSeries: [],
      lastReward: null,
      rewardTotals: { ...ZERO_TOTALS },
      report: null,
      toast: null,
    };
  }

  connect(): void {
    if (this.view.connection === "connecting" || this.view.connection === "connected") {
      return;
    }
    const hadEpisode = this.view.episodeActive;
    const gen = ++this.generation;
    this.view.connection = "connecting";
    this.view.connectionError = null;
    this.notify();
    this.transport = this.factory({
      onOpen: () => {
        if (gen !== this.generation) return;
        this.view.connection = "connected";
        this.send({ line: scenariosRequest(), cmd: "scenarios" });
        if (hadEpisode) {
          // Resync: the server may still hold our episode (stream
          // transports) or be a fresh session (one per ws connection).
          this.send({ line: stateRequest(), cmd: "state" });
        }
        this.notify();
      },
      onLine: (line) => {
        if (gen !== this.generation) return;
        this.handleReply(line);
      },
      onClose: (reason) => {
        if (gen !== this.generation) return;
        this.transport = null;
        this.pending = null;
        this.queue = [];
        if (this.view.connection !== "disconnected") {
          this.view.connection = reason ? "error" : "disconnected";
          this.view.connectionError = reason || null;
        }
        this.notify();
      },
    });
  }

  disconnect(): void {
    this.generation += 1;
    this.view.connection = "disconnected";
    this.transport?.close();
    this.transport = null;
    this.pending = null;
    this.queue = [];
    this.notify();
  }

  reset(scenarioPath: string, mode: ControlMode = "manual", downsample = false): void {
    const agent: AgentName | undefined = mode === "manual" ? undefined : mode;
    this.view.scenarioPath = scenarioPath;
    this.view.mode = mode;
    this.send({ line: resetRequest(scenarioPath, { agent, downsample }), cmd: "reset" });
  }

  /** Manual piloting. Returns false when the input was ignored. */
  pilotKey(key: string): boolean {
    const action = actionForKey(key);
    if (action === undefined) {
      return false;
    }
    if (!this.view.episodeActive || this.view.mode !== "manual") {
      this.cue("no active manual episode");
      return false;
    }
    if (this.view.done) {
      this.cue("episode is over");
      return false;
    }
    this.send({ line: stepRequest(action), cmd: "step" });
    return true;
  }

  /** Agent-mode driver: one server-chosen step per call, when idle. */
  agentTick(): boolean {
    if (
      this.view.connection !== "connected" ||
      this.view.mode === "manual" ||
      !this.view.episodeActive ||
      this.view.done ||
      this.pending !== null ||
      this.queue.length > 0
    ) {
      return false;
    }
    this.send({ line: stepRequest(), cmd: "step" });
    return true;
  }

  requestState(): void {
    this.send({ line: stateRequest(), cmd: "state" });
  }

  requestClose(): void {
    this.send({ line: closeRequest(), cmd: "close" });
  }

  /** Feed recorded request lines through the normal one-in-flight queue. */
  replay(lines: string[]): void {
    for (const line of lines) {
      let cmd = "";
      try {
        cmd = JSON.parse(line).cmd ?? "";
      } catch {
        continue;
      }
      if (cmd === "reset") {
        this.view.episodeActive = false;
        this.view.report = null;
      }
      this.send({ line, cmd });
    }
  }

  clearToast(): void {
    this.view.toast = null;
    this.notify();
  }

  // --- internals --------------------------------------------------------

  private cue(message: string): void {
    this.view.toast = message;
    this.notify();
  }

  private send(out: Outgoing): void {
    if (this.transport === null) {
      this.cue("not connected");
      return;
    }
    if (this.pending !== null) {
      this.queue.push(out);
      return;
    }
    this.pending = out;
    this.transcript.push(out.line);
    this.transport.send(out.line);
  }

  private handleReply(line: string): void {
    const request = this.pending;
    this.pending = null;
    let reply: any;
    try {
      reply = JSON.parse(line);
    } catch {
      this.view.toast = "unreadable reply from server";
      this.pump();
      return;
    }
    if (request === null) {
      // Unsolicited data would mean the transports disagree about framing.
      this.view.toast = "reply with no request in flight";
      this.pump();
      return;
    }
    this.applyReply(request.cmd, reply);
    this.pump();
  }

  private pump(): void {
    const next = this.queue.shift();
    if (next !== undefined && this.transport !== null) {
      this.pending = next;
      this.transcript.push(next.line);
      this.transport.send(next.line);
    }
    this.notify();
  }

  private applyReply(cmd: string, reply: any): void {
    if (reply.ok !== true) {
      if (reply.error === "episode_done") {
        this.view.done = true;
      }
      if (reply.error === "not_reset") {
        this.view.episodeActive = false;
      }
      this.view.toast = reply.message ?? reply.error ?? "request failed";
      return;
    }
    switch (cmd) {
      case "scenarios":
        this.view.scenarios = reply.scenarios ?? [];
        return;
      case "reset":
        this.view.episodeActive = true;
        this.view.done = false;
        this.view.stepCount = 0;
        this.view.burntSeries = [];
        this.view.lastReward = null;
        this.view.rewardTotals = { ...ZERO_TOTALS };
        this.view.report = null;
        this.decodeInto(reply.obs);
        return;
      case "step": {
        this.decodeInto(reply.obs);
        const reward = reply.reward as RewardBreakdown | undefined;
        if (reward) {
          this.view.lastReward = reward;
          const t = this.view.rewardTotals;
          t.extinguish += reward.extinguish;
          t.containment += reward.containment;
          t.proximity += reward.proximity;
          t.idle_penalty += reward.idle_penalty;
          t.waste_penalty += reward.waste_penalty;
          t.total += reward.total;
        }
        if (reply.info) {
          this.view.stepCount = reply.info.step;
          this.view.burntSeries.push(reply.info.burnt_count);
        }
        if (reply.done) {
          this.view.done = true;
          this.view.report = reply.report ?? null;
        }
        return;
      }
      case "state":
        this.view.episodeActive = true;
        this.view.done = Boolean(reply.done);
        this.decodeInto(reply.obs);
        if (reply.info) {
          this.view.stepCount = reply.info.step;
        }
        return;
      case "close":
        this.view.episodeActive = false;
        return;
      default:
        return;
    }
  }

  /** Swap in a decoded frame; on a bad frame keep the last good one. */
  private decodeInto(obsDoc: unknown): void {
    try {
      this.view.obs = decodeObservation(obsDoc);
    } catch (err) {
      this.view.toast = `bad frame: ${err instanceof Error ? err.message : String(err)}`;
    }
  }

  private notify(): void {
    this.onChange(this.view);
  }
}
