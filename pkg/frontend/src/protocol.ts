/**
 * Wire protocol types and codecs.
 *
 * The server speaks newline-delimited JSON with sorted keys, one reply
 * per request. Observation channels arrive run-length encoded as flat
 * [count, value, count, value, ...] lists; each frame is a
 * [phase, fire] channel pair, newest frame first. Payloads are
 * identical over TCP and over the websocket bridge.
 */

export const PROTOCOL_VERSION = 1;

export enum Phase {
  Unburnt = 0,
  Burning = 1,
  Burnt = 2,
  Suppressed = 3,
}

// Phase channel codes as sent on the wire (quantized to 6 decimals).
const PHASE_CODES: ReadonlyArray<[number, Phase]> = [
  [0.0, Phase.Unburnt],
  [1 / 3, Phase.Suppressed],
  [2 / 3, Phase.Burning],
  [1.0, Phase.Burnt],
];

export function phaseFromCode(code: number): Phase {
  let best = Phase.Unburnt;
  let bestDist = Infinity;
  for (const [value, phase] of PHASE_CODES) {
    const d = Math.abs(code - value);
    if (d < bestDist) {
      bestDist = d;
      best = phase;
    }
  }
  return best;
}

export interface GridFrame {
  height: number;
  width: number;
  /** Burning intensity 0..1 per cell, row-major. */
  fire: Float32Array;
  /** Decoded phase per cell, row-major. */
  phase: Uint8Array;
}

export interface DecodedObservation {
  grid: GridFrame; // newest frame
  agentPos: [number, number];
  overBurning: boolean;
}

export interface RewardBreakdown {
  extinguish: number;
  containment: number;
  proximity: number;
  idle_penalty: number;
  waste_penalty: number;
  total: number;
}

export interface StepInfo {
  step: number;
  burnt_count: number;
  newly_ignited: number;
  newly_burnt: number;
  extinguished: number;
}

export interface ScenarioEntry {
  path: string;
  width?: number;
  height?: number;
}

export interface ThreatReport {
  version: number;
  forecast: Record<string, unknown> | null;
  suppression: {
    containment_step: number | null;
    drops: Array<Record<string, number>>;
    helitack_count: number;
    water_gal: number;
  };
  burn: {
    final_burnt: number;
    final_burnt_area_m2: number;
    peak_burning: number;
    trajectory: number[];
  };
  advisories: Array<{ zone: number[]; priority: number; rationale: string }>;
  contingency: { max_steps: number; final_burnt_fraction: number };
}

export function decodeChannel(rle: number[], cells: number): Float32Array {
  if (rle.length % 2 !== 0) {
    throw new Error("run-length payload has odd length");
  }
  const out = new Float32Array(cells);
  let at = 0;
  for (let i = 0; i < rle.length; i += 2) {
    const count = rle[i]!;
    const value = rle[i + 1]!;
    if (!Number.isInteger(count) || count <= 0) {
      throw new Error(`run-length count must be a positive integer, got ${count}`);
    }
    if (at + count > cells) {
      throw new Error(`run-length decodes past ${cells} cells`);
    }
    out.fill(value, at, at + count);
    at += count;
  }
  if (at !== cells) {
    throw new Error(`run-length decodes to ${at} cells, expected ${cells}`);
  }
  return out;
}

/** Decode the wire observation, keeping only the newest frame. */
export function decodeObservation(doc: any): DecodedObservation {
  const shape = doc?.shape;
  if (!Array.isArray(shape) || shape.length !== 2) {
    throw new Error("observation is missing its shape");
  }
  const [height, width] = shape as [number, number];
  const cells = height * width;
  const newest = doc.frames?.[0];
  if (!Array.isArray(newest) || newest.length !== 2) {
    throw new Error("observation frame is not a [phase, fire] pair");
  }
  const phaseCodes = decodeChannel(newest[0], cells);
  const fire = decodeChannel(newest[1], cells);
  const phase = new Uint8Array(cells);
  for (let i = 0; i < cells; i += 1) {
    phase[i] = phaseFromCode(phaseCodes[i]!);
  }
  const [row, col] = doc.agent_pos;
  return {
    grid: { height, width, fire, phase },
    agentPos: [row, col],
    overBurning: Boolean(doc.over_burning),
  };
}

// --- requests ---------------------------------------------------------------

export type AgentName = "blind" | "circler";

export function resetRequest(
  scenarioPath: string,
  opts: { agent?: AgentName; downsample?: boolean } = {},
): string {
  const req: Record<string, unknown> = { cmd: "reset", scenario_path: scenarioPath };
  if (opts.agent) req.agent = opts.agent;
  if (opts.downsample) req.downsample = true;
  return stableStringify(req);
}

export function stepRequest(action?: number): string {
  return stableStringify(action === undefined ? { cmd: "step" } : { action, cmd: "step" });
}

export const stateRequest = (): string => stableStringify({ cmd: "state" });
export const scenariosRequest = (): string => stableStringify({ cmd: "scenarios" });
export const closeRequest = (): string => stableStringify({ cmd: "close" });

/** Compact JSON with sorted keys, matching the server's own framing. */
export function stableStringify(value: unknown): string {
  if (value === null || typeof value !== "object" || Array.isArray(value)) {
    if (Array.isArray(value)) {
      return `[${value.map(stableStringify).join(",")}]`;
    }
    return JSON.stringify(value);
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${stableStringify(v)}`);
  return `{${entries.join(",")}}`;
}
