/**
 * Operator console wiring: websocket transport, canvas painting, keyboard
 * piloting, agent playback timer, report panel. All protocol logic lives
 * in Session; this file only touches the DOM.
 */

import { Session, SessionView, TransportEvents, actionForKey } from "./session.js";
import { paintGrid, sparklinePoints, SUPPRESSED_PURPLE } from "./render.js";
import { reportSections } from "./report.js";
import { ControlMode } from "./session.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing #${id}`);
  }
  return el as T;
}

const statusEl = byId<HTMLSpanElement>("status");
const connectBtn = byId<HTMLButtonElement>("connect");
const scenarioSel = byId<HTMLSelectElement>("scenario");
const modeSel = byId<HTMLSelectElement>("mode");
const downsampleChk = byId<HTMLInputElement>("downsample");
const speedInput = byId<HTMLInputElement>("speed");
const startBtn = byId<HTMLButtonElement>("start");
const gridCanvas = byId<HTMLCanvasElement>("grid");
const sparkCanvas = byId<HTMLCanvasElement>("spark");
const countersEl = byId<HTMLDivElement>("counters");
const rewardEl = byId<HTMLDivElement>("reward");
const reportEl = byId<HTMLDivElement>("report");
const toastEl = byId<HTMLDivElement>("toast");

function wsTransport(events: TransportEvents) {
  const ws = new WebSocket(`ws://${location.host}/ws`);
  ws.onopen = () => events.onOpen();
  ws.onmessage = (ev) => events.onLine(String(ev.data));
  ws.onerror = () => events.onClose("websocket error");
  ws.onclose = () => events.onClose("");
  return {
    send: (line: string) => ws.send(line),
    close: () => ws.close(1000),
  };
}

const session = new Session(wsTransport, render);

// --- painting ----------------------------------------------------------

const cellScale = 6;
let offscreen: HTMLCanvasElement | null = null;

function paintView(view: SessionView): void {
  const obs = view.obs;
  const ctx = gridCanvas.getContext("2d");
  if (obs === null || ctx === null) {
    return;
  }
  const { height, width } = obs.grid;
  if (offscreen === null || offscreen.width !== width || offscreen.height !== height) {
    offscreen = document.createElement("canvas");
    offscreen.width = width;
    offscreen.height = height;
  }
  const buf = paintGrid(obs.grid);
  offscreen.getContext("2d")!.putImageData(new ImageData(buf, width, height), 0, 0);

  gridCanvas.width = width * cellScale;
  gridCanvas.height = height * cellScale;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(offscreen, 0, 0, gridCanvas.width, gridCanvas.height);

  const [r, c] = obs.agentPos;
  ctx.strokeStyle = view.done ? "#888" : "#00e5ff";
  ctx.lineWidth = 2;
  ctx.strokeRect(c * cellScale + 1, r * cellScale + 1, cellScale - 2, cellScale - 2);
}

function paintSparkline(series: number[]): void {
  const ctx = sparkCanvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  ctx.clearRect(0, 0, sparkCanvas.width, sparkCanvas.height);
  const pts = sparklinePoints(series, sparkCanvas.width, sparkCanvas.height);
  if (pts.length < 2) {
    return;
  }
  ctx.strokeStyle = "#ff7043";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(pts[0]![0], pts[0]![1]);
  for (const [x, y] of pts.slice(1)) {
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

let toastTimer: number | undefined;

function render(view: SessionView): void {
  statusEl.textContent =
    view.connection + (view.connectionError ? ` (${view.connectionError})` : "");
  statusEl.className = view.connection;
  connectBtn.textContent = view.connection === "connected" ? "reconnect" : "connect";

  if (scenarioSel.options.length !== view.scenarios.length) {
    scenarioSel.replaceChildren(
      ...view.scenarios.map((s) => {
        const opt = document.createElement("option");
        opt.value = s.path;
        opt.textContent =
          s.width !== undefined ? `${s.path} (${s.width}x${s.height})` : s.path;
        return opt;
      }),
    );
  }

  startBtn.disabled = view.connection !== "connected";
  paintView(view);
  paintSparkline(view.burntSeries);

  const burnt = view.burntSeries[view.burntSeries.length - 1] ?? 0;
  countersEl.textContent =
    `step ${view.stepCount}` +
    `  burnt ${burnt}` +
    (view.done ? "  EPISODE OVER" : view.episodeActive ? "  live" : "");

  const t = view.rewardTotals;
  rewardEl.textContent =
    `reward ${t.total.toFixed(3)}  ` +
    `(extinguish ${t.extinguish.toFixed(2)}, containment ${t.containment.toFixed(2)}, ` +
    `proximity ${t.proximity.toFixed(2)}, idle ${t.idle_penalty.toFixed(2)}, ` +
    `waste ${t.waste_penalty.toFixed(2)})`;

  if (view.report !== null) {
    reportEl.replaceChildren(
      ...reportSections(view.report).flatMap((sec) => {
        const h = document.createElement("h3");
        h.textContent = sec.title;
        const pre = document.createElement("pre");
        pre.textContent = sec.lines.join("\n");
        return [h, pre];
      }),
    );
    reportEl.hidden = false;
  } else {
    reportEl.hidden = true;
    reportEl.replaceChildren();
  }

  if (view.toast !== null) {
    toastEl.textContent = view.toast;
    toastEl.hidden = false;
    window.clearTimeout(toastTimer);
    toastTimer = window.setTimeout(() => {
      session.clearToast();
      toastEl.hidden = true;
    }, 2500);
  }
}

// --- controls ----------------------------------------------------------

connectBtn.addEventListener("click", () => {
  session.disconnect();
  session.connect();
});

startBtn.addEventListener("click", () => {
  const mode = modeSel.value as ControlMode;
  session.reset(scenarioSel.value, mode, downsampleChk.checked);
  gridCanvas.focus();
});

document.addEventListener("keydown", (ev) => {
  if (actionForKey(ev.key) === undefined) {
    return;
  }
  if (ev.target instanceof HTMLInputElement || ev.target instanceof HTMLSelectElement) {
    return;
  }
  ev.preventDefault();
  session.pilotKey(ev.key);
});

// Agent playback: the slider sets ms per step; the tick no-ops while a
// reply is outstanding, so slow servers just run at their own pace.
let agentTimer: number | undefined;
function restartAgentTimer(): void {
  window.clearInterval(agentTimer);
  agentTimer = window.setInterval(
    () => session.agentTick(),
    Number(speedInput.value),
  );
}
speedInput.addEventListener("input", restartAgentTimer);
restartAgentTimer();

// Legend swatch for the suppressant color, painted from the same constant
// the renderer uses.
const swatch = byId<HTMLSpanElement>("purple-swatch");
swatch.style.background = `rgb(${SUPPRESSED_PURPLE.join(",")})`;

session.connect();
