"""Newline-delimited JSON wire protocol for driving the environment.

One request per line, one JSON reply per line, over stdio or a TCP
socket; one environment per session. Requests:

    {"cmd": "reset", "scenario_path": p | "scenario_inline": {...},
     "agent_start"?: [r, c], "agent"?: "blind" | "circler",
     "downsample"?: true}
    {"cmd": "step", "action"?: 0-4}      action optional with an agent
    {"cmd": "state"}
    {"cmd": "scenarios"}
    {"cmd": "close"}

Replies always carry "ok". Observation channels travel run-length
encoded as [count, value, count, value, ...] over the row-major cells,
values quantized to 6 decimals. Replies are serialized with sorted keys
and no whitespace, so a fixed request script yields a byte-stable
transcript. scenario_path values of the form "synthetic:<name>" resolve
against a small built-in registry so clients can run without files.

When a step finishes the episode, the reply carries the rendered threat
report under "report".
"""

from __future__ import annotations

import json
import socketserver
import sys
from pathlib import Path

import numpy as np

from .agents import make_policy
from .env import Action, FireEnv, Observation
from .errors import FiregridError
from .fuels import FuelCatalog, builtin_catalog
from .report import build_report
from .terrain import Scenario, load_scenario, scenario_from_dict, \
    synthetic_scenario

PROTOCOL_VERSION = 1
QUANT_DECIMALS = 6


def _point_fire() -> Scenario:
    s = synthetic_scenario("flat_uniform", width=64, height=64, moisture=0.02,
                           ignitions=[(32, 38, 0)], max_steps=120)
    return s


# Built-in fixtures reachable as scenario_path = "synthetic:<name>".
SYNTHETIC_REGISTRY = {
    "flat_uniform": lambda: synthetic_scenario("flat_uniform", moisture=0.02),
    "single_slope": lambda: synthetic_scenario("single_slope", moisture=0.02),
    "ridge": lambda: synthetic_scenario("ridge", moisture=0.02),
    "two_fuel": lambda: synthetic_scenario("two_fuel", moisture=0.02),
    "point_fire": _point_fire,
}


# --- channel codec -----------------------------------------------------------

def encode_channel(grid: np.ndarray) -> list:
    """Run-length encode a 2-D channel: [count, value, count, value, ...]."""
    flat = np.asarray(grid, dtype=np.float64).ravel()
    q = np.round(flat, QUANT_DECIMALS)
    q[q == 0.0] = 0.0   # fold -0.0
    if q.size == 0:
        return []
    breaks = np.flatnonzero(q[1:] != q[:-1])
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks + 1, [q.size]))
    out = []
    for s, e in zip(starts, ends):
        v = float(q[s])
        out.append(int(e - s))
        out.append(int(v) if v.is_integer() else v)
    return out


def decode_channel(rle: list, shape: tuple) -> np.ndarray:
    if len(rle) % 2 != 0:
        raise FiregridError("run-length payload has odd length")
    counts = np.asarray(rle[0::2], dtype=np.int64)
    values = np.asarray(rle[1::2], dtype=np.float64)
    if (counts <= 0).any():
        raise FiregridError("run-length counts must be positive")
    total = int(counts.sum())
    if total != shape[0] * shape[1]:
        raise FiregridError(
            f"run-length decodes to {total} cells, expected "
            f"{shape[0] * shape[1]}")
    return np.repeat(values, counts).reshape(shape)


def encode_observation(obs: Observation, downsample: bool = False) -> dict:
    frames = []
    for frame in obs.frames:
        channels = frame[:, ::2, ::2] if downsample else frame
        frames.append([encode_channel(channels[0]),
                       encode_channel(channels[1])])
    shape = obs.frames[0].shape[1:]
    if downsample:
        shape = ((shape[0] + 1) // 2, (shape[1] + 1) // 2)
    return {
        "shape": [int(shape[0]), int(shape[1])],
        "frames": frames,
        "agent_pos": [int(obs.agent_pos[0]), int(obs.agent_pos[1])],
        "over_burning": bool(obs.over_burning),
    }


def decode_observation(doc: dict) -> dict:
    """Wire form back to arrays; returns {frames, agent_pos, over_burning}."""
    shape = tuple(doc["shape"])
    frames = [np.stack([decode_channel(ch, shape) for ch in pair])
              for pair in doc["frames"]]
    return {
        "frames": frames,
        "agent_pos": tuple(doc["agent_pos"]),
        "over_burning": bool(doc["over_burning"]),
    }


def _reward_dict(reward) -> dict:
    return {
        "extinguish": round(reward.extinguish, QUANT_DECIMALS),
        "containment": round(reward.containment, QUANT_DECIMALS),
        "proximity": round(reward.proximity, QUANT_DECIMALS),
        "idle_penalty": round(reward.idle_penalty, QUANT_DECIMALS),
        "waste_penalty": round(reward.waste_penalty, QUANT_DECIMALS),
        "total": round(reward.total, QUANT_DECIMALS),
    }


def dumps(reply: dict) -> str:
    return json.dumps(reply, sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


# --- session -----------------------------------------------------------------

class ProtocolSession:
    """State machine for one connection: reset, then step until close."""

    def __init__(self, catalog: FuelCatalog | None = None,
                 scenario_root: str | Path | None = None):
        self.catalog = catalog if catalog is not None else builtin_catalog()
        self.scenario_root = Path(scenario_root) if scenario_root else None
        self.env: FireEnv | None = None
        self.policy = None
        self.downsample = False
        self.closed = False

    # one line in, one line out
    def handle_line(self, line: str) -> str:
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            return dumps({"ok": False, "error": "bad_request",
                          "message": "not valid JSON"})
        if not isinstance(request, dict) or "cmd" not in request:
            return dumps({"ok": False, "error": "bad_request",
                          "message": "expected an object with 'cmd'"})
        cmd = request["cmd"]
        handler = getattr(self, f"_cmd_{cmd}", None) \
            if isinstance(cmd, str) and not cmd.startswith("_") else None
        if handler is None:
            return dumps({"ok": False, "error": "bad_request",
                          "message": f"unknown cmd {cmd!r}"})
        try:
            return dumps(handler(request))
        except FiregridError as exc:
            return dumps({"ok": False, "error": "bad_request",
                          "message": str(exc)})

    def _load(self, request: dict) -> Scenario:
        if "scenario_inline" in request:
            return scenario_from_dict(request["scenario_inline"],
                                      catalog=self.catalog)
        path = request.get("scenario_path")
        if not isinstance(path, str) or not path:
            raise FiregridError("reset needs scenario_path or scenario_inline")
        if path.startswith("synthetic:"):
            name = path.split(":", 1)[1]
            if name not in SYNTHETIC_REGISTRY:
                raise FiregridError(f"unknown synthetic scenario {name!r}")
            return SYNTHETIC_REGISTRY[name]()
        file_path = Path(path)
        if self.scenario_root is not None and not file_path.is_absolute():
            file_path = self.scenario_root / file_path
        if not file_path.exists():
            raise FiregridError(f"scenario file not found: {path}")
        return load_scenario(file_path, catalog=self.catalog)

    def _cmd_reset(self, request: dict) -> dict:
        scenario = self._load(request)
        env = FireEnv(scenario, self.catalog)
        agent_start = request.get("agent_start")
        obs = env.reset(tuple(agent_start) if agent_start is not None else None)
        self.policy = None
        agent = request.get("agent")
        if agent is not None:
            self.policy = make_policy(agent)
        self.downsample = bool(request.get("downsample", False))
        self.env = env
        return {"ok": True, "protocol": PROTOCOL_VERSION,
                "obs": encode_observation(obs, self.downsample)}

    def _cmd_step(self, request: dict) -> dict:
        if self.env is None:
            return {"ok": False, "error": "not_reset"}
        if self.env.done:
            return {"ok": False, "error": "episode_done"}
        raw = request.get("action")
        if raw is None:
            if self.policy is None:
                return {"ok": False, "error": "bad_action",
                        "message": "no action given and no agent attached"}
            action = Action(self.policy(self.env.observation()))
        else:
            if isinstance(raw, bool) or not isinstance(raw, int) \
                    or not 0 <= raw <= 4:
                return {"ok": False, "error": "bad_action",
                        "message": f"action must be an integer 0-4, got {raw!r}"}
            action = Action(raw)

        obs, reward, done, info = self.env.step(action)
        reply = {
            "ok": True,
            "obs": encode_observation(obs, self.downsample),
            "reward": _reward_dict(reward),
            "done": done,
            "action": int(action),
            "info": info,
        }
        if done:
            report = build_report(self.env.scenario, self.env.log,
                                  catalog=self.catalog)
            reply["report"] = report.to_dict()
        return reply

    def _cmd_state(self, request: dict) -> dict:
        if self.env is None:
            return {"ok": False, "error": "not_reset"}
        eng = self.env.engine
        return {
            "ok": True,
            "obs": encode_observation(self.env.observation(), self.downsample),
            "done": self.env.done,
            "info": {
                "step": eng.state.step,
                "burnt_count": eng.n_burnt,
                "burning_count": eng.n_burning,
                "suppressed_count": eng.n_suppressed,
            },
        }

    def _cmd_scenarios(self, request: dict) -> dict:
        entries = []
        for name in sorted(SYNTHETIC_REGISTRY):
            s = SYNTHETIC_REGISTRY[name]()
            entries.append({"path": f"synthetic:{name}",
                            "width": s.width, "height": s.height})
        if self.scenario_root is not None and self.scenario_root.is_dir():
            for p in sorted(self.scenario_root.glob("*.json")):
                entries.append({"path": p.name})
        return {"ok": True, "scenarios": entries}

    def _cmd_close(self, request: dict) -> dict:
        self.closed = True
        return {"ok": True, "closed": True}


def serve_stream(in_stream, out_stream, catalog: FuelCatalog | None = None,
                 scenario_root=None) -> None:
    """Run one session over text streams until close or end-of-stream."""
    session = ProtocolSession(catalog, scenario_root)
    for line in in_stream:
        line = line.strip()
        if not line:
            continue
        out_stream.write(session.handle_line(line) + "\n")
        out_stream.flush()
        if session.closed:
            break


def serve_stdio(catalog: FuelCatalog | None = None, scenario_root=None) -> None:
    serve_stream(sys.stdin, sys.stdout, catalog, scenario_root)


class _SocketHandler(socketserver.StreamRequestHandler):
    def handle(self):
        session = ProtocolSession(self.server.catalog,
                                  self.server.scenario_root)
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            self.wfile.write((session.handle_line(line) + "\n").encode())
            if session.closed:
                break


class ProtocolServer(socketserver.ThreadingTCPServer):
    """One independent session per TCP connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str = "127.0.0.1", port: int = 0,
                 catalog: FuelCatalog | None = None, scenario_root=None):
        super().__init__((host, port), _SocketHandler)
        self.catalog = catalog if catalog is not None else builtin_catalog()
        self.scenario_root = scenario_root


def serve_socket(host: str = "127.0.0.1", port: int = 0,
                 catalog: FuelCatalog | None = None,
                 scenario_root=None) -> ProtocolServer:
    """Bind and return the server; caller drives serve_forever()."""
    return ProtocolServer(host, port, catalog, scenario_root)
