"""Episode environment: a helitack agent on top of the grid engine.

The agent occupies one cell, moves one cell per action (clamped at the
edges) or releases suppressant over a Chebyshev square centered on
itself. Every action, including Drop, advances the fire exactly one
engine step, so time flows uniformly regardless of what the agent does.

Observations are a 4-frame stack, newest first; each frame has a phase
channel (0 unburnt, 1/3 suppressed, 2/3 burning, 1 burnt) and an
intensity channel, both in [0, 1]. Frames are views into a ring buffer
and stay valid for the next three steps; callers that retain them
longer should copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .engine import BURNING, DROP_RADIUS, FireEngine
from .errors import ContractError, ValidationError
from .fuels import FuelCatalog
from .terrain import Scenario

FRAME_STACK = 4

# Phase channel codes indexed by engine phase (unburnt, burning, burnt,
# suppressed).
_PHASE_TO_CODE = np.array([0.0, 2.0 / 3.0, 1.0, 1.0 / 3.0], dtype=np.float32)


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    DROP = 4


_MOVES = {Action.UP: (-1, 0), Action.DOWN: (1, 0),
          Action.LEFT: (0, -1), Action.RIGHT: (0, 1)}


@dataclass(frozen=True)
class EnvConfig:
    """Reward coefficients and footprint sizes; defaults are the tuned set."""

    extinguish_reward: float = 1.0      # per burning cell put out by a Drop
    ignition_penalty: float = 0.02      # per newly ignited cell, subtracted
    burnt_area_penalty: float = 0.001   # times burnt fraction, every step
    proximity_bonus: float = 0.01       # agent near the fire front
    proximity_radius: int = 5           # Chebyshev reach of the bonus
    idle_penalty: float = 0.005         # non-Drop step, nothing extinguished
    waste_penalty: float = 0.05         # Drop that touches no burning cell
    drop_radius: int = DROP_RADIUS


@dataclass(frozen=True)
class RewardBreakdown:
    extinguish: float
    containment: float
    proximity: float
    idle_penalty: float
    waste_penalty: float
    total: float

    @classmethod
    def build(cls, extinguish=0.0, containment=0.0, proximity=0.0,
              idle_penalty=0.0, waste_penalty=0.0):
        return cls(extinguish=extinguish, containment=containment,
                   proximity=proximity, idle_penalty=idle_penalty,
                   waste_penalty=waste_penalty,
                   total=extinguish + containment + proximity
                   + idle_penalty + waste_penalty)


@dataclass(frozen=True)
class Observation:
    frames: tuple          # FRAME_STACK views of (2, height, width) float32
    agent_pos: tuple       # (row, col)
    over_burning: bool

    def stacked(self) -> np.ndarray:
        """(FRAME_STACK, 2, height, width) copy, newest first."""
        return np.stack(self.frames)


OUTCOME_CONTAINED = "contained"
OUTCOME_MAX_STEPS = "max_steps"


@dataclass
class EpisodeLog:
    """Everything needed to retell (and exactly replay) one episode."""

    agent_start: tuple
    actions: list = field(default_factory=list)
    drops: list = field(default_factory=list)   # {step, row, col, extinguished_count}
    burnt_trajectory: list = field(default_factory=list)
    burning_trajectory: list = field(default_factory=list)
    reward_total: float = 0.0
    outcome: str | None = None
    contained_at: int | None = None

    def to_dict(self) -> dict:
        return {
            "agent_start": list(self.agent_start),
            "actions": list(self.actions),
            "drops": [dict(d) for d in self.drops],
            "burnt_trajectory": list(self.burnt_trajectory),
            "burning_trajectory": list(self.burning_trajectory),
            "reward_total": self.reward_total,
            "outcome": self.outcome,
            "contained_at": self.contained_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EpisodeLog":
        log = cls(agent_start=tuple(doc["agent_start"]))
        log.actions = [int(a) for a in doc["actions"]]
        log.drops = [dict(d) for d in doc["drops"]]
        log.burnt_trajectory = [int(v) for v in doc["burnt_trajectory"]]
        log.burning_trajectory = [int(v) for v in doc["burning_trajectory"]]
        log.reward_total = float(doc["reward_total"])
        log.outcome = doc["outcome"]
        log.contained_at = doc["contained_at"]
        return log


class FireEnv:
    """Gym-shaped episode loop; reset() then step() until done."""

    def __init__(self, scenario: Scenario, catalog: FuelCatalog | None = None,
                 config: EnvConfig | None = None,
                 check_invariants: bool = False):
        self.config = config if config is not None else EnvConfig()
        self.engine = FireEngine(scenario, catalog,
                                 check_invariants=check_invariants)
        self.scenario = scenario
        self._h, self._w = scenario.height, scenario.width
        self._frames = np.zeros((FRAME_STACK, 2, self._h, self._w),
                                dtype=np.float32)
        self._done = True
        self.log: EpisodeLog | None = None

    # --- lifecycle -----------------------------------------------------------

    def default_start(self) -> tuple:
        return (self._h // 2, self._w // 2)

    def reset(self, agent_start: tuple | None = None) -> Observation:
        start = tuple(agent_start) if agent_start is not None \
            else self.default_start()
        if not self.scenario.in_bounds(*start):
            raise ValidationError(f"agent_start {start} is out of bounds")
        self.engine.reset()
        self.agent_pos = start
        self._done = False
        self._slot = 0
        self.log = EpisodeLog(agent_start=start)

        self._phase_chan = _PHASE_TO_CODE[self.engine.state.phase]
        self._render_into(self._frames[0])
        for i in range(1, FRAME_STACK):
            self._frames[i] = self._frames[0]
        return self._observation()

    def step(self, action) -> tuple:
        """-> (Observation, RewardBreakdown, done, info dict)."""
        if self._done:
            raise ContractError("step() called on a finished episode")
        action = Action(action)
        cfg = self.config
        eng = self.engine

        extinguished = 0
        wasted = False
        drop_site = None
        if action == Action.DROP:
            res = eng.apply_suppressant(*self.agent_pos,
                                        radius=cfg.drop_radius)
            extinguished = int(res.extinguished.size)
            wasted = extinguished == 0
            touched = np.concatenate((res.extinguished, res.protected))
            self._phase_chan[touched] = _PHASE_TO_CODE[3]
            drop_site = self.agent_pos
        else:
            dr, dc = _MOVES[action]
            r = min(self._h - 1, max(0, self.agent_pos[0] + dr))
            c = min(self._w - 1, max(0, self.agent_pos[1] + dc))
            self.agent_pos = (r, c)

        delta = eng.step()
        if delta.ignited.size:
            self._phase_chan[delta.ignited] = _PHASE_TO_CODE[1]
        if delta.burned_out.size:
            self._phase_chan[delta.burned_out] = _PHASE_TO_CODE[2]
        if drop_site is not None:
            self.log.drops.append({
                "step": delta.step, "row": drop_site[0], "col": drop_site[1],
                "extinguished_count": extinguished,
            })

        self._slot = (self._slot + 1) % FRAME_STACK
        self._render_into(self._frames[self._slot])

        reward = RewardBreakdown.build(
            extinguish=cfg.extinguish_reward * extinguished,
            containment=-cfg.ignition_penalty * delta.ignited.size
            - cfg.burnt_area_penalty * eng.burnt_fraction(),
            proximity=cfg.proximity_bonus if self._near_fire() else 0.0,
            idle_penalty=-cfg.idle_penalty
            if action != Action.DROP and extinguished == 0 else 0.0,
            waste_penalty=-cfg.waste_penalty if wasted else 0.0,
        )

        self.log.actions.append(int(action))
        self.log.burnt_trajectory.append(eng.n_burnt)
        self.log.burning_trajectory.append(eng.n_burning)
        self.log.reward_total += reward.total

        done = eng.is_finished()
        if done:
            self._done = True
            if eng.fire_out():
                self.log.outcome = OUTCOME_CONTAINED
                self.log.contained_at = eng.state.step
            else:
                self.log.outcome = OUTCOME_MAX_STEPS

        info = {
            "step": eng.state.step,
            "newly_ignited": int(delta.ignited.size),
            "newly_burnt": int(delta.burned_out.size),
            "extinguished": extinguished,
            "burnt_count": eng.n_burnt,
        }
        return self._observation(), reward, done, info

    @property
    def done(self) -> bool:
        return self._done

    def observation(self) -> Observation:
        """Current observation without advancing time."""
        if self.log is None:
            raise ContractError("observation() before reset()")
        return self._observation()

    # --- internals -----------------------------------------------------------

    def _render_into(self, frame: np.ndarray) -> None:
        frame[0] = self._phase_chan.reshape(self._h, self._w)
        frame[1] = self.engine.state.intensity.reshape(self._h, self._w)

    def _near_fire(self) -> bool:
        front = self.engine.state.frontier
        if front.size == 0:
            return False
        rows, cols = np.divmod(front, self._w)
        chebyshev = np.maximum(np.abs(rows - self.agent_pos[0]),
                               np.abs(cols - self.agent_pos[1]))
        return bool(chebyshev.min() <= self.config.proximity_radius)

    def _observation(self) -> Observation:
        order = [(self._slot - i) % FRAME_STACK for i in range(FRAME_STACK)]
        agent_idx = self.agent_pos[0] * self._w + self.agent_pos[1]
        return Observation(
            frames=tuple(self._frames[i] for i in order),
            agent_pos=self.agent_pos,
            over_burning=bool(self.engine.state.phase[agent_idx] == BURNING),
        )


def play(env: FireEnv, policy, agent_start: tuple | None = None,
         max_steps: int | None = None) -> EpisodeLog:
    """Run one full episode driving env with policy(obs) -> Action."""
    obs = env.reset(agent_start)
    limit = max_steps if max_steps is not None else env.scenario.max_steps
    for _ in range(limit):
        obs, _, done, _ = env.step(policy(obs))
        if done:
            break
    if env.log.outcome is None:
        env.log.outcome = OUTCOME_MAX_STEPS
    return env.log
