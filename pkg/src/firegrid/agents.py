"""Built-in baseline policies.

BlindPatrol never looks at the fire: it walks to the northwest corner,
sweeps the whole grid in a serpentine, and releases suppressant on a
fixed cadence. PerimeterCircler reads the newest phase channel, chases
the nearest burning cell, and drops whenever its footprint reaches the
fire; the drop-then-chase loop makes it orbit the frontier in practice.

Both are deterministic functions of (grid dims, start, params) resp.
(observation history, params); neither consults an RNG at decision time.
"""

from __future__ import annotations

import numpy as np

from .engine import DROP_RADIUS
from .env import Action, Observation
from .errors import ValidationError

_BURNING_CODE = np.float32(2.0 / 3.0)


def serpentine_path(width: int, height: int) -> list:
    """One full boustrophedon pass from (0, 0), every cell exactly once."""
    path = []
    for r in range(height):
        cols = range(width) if r % 2 == 0 else range(width - 1, -1, -1)
        path.extend((r, c) for c in cols)
    return path


def _step_toward(pos: tuple, goal: tuple) -> Action:
    """Single move reducing Chebyshev distance; larger axis first, rows
    break ties."""
    dr = goal[0] - pos[0]
    dc = goal[1] - pos[1]
    if abs(dr) >= abs(dc) and dr != 0:
        return Action.DOWN if dr > 0 else Action.UP
    if dc != 0:
        return Action.RIGHT if dc > 0 else Action.LEFT
    return Action.UP if pos[0] > 0 else Action.DOWN


class BlindPatrol:
    """Serpentine sweeper, dropping every k-th step, blind to the fire."""

    def __init__(self, drop_every: int = 8):
        if drop_every < 1:
            raise ValidationError(f"drop_every must be >= 1: {drop_every!r}")
        self.drop_every = drop_every
        self.reset()

    def reset(self) -> None:
        self._tick = 0
        self._cursor = None   # index into the current sweep pass

    def __call__(self, obs: Observation) -> Action:
        self._tick += 1
        if self._tick % self.drop_every == 0:
            return Action.DROP

        pos = obs.agent_pos
        height, width = obs.frames[0].shape[1:]
        if self._cursor is None:
            if pos == (0, 0):
                self._cursor = 0
            else:
                # March to the corner; the pass starts there.
                return Action.UP if pos[0] > 0 else Action.LEFT

        path = serpentine_path(width, height)
        # Clamp-proof: advance only when we actually reached the waypoint.
        if pos == path[self._cursor]:
            self._cursor += 1
            if self._cursor == len(path):
                self._cursor = None
                return Action.UP if pos[0] > 0 else Action.LEFT
        return _step_toward(pos, path[self._cursor])


class PerimeterCircler:
    """Chases the nearest burning cell; drops once its footprint covers it."""

    def __init__(self, drop_radius: int = DROP_RADIUS):
        self.drop_radius = drop_radius
        self.reset()

    def reset(self) -> None:
        self._last_seen = None

    def _nearest_burning(self, obs: Observation) -> tuple | None:
        phase = obs.frames[0][0]
        hits = np.argwhere(phase == _BURNING_CODE)
        if hits.size == 0:
            return None
        r0, c0 = obs.agent_pos
        dist = np.maximum(np.abs(hits[:, 0] - r0), np.abs(hits[:, 1] - c0))
        best = int(dist.argmin())    # argwhere is row-major, ties go first
        return (int(hits[best, 0]), int(hits[best, 1]))

    def __call__(self, obs: Observation) -> Action:
        target = self._nearest_burning(obs)
        if target is None:
            # Fire is out of sight; head for where it last was, never drop.
            goal = self._last_seen
            if goal is None:
                height, width = obs.frames[0].shape[1:]
                goal = (height // 2, width // 2)
            return _step_toward(obs.agent_pos, goal)

        self._last_seen = target
        r0, c0 = obs.agent_pos
        if max(abs(target[0] - r0), abs(target[1] - c0)) <= self.drop_radius:
            return Action.DROP
        return _step_toward(obs.agent_pos, target)


AGENT_KINDS = ("blind", "circler")


def make_policy(kind: str, **params):
    if kind == "blind":
        return BlindPatrol(**params)
    if kind == "circler":
        return PerimeterCircler(**params)
    raise ValidationError(f"unknown agent kind {kind!r}; "
                          f"expected one of {AGENT_KINDS}")
