"""Grid fire engine: discrete-time spread on an 8-neighborhood lattice.

Each burning cell pushes an arrival fraction into its neighbors every
step; a neighbor ignites when its accumulated fraction reaches 1. The
per-pair rates come from the spread kernel evaluated with the TARGET
cell's fuel, the uniform scenario wind projected onto the pair direction,
and the signed slope between the pair. All of that is direction-resolved
but time-invariant, so it is precomputed once per scenario into eight
flat increment arrays; a step is then a handful of vectorized gathers
over the burning frontier.

Everything is deterministic: no RNG is consulted after construction.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError
from .fuels import FuelCatalog, builtin_catalog
from .rothermel import fuel_terms
from .terrain import NEIGHBOR_OFFSETS, Scenario

M_TO_FT = 3.280839895
MS_TO_FT_MIN = 196.8503937

DT_MIN = 1.0                  # one step = one minute
IGNITION_THRESHOLD = 1.0
INTENSITY_SCALE = 5000.0      # BTU/ft^2/min mapped to intensity 1.0
BURN_DURATION_BASE = 20       # steps for the reference (short grass) load
DROP_RADIUS = 2               # Chebyshev radius of one suppressant drop

UNBURNT = 0
BURNING = 1
BURNT = 2
SUPPRESSED = 3

_EMPTY = np.empty(0, dtype=np.int64)


def direction_angle(dr: int, dc: int) -> float:
    """Math-convention angle of a grid offset: 0 = east, CCW positive.

    Row index grows southward, hence the sign flip on dr.
    """
    return math.atan2(-dr, dc)


def wind_to_math_rad(dir_deg: float) -> float:
    """Compass 'blowing toward' degrees -> math radians."""
    return math.radians(90.0 - dir_deg)


def wind_unit_vector(dir_deg: float) -> tuple[float, float]:
    """(cos, sin) of the math-convention wind angle.

    Axis-aligned winds come out exact so symmetric scenarios stay
    symmetric to the bit; cos(radians(90)) alone would leak ~6e-17.
    """
    math_deg = (90.0 - dir_deg) % 360.0
    exact = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0),
             180.0: (-1.0, 0.0), 270.0: (0.0, -1.0)}
    if math_deg in exact:
        return exact[math_deg]
    rad = math.radians(math_deg)
    return math.cos(rad), math.sin(rad)


@dataclass(frozen=True)
class StepDelta:
    """What changed in one step, as sorted flat cell indices."""

    step: int
    ignited: np.ndarray
    burned_out: np.ndarray


@dataclass(frozen=True)
class SuppressionResult:
    """Outcome of one drop: burning cells put out, unburnt cells shielded."""

    extinguished: np.ndarray
    protected: np.ndarray


@dataclass(frozen=True)
class CellState:
    row: int
    col: int
    phase: int
    arrival: float
    burn_remaining: int
    intensity: float


class SpreadField:
    """Per-scenario precompute: arrival increments for all 8 directions.

    inc[i, d] is the arrival fraction cell i adds per step to its neighbor
    in direction d, exactly 0.0 when that neighbor is off-grid,
    nonburnable, or unreachable; tgt[i, d] is the neighbor's flat index,
    clamped to i itself for off-grid pairs (their weight is 0 so they
    never matter). Row-contiguous layout keeps the per-step gather over
    the frontier cache-friendly.
    """

    def __init__(self, scenario: Scenario, catalog: FuelCatalog):
        h, w = scenario.height, scenario.width
        n = h * w
        fuel_flat = scenario.fuel_code.ravel().astype(np.int64)
        elev_flat = scenario.elevation.ravel().astype(np.float64)

        r_base = np.zeros(n)
        wind_amp = np.zeros(n)        # wind_coeff * U^B, before projection
        slope_coeff = np.zeros(n)
        intensity = np.zeros(n, dtype=np.float32)
        burn_steps = np.zeros(n, dtype=np.int32)
        burnable = np.zeros(n, dtype=bool)

        u_ft_min = scenario.wind_speed * MS_TO_FT_MIN
        w0_ref = catalog.model_for(1).w0
        for code in np.unique(fuel_flat):
            code = int(code)
            if not catalog.is_burnable(code):
                continue
            fuel = catalog.model_for(code)
            terms = fuel_terms(fuel, scenario.moisture)
            mask = fuel_flat == code
            burnable[mask] = True
            r_base[mask] = terms.r_base
            slope_coeff[mask] = terms.slope_coeff
            if u_ft_min > 0.0:
                wind_amp[mask] = terms.wind_coeff * u_ft_min ** terms.wind_b
            intensity[mask] = min(1.0, terms.i_r / INTENSITY_SCALE)
            burn_steps[mask] = math.ceil(BURN_DURATION_BASE * fuel.w0 / w0_ref)

        wind_cos, wind_sin = wind_unit_vector(scenario.wind_dir_deg)
        cell_ft = scenario.cell_size * M_TO_FT

        cell_ids = np.arange(n, dtype=np.int64)
        rows, cols = np.divmod(cell_ids, w)
        inc = np.zeros((n, 8))
        tgt_map = np.zeros((n, 8), dtype=np.int64)

        for d, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
            diag = math.sqrt(2.0) if dr != 0 and dc != 0 else 1.0
            tr, tc = rows + dr, cols + dc
            inb = (tr >= 0) & (tr < h) & (tc >= 0) & (tc < w)
            tgt = np.where(inb, tr * w + tc, cell_ids)

            # cos(theta_d - wind) via components; unit vector of d is
            # (dc, -dr) / diag in math coordinates.
            align = max(0.0, (dc * wind_cos - dr * wind_sin) / diag)
            rise = elev_flat[tgt] - elev_flat
            tan = rise / (scenario.cell_size * diag)
            phi_s = slope_coeff[tgt] * np.copysign(tan * tan, tan)
            r_eff = np.maximum(
                0.0, r_base[tgt] * (1.0 + wind_amp[tgt] * align + phi_s))

            step_inc = r_eff * DT_MIN / (cell_ft * diag)
            step_inc[~(inb & burnable[tgt])] = 0.0
            inc[:, d] = step_inc
            tgt_map[:, d] = tgt

        self.n_cells = n
        self.inc = inc
        self.tgt = tgt_map
        self.burnable = burnable
        self.burn_steps = burn_steps
        self.intensity_norm = intensity


@dataclass
class SimState:
    """Mutable simulation state over flat row-major arrays."""

    step: int
    phase: np.ndarray           # uint8
    arrival: np.ndarray         # float64, accumulated fraction
    burn_remaining: np.ndarray  # int32, steps of burning left
    intensity: np.ndarray       # float32, nonzero only while burning
    frontier: np.ndarray        # int64, sorted flat indices of burning cells


class FireEngine:
    """Steps a Scenario forward and applies suppressant drops."""

    def __init__(self, scenario: Scenario, catalog: FuelCatalog | None = None,
                 check_invariants: bool = False):
        self.catalog = catalog if catalog is not None else builtin_catalog()
        scenario.validate(self.catalog)
        self.scenario = scenario
        self.check_invariants = check_invariants
        self.field = SpreadField(scenario, self.catalog)
        self._schedule: dict[int, np.ndarray] = {}
        for row, col, when in scenario.ignitions:
            idx = row * scenario.width + col
            prior = self._schedule.get(when, _EMPTY)
            self._schedule[when] = np.append(prior, idx)
        self.reset()

    def reset(self) -> None:
        n = self.field.n_cells
        self.state = SimState(
            step=0,
            phase=np.zeros(n, dtype=np.uint8),
            arrival=np.zeros(n),
            burn_remaining=np.zeros(n, dtype=np.int32),
            intensity=np.zeros(n, dtype=np.float32),
            frontier=_EMPTY,
        )
        self._n_burnt = 0
        self._n_suppressed = 0
        self._ignite(self._schedule.get(0, _EMPTY))
        if self.check_invariants:
            self._snapshot = self.state.arrival.copy()

    # --- stepping -----------------------------------------------------------

    def _ignite(self, candidates: np.ndarray) -> np.ndarray:
        s = self.state
        if candidates.size == 0:
            return _EMPTY
        candidates = np.unique(candidates)
        ready = candidates[(s.phase[candidates] == UNBURNT)
                           & self.field.burnable[candidates]]
        if ready.size:
            s.phase[ready] = BURNING
            s.burn_remaining[ready] = self.field.burn_steps[ready]
            s.intensity[ready] = self.field.intensity_norm[ready]
            s.frontier = np.sort(np.concatenate((s.frontier, ready)))
        return ready

    def step(self) -> StepDelta:
        s = self.state
        fld = self.field
        now = s.step + 1
        front = s.frontier

        newly = _EMPTY
        if front.size:
            tgt = fld.tgt[front].ravel()
            inc = fld.inc[front].ravel()
            live = (s.phase[tgt] == UNBURNT) & (inc != 0.0)
            tgt, inc = tgt[live], inc[live]
            if tgt.size:
                s.arrival += np.bincount(tgt, weights=inc,
                                         minlength=fld.n_cells)
                hot = tgt[s.arrival[tgt] >= IGNITION_THRESHOLD]
                if hot.size:
                    newly = np.unique(hot)

            rem = s.burn_remaining[front] - 1
            s.burn_remaining[front] = rem
            burnt_now = rem == 0
            done = front[burnt_now]
            if done.size:
                s.phase[done] = BURNT
                s.intensity[done] = 0.0
                self._n_burnt += done.size
                s.frontier = front[~burnt_now]
        else:
            done = _EMPTY

        scheduled = self._schedule.get(now, _EMPTY)
        if scheduled.size:
            newly = np.concatenate((newly, scheduled))
        ignited = self._ignite(newly)

        s.step = now
        if self.check_invariants:
            self._verify(ignited, done)
        return StepDelta(step=now, ignited=ignited, burned_out=done)

    def apply_suppressant(self, row: int, col: int,
                          radius: int = DROP_RADIUS) -> SuppressionResult:
        """Douse a Chebyshev square: burning cells go out, open burnable
        cells become fireproof. Burnt cells are unaffected."""
        sc = self.scenario
        if not sc.in_bounds(row, col):
            raise DomainError(f"drop center ({row}, {col}) is out of bounds")
        r0, r1 = max(0, row - radius), min(sc.height - 1, row + radius)
        c0, c1 = max(0, col - radius), min(sc.width - 1, col + radius)
        rr, cc = np.meshgrid(np.arange(r0, r1 + 1), np.arange(c0, c1 + 1),
                             indexing="ij")
        cells = (rr * sc.width + cc).ravel()

        s = self.state
        hit = cells[s.phase[cells] == BURNING]
        shield = cells[(s.phase[cells] == UNBURNT) & self.field.burnable[cells]]
        if hit.size:
            s.phase[hit] = SUPPRESSED
            s.burn_remaining[hit] = 0
            s.intensity[hit] = 0.0
            s.frontier = np.setdiff1d(s.frontier, hit, assume_unique=True)
        if shield.size:
            s.phase[shield] = SUPPRESSED
        self._n_suppressed += hit.size + shield.size
        return SuppressionResult(extinguished=np.sort(hit),
                                 protected=np.sort(shield))

    # --- queries ------------------------------------------------------------

    def fire_out(self) -> bool:
        """Nothing burning and nothing scheduled to ignite later."""
        if self.state.frontier.size:
            return False
        return not any(when > self.state.step for when in self._schedule)

    def is_finished(self) -> bool:
        return self.state.step >= self.scenario.max_steps or self.fire_out()

    @property
    def n_burning(self) -> int:
        return int(self.state.frontier.size)

    @property
    def n_burnt(self) -> int:
        return self._n_burnt

    @property
    def n_suppressed(self) -> int:
        return self._n_suppressed

    def burnt_fraction(self) -> float:
        return self._n_burnt / self.field.n_cells

    def phase_grid(self) -> np.ndarray:
        sc = self.scenario
        return self.state.phase.reshape(sc.height, sc.width)

    def intensity_grid(self) -> np.ndarray:
        sc = self.scenario
        return self.state.intensity.reshape(sc.height, sc.width)

    def burning_cells(self) -> np.ndarray:
        """(k, 2) array of (row, col) for the current frontier."""
        w = self.scenario.width
        return np.stack(np.divmod(self.state.frontier, w), axis=1)

    def cell_state(self, row: int, col: int) -> CellState:
        if not self.scenario.in_bounds(row, col):
            raise DomainError(f"cell ({row}, {col}) is out of bounds")
        i = row * self.scenario.width + col
        s = self.state
        return CellState(row=row, col=col, phase=int(s.phase[i]),
                         arrival=float(s.arrival[i]),
                         burn_remaining=int(s.burn_remaining[i]),
                         intensity=float(s.intensity[i]))

    def checksum(self) -> str:
        s = self.state
        digest = hashlib.md5()
        digest.update(s.step.to_bytes(8, "little"))
        digest.update(s.phase.tobytes())
        digest.update(s.arrival.tobytes())
        digest.update(s.burn_remaining.tobytes())
        return digest.hexdigest()

    # --- invariant audit (slow; opt-in for tests) ----------------------------

    def _verify(self, ignited: np.ndarray, burned_out: np.ndarray) -> None:
        s = self.state
        if not np.isin(s.phase, (UNBURNT, BURNING, BURNT, SUPPRESSED)).all():
            raise ContractError("phase grid holds an unknown code")
        burning = np.flatnonzero(s.phase == BURNING)
        if not np.array_equal(burning, s.frontier):
            raise ContractError("frontier desynced from phase grid")
        if (s.burn_remaining[burning] <= 0).any():
            raise ContractError("burning cell with no burn budget")
        if (s.intensity[burning] <= 0).any():
            raise ContractError("burning cell with zero intensity")
        quiet = s.phase != BURNING
        if (s.intensity[np.flatnonzero(quiet)] != 0).any():
            raise ContractError("non-burning cell with residual intensity")
        if burning.size and not self.field.burnable[burning].all():
            raise ContractError("nonburnable cell is burning")
        if (s.arrival < self._snapshot).any():
            raise ContractError("arrival fraction decreased")
        if burned_out.size and (s.phase[burned_out] != BURNT).any():
            raise ContractError("burned-out cell not marked burnt")
        self._snapshot = s.arrival.copy()


def run_to_completion(engine: FireEngine, max_steps: int | None = None) -> int:
    """Step until the fire is out or the step budget is spent."""
    budget = engine.scenario.max_steps if max_steps is None else max_steps
    while not engine.is_finished() and engine.state.step < budget:
        engine.step()
    return engine.state.step
