"""Reference cellular spread, scalar and deliberately slow.

Re-derives the stepping rule with plain dicts and per-cell loops so the
vectorized engine has something independent to disagree with. Only the
already-golden-tested fuel/kernel scalars are imported; every per-pair
quantity (geometry, wind projection, slope, increments, thresholds,
burn countdown, scheduling, suppression) is recomputed here by hand.

Accumulation order per target matches the engine's documented order
(source cells ascending, directions in ring order within each source)
so comparisons can be exact to the bit instead of tolerance-smeared.
"""

import math

from firegrid.fuels import builtin_catalog
from firegrid.rothermel import fuel_terms

M_TO_FT = 3.280839895
MS_TO_FT_MIN = 196.8503937
SQRT2 = math.sqrt(2.0)

OFFSETS = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))

UNBURNT, BURNING, BURNT, SUPPRESSED = 0, 1, 2, 3


def _wind_components(dir_deg):
    math_deg = (90.0 - dir_deg) % 360.0
    table = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0),
             180.0: (-1.0, 0.0), 270.0: (0.0, -1.0)}
    if math_deg in table:
        return table[math_deg]
    rad = math.radians(math_deg)
    return math.cos(rad), math.sin(rad)


class RefSim:
    """Dict-of-cells twin of the grid engine."""

    def __init__(self, scenario, catalog=None):
        cat = catalog if catalog is not None else builtin_catalog()
        self.h, self.w = scenario.height, scenario.width
        self.cell_m = scenario.cell_size
        self.cell_ft = scenario.cell_size * M_TO_FT
        self.max_steps = scenario.max_steps

        fuel = scenario.fuel_code
        elev = scenario.elevation
        self.elev = {(r, c): float(elev[r, c])
                     for r in range(self.h) for c in range(self.w)}

        u_ft = scenario.wind_speed * MS_TO_FT_MIN
        cw, sw = _wind_components(scenario.wind_dir_deg)
        terms_by_code = {}
        self.r_base = {}
        self.wind_amp = {}
        self.slope_coeff = {}
        self.burn_steps = {}
        self.intensity_norm = {}
        self.burnable = {}
        w0_ref = cat.model_for(1).w0
        for r in range(self.h):
            for c in range(self.w):
                code = int(fuel[r, c])
                if not cat.is_burnable(code):
                    self.burnable[(r, c)] = False
                    continue
                if code not in terms_by_code:
                    terms_by_code[code] = (fuel_terms(cat.model_for(code),
                                                      scenario.moisture),
                                           cat.model_for(code).w0)
                terms, w0 = terms_by_code[code]
                self.burnable[(r, c)] = True
                self.r_base[(r, c)] = terms.r_base
                self.wind_amp[(r, c)] = (terms.wind_coeff * u_ft ** terms.wind_b
                                         if u_ft > 0.0 else 0.0)
                self.slope_coeff[(r, c)] = terms.slope_coeff
                self.burn_steps[(r, c)] = math.ceil(20 * w0 / w0_ref)
                self.intensity_norm[(r, c)] = min(1.0, terms.i_r / 5000.0)

        # Per-direction wind alignment, shared by every cell pair.
        self.align = []
        for dr, dc in OFFSETS:
            diag = SQRT2 if dr != 0 and dc != 0 else 1.0
            self.align.append(max(0.0, (dc * cw - dr * sw) / diag))

        self.schedule = {}
        for r, c, when in scenario.ignitions:
            self.schedule.setdefault(when, []).append((r, c))

        self.step_num = 0
        self.phase = {(r, c): UNBURNT
                      for r in range(self.h) for c in range(self.w)}
        self.arrival = {k: 0.0 for k in self.phase}
        self.remaining = {k: 0 for k in self.phase}
        self.burning = []
        self._ignite(self.schedule.get(0, []))

    def _ignite(self, cells):
        lit = []
        for cell in sorted(set(cells)):
            if self.phase[cell] == UNBURNT and self.burnable[cell]:
                self.phase[cell] = BURNING
                self.remaining[cell] = self.burn_steps[cell]
                lit.append(cell)
        self.burning = sorted(self.burning + lit)
        return lit

    def _increment(self, src, tgt, d):
        """Arrival added to tgt per step while src burns; 0 when blocked."""
        dr, dc = OFFSETS[d]
        diag = SQRT2 if dr != 0 and dc != 0 else 1.0
        rise = self.elev[tgt] - self.elev[src]
        tan = rise / (self.cell_m * diag)
        phi_s = self.slope_coeff[tgt] * math.copysign(tan * tan, tan) \
            if tan != 0.0 else 0.0
        r_eff = max(0.0, self.r_base[tgt]
                    * (1.0 + self.wind_amp[tgt] * self.align[d] + phi_s))
        return r_eff * 1.0 / (self.cell_ft * diag)

    def step(self):
        now = self.step_num + 1
        delta = {}
        for (r, c) in self.burning:
            for d, (dr, dc) in enumerate(OFFSETS):
                tr, tc = r + dr, c + dc
                if not (0 <= tr < self.h and 0 <= tc < self.w):
                    continue
                tgt = (tr, tc)
                if not self.burnable[tgt] or self.phase[tgt] != UNBURNT:
                    continue
                inc = self._increment((r, c), tgt, d)
                if inc <= 0.0:
                    continue
                delta[tgt] = delta.get(tgt, 0.0) + inc

        newly = []
        for tgt in sorted(delta):
            self.arrival[tgt] += delta[tgt]
            if self.arrival[tgt] >= 1.0:
                newly.append(tgt)

        burned_out = []
        still = []
        for cell in self.burning:
            self.remaining[cell] -= 1
            if self.remaining[cell] == 0:
                self.phase[cell] = BURNT
                burned_out.append(cell)
            else:
                still.append(cell)
        self.burning = still

        newly.extend(self.schedule.get(now, []))
        ignited = self._ignite(newly)
        self.step_num = now
        return ignited, burned_out

    def apply_suppressant(self, row, col, radius=2):
        extinguished, protected = [], []
        for r in range(max(0, row - radius), min(self.h - 1, row + radius) + 1):
            for c in range(max(0, col - radius), min(self.w - 1, col + radius) + 1):
                cell = (r, c)
                if self.phase[cell] == BURNING:
                    self.phase[cell] = SUPPRESSED
                    self.remaining[cell] = 0
                    extinguished.append(cell)
                elif self.phase[cell] == UNBURNT and self.burnable[cell]:
                    self.phase[cell] = SUPPRESSED
                    protected.append(cell)
        self.burning = [cell for cell in self.burning
                        if cell not in set(extinguished)]
        return extinguished, protected

    def finished(self):
        if self.step_num >= self.max_steps:
            return True
        if self.burning:
            return False
        return not any(when > self.step_num for when in self.schedule)

    def phase_array(self):
        import numpy as np
        out = np.zeros((self.h, self.w), dtype=np.uint8)
        for (r, c), p in self.phase.items():
            out[r, c] = p
        return out

    def arrival_array(self):
        import numpy as np
        out = np.zeros((self.h, self.w))
        for (r, c), a in self.arrival.items():
            out[r, c] = a
        return out
