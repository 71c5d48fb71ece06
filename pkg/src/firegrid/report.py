"""Threat assessment reports built from an episode log.

A report bundles the ignition forecast, the suppression timeline, the
burn trajectory, and ranked zone advisories. Every numeric field is a
pure function of (scenario, episode log): the final grid needed for
advisory scoring is recovered by replaying the logged actions through a
fresh engine, which is exact because the whole stack is deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .engine import BURNT, FireEngine, wind_unit_vector
from .env import Action, EpisodeLog, FireEnv, OUTCOME_CONTAINED
from .errors import ContractError, ValidationError
from .fuels import FuelCatalog
from .terrain import Scenario

REPORT_VERSION = 1

GALLONS_PER_DROP = 800
ADVISORY_GRID = 4          # zones per side
ADVISORY_COUNT = 3         # zones reported
WIND_WEIGHT = 0.5          # alignment share of the priority score

_M_PER_DEG_LAT = 111320.0


@dataclass
class ThreatReport:
    forecast: dict           # lat, lon, ignition_datetime, confidence (or None)
    suppression: dict        # drops, helitack_count, water_gal, containment_step
    burn: dict               # trajectory, peak_burning, final_burnt, final_burnt_area_m2
    advisories: list         # [{zone: [r0, c0, r1, c1], priority, rationale}]
    contingency: dict        # max_steps, final_burnt_fraction

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "forecast": self.forecast,
            "suppression": self.suppression,
            "burn": self.burn,
            "advisories": self.advisories,
            "contingency": self.contingency,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ThreatReport":
        if doc.get("version") != REPORT_VERSION:
            raise ValidationError(
                f"unsupported report version {doc.get('version')!r}")
        return cls(forecast=doc["forecast"], suppression=doc["suppression"],
                   burn=doc["burn"], advisories=doc["advisories"],
                   contingency=doc["contingency"])


def replay_episode(scenario: Scenario, episode: EpisodeLog,
                   catalog: FuelCatalog | None = None) -> FireEnv:
    """Re-run the logged actions; returns the environment at episode end."""
    env = FireEnv(scenario, catalog)
    env.reset(agent_start=episode.agent_start)
    for action in episode.actions:
        env.step(Action(action))
    return env


def _cell_geo(scenario: Scenario, row: int, col: int) -> dict | None:
    """Approximate lat/lon of a cell, anchored at the forecast point.

    The forecast coordinate is pinned to the first scheduled ignition
    (grid center when there is none); offsets use a local equirectangular
    approximation, fine at fire-management scales.
    """
    fc = scenario.forecast
    if fc is None:
        return None
    if scenario.ignitions:
        r0, c0 = scenario.ignitions[0][0], scenario.ignitions[0][1]
    else:
        r0, c0 = scenario.height // 2, scenario.width // 2
    lat = fc.lat + (r0 - row) * scenario.cell_size / _M_PER_DEG_LAT
    lon = fc.lon + (col - c0) * scenario.cell_size / (
        _M_PER_DEG_LAT * math.cos(math.radians(fc.lat)))
    return {"lat": round(lat, 6), "lon": round(lon, 6)}


def _zone_bounds(scenario: Scenario) -> list:
    """ADVISORY_GRID x ADVISORY_GRID inclusive cell rectangles, no overlap,
    remainder absorbed by the last row/column of zones."""
    zones = []
    zh = scenario.height // ADVISORY_GRID
    zw = scenario.width // ADVISORY_GRID
    for zr in range(ADVISORY_GRID):
        for zc in range(ADVISORY_GRID):
            r0 = zr * zh
            c0 = zc * zw
            r1 = scenario.height - 1 if zr == ADVISORY_GRID - 1 else r0 + zh - 1
            c1 = scenario.width - 1 if zc == ADVISORY_GRID - 1 else c0 + zw - 1
            zones.append((r0, c0, r1, c1))
    return zones


def _advisories(scenario: Scenario, phase: np.ndarray) -> list:
    burnt = phase == BURNT
    total_burnt = int(burnt.sum())
    if total_burnt:
        rows, cols = np.nonzero(burnt)
        centroid = (float(rows.mean()), float(cols.mean()))
    else:
        centroid = (scenario.height / 2.0, scenario.width / 2.0)
    wind_cos, wind_sin = wind_unit_vector(scenario.wind_dir_deg)
    windy = scenario.wind_speed > 0.0

    scored = []
    for index, (r0, c0, r1, c1) in enumerate(_zone_bounds(scenario)):
        patch = burnt[r0:r1 + 1, c0:c1 + 1]
        density = float(patch.mean())
        alignment = 0.0
        if windy:
            zr = (r0 + r1) / 2.0 - centroid[0]
            zc = (c0 + c1) / 2.0 - centroid[1]
            norm = math.hypot(zr, zc)
            if norm > 0.0:
                # Math-convention unit vector toward the zone: (zc, -zr).
                alignment = max(0.0, (zc * wind_cos - zr * wind_sin) / norm)
        priority = density + WIND_WEIGHT * alignment
        scored.append((priority, index, (r0, c0, r1, c1), density, alignment))

    scored.sort(key=lambda item: (-item[0], item[1]))
    advisories = []
    for priority, index, bounds, density, alignment in scored[:ADVISORY_COUNT]:
        rationale = (f"burnt density {density:.3f}"
                     + (f", downwind alignment {alignment:.3f}" if windy
                        else ", calm winds"))
        advisories.append({
            "zone": list(bounds),
            "priority": round(priority, 6),
            "rationale": rationale,
        })
    return advisories


def build_report(scenario: Scenario, episode: EpisodeLog,
                 forecast: dict | None = None,
                 catalog: FuelCatalog | None = None,
                 gallons_per_drop: int = GALLONS_PER_DROP) -> ThreatReport:
    if episode.outcome is None:
        raise ContractError("episode log is incomplete (no outcome)")

    if forecast is None and scenario.forecast is not None:
        fc = scenario.forecast
        forecast = {"lat": fc.lat, "lon": fc.lon,
                    "ignition_datetime": fc.datetime,
                    "confidence": fc.confidence}

    drops = []
    for d in episode.drops:
        entry = {
            "step": d["step"],
            "sim_time_min": d["step"],   # one step is one minute
            "row": d["row"], "col": d["col"],
            "extinguished": d["extinguished_count"],
        }
        geo = _cell_geo(scenario, d["row"], d["col"])
        if geo is not None:
            entry["geo"] = geo
        drops.append(entry)

    helitack_count = len(drops)
    contained = episode.outcome == OUTCOME_CONTAINED
    suppression = {
        "drops": drops,
        "helitack_count": helitack_count,
        "water_gal": helitack_count * gallons_per_drop,
        "containment_step": episode.contained_at if contained else None,
    }

    trajectory = list(episode.burnt_trajectory)
    final_burnt = trajectory[-1] if trajectory else 0
    burn = {
        "trajectory": trajectory,
        "peak_burning": max(episode.burning_trajectory, default=0),
        "final_burnt": final_burnt,
        "final_burnt_area_m2": final_burnt * scenario.cell_size ** 2,
    }

    env = replay_episode(scenario, episode, catalog)
    phase = env.engine.phase_grid()
    total_cells = scenario.width * scenario.height

    return ThreatReport(
        forecast=forecast,
        suppression=suppression,
        burn=burn,
        advisories=_advisories(scenario, phase),
        contingency={
            "max_steps": scenario.max_steps,
            "final_burnt_fraction": round(final_burnt / total_cells, 6),
        },
    )


# --- rendering ---------------------------------------------------------------

def render_report(report: ThreatReport, format: str = "text") -> str:
    if format == "structured":
        return json.dumps(report.to_dict(), sort_keys=True,
                          separators=(",", ":"))
    if format != "text":
        raise ValidationError(f"unknown report format {format!r}")

    lines = ["THREAT ASSESSMENT REPORT", ""]

    lines.append("== Forecast ==")
    fc = report.forecast
    if fc is None:
        lines.append("No ignition forecast attached; synthetic scenario.")
    else:
        lines.append(f"Ignition at ({fc['lat']:.4f}, {fc['lon']:.4f}) "
                     f"on {fc['ignition_datetime']} "
                     f"(confidence {fc['confidence']:.2f})")
    lines.append("")

    lines.append("== Suppression Timeline ==")
    sup = report.suppression
    lines.append(f"Helitack deployments: {sup['helitack_count']}")
    lines.append(f"Water used: {sup['water_gal']} gal")
    if sup["containment_step"] is not None:
        lines.append(f"Contained at step {sup['containment_step']} "
                     f"(t+{sup['containment_step']} min)")
    else:
        lines.append("Not contained within the step budget")
    for d in sup["drops"]:
        where = f"({d['row']}, {d['col']})"
        if "geo" in d:
            where += f" [{d['geo']['lat']:.4f}, {d['geo']['lon']:.4f}]"
        lines.append(f"  t+{d['sim_time_min']} min: drop at {where}, "
                     f"extinguished {d['extinguished']}")
    lines.append("")

    lines.append("== Burn Trajectory ==")
    burn = report.burn
    lines.append(f"Final burnt cells: {burn['final_burnt']} "
                 f"({burn['final_burnt_area_m2']:.0f} m2)")
    lines.append(f"Peak simultaneous burning: {burn['peak_burning']}")
    traj = burn["trajectory"]
    if traj:
        marks = [0, len(traj) // 4, len(traj) // 2, 3 * len(traj) // 4,
                 len(traj) - 1]
        samples = ", ".join(f"t{m + 1}={traj[m]}" for m in sorted(set(marks)))
        lines.append(f"Burnt-count samples: {samples}")
    else:
        lines.append("No steps recorded.")
    lines.append("")

    lines.append("== Advisories ==")
    if not report.advisories:
        lines.append("None.")
    for rank, adv in enumerate(report.advisories, start=1):
        r0, c0, r1, c1 = adv["zone"]
        lines.append(f"{rank}. Zone rows {r0}-{r1}, cols {c0}-{c1} "
                     f"(priority {adv['priority']:.3f}): {adv['rationale']}")
    lines.append("")
    lines.append(f"Contingency: step budget {report.contingency['max_steps']}, "
                 f"final burnt fraction "
                 f"{report.contingency['final_burnt_fraction']:.4f}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> ThreatReport:
    """Inverse of render_report(format='structured')."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"report is not valid JSON: {exc}") from exc
    return ThreatReport.from_dict(doc)
