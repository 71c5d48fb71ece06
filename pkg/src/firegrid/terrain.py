"""Scenario data model and container format.

A Scenario bundles everything a simulation needs: grid geometry, per-cell
elevation and fuel codes, a uniform wind, dead fuel moisture, scheduled
ignitions, the RNG seed, and an optional ignition-forecast block. The
container is a JSON document with flat row-major arrays so fixtures stay
human-diffable; large grids may push the arrays into a binary sidecar
referenced by relative path and MD5 content hash.

Grid convention (used everywhere in this package): row 0 is the north
edge, storage is row-major, cells are addressed (row, col).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, ValidationError
from .fuels import FuelCatalog

SCENARIO_VERSION = 1

DEFAULT_WIDTH = 240
DEFAULT_HEIGHT = 160
DEFAULT_CELL_SIZE_M = 30.0

# Offsets for the 8-neighborhood, (drow, dcol).
NEIGHBOR_OFFSETS = (
    (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1),
)


@dataclass(frozen=True)
class GeoRef:
    lat: float
    lon: float

    def validate(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValidationError(f"lat out of range: {self.lat!r}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValidationError(f"lon out of range: {self.lon!r}")


@dataclass(frozen=True)
class Forecast:
    """Ignition forecast anchoring a scenario to the real world."""

    lat: float
    lon: float
    datetime: str
    confidence: float

    def validate(self) -> None:
        GeoRef(self.lat, self.lon).validate()
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(
                f"forecast confidence must be in [0, 1]: {self.confidence!r}")


@dataclass
class Scenario:
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    cell_size: float = DEFAULT_CELL_SIZE_M
    elevation: np.ndarray = None          # (height, width) float64, meters
    fuel_code: np.ndarray = None          # (height, width) int32
    wind_speed: float = 0.0               # m/s
    wind_dir_deg: float = 0.0             # compass degrees, blowing toward
    moisture: float = 0.05
    ignitions: list[tuple[int, int, int]] = field(default_factory=list)
    seed: int = 0
    max_steps: int = 500
    forecast: Forecast | None = None

    def __post_init__(self):
        if self.elevation is None:
            self.elevation = np.zeros((self.height, self.width), dtype=np.float64)
        if self.fuel_code is None:
            self.fuel_code = np.ones((self.height, self.width), dtype=np.int32)

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def validate(self, catalog: FuelCatalog | None = None) -> None:
        if self.width < 1 or self.height < 1:
            raise ValidationError("grid dimensions must be positive")
        if not self.cell_size > 0:
            raise ValidationError(f"cell_size must be > 0: {self.cell_size!r}")
        for name, arr in (("elevation", self.elevation), ("fuel_code", self.fuel_code)):
            if arr.shape != (self.height, self.width):
                raise ValidationError(
                    f"{name} has shape {arr.shape}, expected "
                    f"({self.height}, {self.width})")
        if not self.wind_speed >= 0:
            raise ValidationError(f"wind_speed must be >= 0: {self.wind_speed!r}")
        if not 0.0 <= self.moisture <= 1.0:
            raise ValidationError(f"moisture must be in [0, 1]: {self.moisture!r}")
        if self.max_steps < 1:
            raise ValidationError(f"max_steps must be positive: {self.max_steps!r}")
        for i, (row, col, step) in enumerate(self.ignitions):
            if not self.in_bounds(row, col):
                raise ValidationError(
                    f"ignitions[{i}] at ({row}, {col}) is out of bounds")
            if step < 0:
                raise ValidationError(f"ignitions[{i}] has negative step {step}")
        if self.forecast is not None:
            self.forecast.validate()
        if catalog is not None:
            for code in np.unique(self.fuel_code):
                if not catalog.knows(int(code)):
                    raise ValidationError(f"unknown fuel code {int(code)} in grid")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.width == other.width and self.height == other.height
            and self.cell_size == other.cell_size
            and np.array_equal(self.elevation, other.elevation)
            and np.array_equal(self.fuel_code, other.fuel_code)
            and self.wind_speed == other.wind_speed
            and self.wind_dir_deg == other.wind_dir_deg
            and self.moisture == other.moisture
            and list(self.ignitions) == list(other.ignitions)
            and self.seed == other.seed and self.max_steps == other.max_steps
            and self.forecast == other.forecast
        )


def slope_between(s: Scenario, a: tuple[int, int], b: tuple[int, int]) -> float:
    """Rise over run from cell a to adjacent cell b (8-neighborhood).

    Horizontal run is cell_size for orthogonal neighbors and
    cell_size * sqrt(2) for diagonal ones.
    """
    (r1, c1), (r2, c2) = a, b
    if not (s.in_bounds(r1, c1) and s.in_bounds(r2, c2)):
        raise DomainError(f"cells {a} and {b} must be in bounds")
    dr, dc = r2 - r1, c2 - c1
    if (dr, dc) not in NEIGHBOR_OFFSETS:
        raise DomainError(f"cells {a} and {b} are not adjacent")
    run = s.cell_size * (math.sqrt(2.0) if dr != 0 and dc != 0 else 1.0)
    return (float(s.elevation[r2, c2]) - float(s.elevation[r1, c1])) / run


# --- container format -------------------------------------------------------

def scenario_to_dict(s: Scenario) -> dict:
    doc = {
        "version": SCENARIO_VERSION,
        "width": s.width,
        "height": s.height,
        "cell_size_m": s.cell_size,
        "elevation": [float(v) for v in s.elevation.ravel()],
        "fuel_code": [int(v) for v in s.fuel_code.ravel()],
        "wind": {"speed_ms": s.wind_speed, "dir_deg": s.wind_dir_deg},
        "moisture": s.moisture,
        "ignitions": [[int(r), int(c), int(t)] for r, c, t in s.ignitions],
        "seed": s.seed,
        "max_steps": s.max_steps,
    }
    if s.forecast is not None:
        doc["forecast"] = {
            "lat": s.forecast.lat, "lon": s.forecast.lon,
            "datetime": s.forecast.datetime,
            "confidence": s.forecast.confidence,
        }
    return doc


def serialize_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s))


def _decode_array(doc: dict, key: str, n_cells: int, dtype,
                  base_dir: Path | None) -> np.ndarray:
    raw = doc.get(key)
    if isinstance(raw, dict):
        # Sidecar blob: {"blob": relpath, "dtype": name, "md5": hex}
        if base_dir is None:
            raise ValidationError(
                f"{key}: blob reference requires loading from a file path")
        blob_path = base_dir / raw["blob"]
        data = blob_path.read_bytes()
        digest = hashlib.md5(data).hexdigest()
        if digest != raw["md5"]:
            raise ValidationError(
                f"{key}: blob {raw['blob']} hash mismatch "
                f"(expected {raw['md5']}, got {digest})")
        arr = np.frombuffer(data, dtype=np.dtype(raw["dtype"])).astype(dtype)
    elif isinstance(raw, list):
        arr = np.asarray(raw, dtype=dtype)
    else:
        raise ValidationError(f"missing or malformed array field {key!r}")
    if arr.size != n_cells:
        raise ValidationError(
            f"{key} has {arr.size} entries, expected {n_cells}")
    return arr


def scenario_from_dict(doc: dict, base_dir: Path | None = None,
                       catalog: FuelCatalog | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError("scenario document must be an object")
    version = doc.get("version")
    if version is None:
        raise ValidationError("scenario document missing 'version'")
    if int(version) != SCENARIO_VERSION:
        raise ValidationError(f"unsupported scenario version {version!r}")
    try:
        width = int(doc["width"])
        height = int(doc["height"])
        wind = doc.get("wind", {})
        s = Scenario(
            width=width,
            height=height,
            cell_size=float(doc["cell_size_m"]),
            elevation=_decode_array(doc, "elevation", width * height,
                                    np.float64, base_dir).reshape(height, width),
            fuel_code=_decode_array(doc, "fuel_code", width * height,
                                    np.int32, base_dir).reshape(height, width),
            wind_speed=float(wind.get("speed_ms", 0.0)),
            wind_dir_deg=float(wind.get("dir_deg", 0.0)),
            moisture=float(doc["moisture"]),
            ignitions=[(int(r), int(c), int(t)) for r, c, t in doc.get("ignitions", [])],
            seed=int(doc.get("seed", 0)),
            max_steps=int(doc.get("max_steps", 500)),
            forecast=Forecast(**doc["forecast"]) if "forecast" in doc else None,
        )
    except KeyError as exc:
        raise ValidationError(f"scenario document missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"scenario document malformed: {exc}") from exc
    s.validate(catalog)
    return s


def load_scenario(source: str | Path,
                  catalog: FuelCatalog | None = None) -> Scenario:
    """Load from JSON text or a file path; validates all invariants."""
    base_dir = None
    if isinstance(source, Path) or (isinstance(source, str)
                                    and not source.lstrip().startswith("{")):
        path = Path(source)
        base_dir = path.parent
        text = path.read_text()
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc, base_dir=base_dir, catalog=catalog)


def save_scenario(s: Scenario, path: str | Path, blobs: bool = False) -> None:
    """Write the container; with blobs=True the grids go to .npy-less raw
    sidecars next to the document."""
    path = Path(path)
    doc = scenario_to_dict(s)
    if blobs:
        for key, arr, dtype in (("elevation", s.elevation, "<f8"),
                                ("fuel_code", s.fuel_code, "<i4")):
            data = np.ascontiguousarray(arr, dtype=np.dtype(dtype)).tobytes()
            blob_name = f"{path.stem}.{key}.bin"
            (path.parent / blob_name).write_bytes(data)
            doc[key] = {"blob": blob_name, "dtype": dtype,
                        "md5": hashlib.md5(data).hexdigest()}
    path.write_text(json.dumps(doc))


# --- synthetic fixtures -----------------------------------------------------

SYNTHETIC_KINDS = ("flat_uniform", "single_slope", "ridge", "two_fuel")

_BASE_ELEVATION_M = 100.0
_SLOPE_RISE_PER_CELL_M = 6.0


def synthetic_scenario(kind: str, width: int = DEFAULT_WIDTH,
                       height: int = DEFAULT_HEIGHT, seed: int = 0,
                       **overrides) -> Scenario:
    """Deterministic test terrain. All kinds ignite the grid center at
    step 0 unless overridden.

    flat_uniform: constant elevation, one fuel everywhere.
    single_slope: elevation rising linearly west -> east.
    ridge: tent profile peaking at the center column.
    two_fuel: flat, grass on the west half, timber litter on the east.
    """
    if kind not in SYNTHETIC_KINDS:
        raise ValidationError(f"unknown synthetic kind {kind!r}")
    if width < 8 or height < 8:
        raise ValidationError("synthetic grids must be at least 8x8")

    elevation = np.full((height, width), _BASE_ELEVATION_M, dtype=np.float64)
    fuel = np.ones((height, width), dtype=np.int32)
    cols = np.arange(width, dtype=np.float64)

    if kind == "single_slope":
        elevation += _SLOPE_RISE_PER_CELL_M * cols[np.newaxis, :]
    elif kind == "ridge":
        peak_col = width // 2
        elevation += _SLOPE_RISE_PER_CELL_M * (peak_col - np.abs(cols - peak_col))
    elif kind == "two_fuel":
        fuel[:, width // 2:] = 8

    params = dict(
        width=width, height=height, cell_size=DEFAULT_CELL_SIZE_M,
        elevation=elevation, fuel_code=fuel,
        wind_speed=0.0, wind_dir_deg=0.0, moisture=0.05,
        ignitions=[(height // 2, width // 2, 0)],
        seed=seed, max_steps=500,
    )
    params.update(overrides)
    s = Scenario(**params)
    s.validate()
    return s
