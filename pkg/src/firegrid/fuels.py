"""Fuel model catalog: land-cover codes -> combustion parameters.

Ships the 13 classic fire-behavior fuel models (Anderson 1982, with the
standard single-size-class parameters as tabulated by Albini 1976) plus a
set of nonburnable land-cover codes. Custom catalogs, e.g. the 40-model
set, can be loaded from JSON documents with the same schema.

Units are imperial throughout (ft, lb, BTU): the published tables and the
spread-rate kernel constants are imperial, so conversion happens once at
the terrain boundary, not here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

from .errors import DomainError, ValidationError

# 1 short ton/acre in lb/ft^2; loads below are the published tons/acre figures.
_TPA = 2000.0 / 43560.0

# All 13 models share these per the published tables.
PARTICLE_DENSITY = 32.0  # lb/ft^3
HEAT_CONTENT = 8000.0    # BTU/lb

CATALOG_VERSION = 1


@dataclass(frozen=True)
class FuelModel:
    """Combustion parameters for one vegetation type.

    sigma: surface-area-to-volume ratio of the fine dead fuel (1/ft)
    w0: oven-dry fine fuel load (lb/ft^2)
    delta: fuel bed depth (ft)
    rho_p: oven-dry particle density (lb/ft^3)
    mx: dead fuel moisture of extinction (fraction)
    heat_content: low heat of combustion (BTU/lb)
    """

    id: int
    name: str
    sigma: float
    w0: float
    delta: float
    rho_p: float
    mx: float
    heat_content: float

    def validate(self) -> None:
        for field in ("sigma", "w0", "delta", "rho_p", "heat_content"):
            value = getattr(self, field)
            if not value > 0:
                raise ValidationError(
                    f"fuel {self.id}: {field} must be > 0, got {value!r}")
        if not 0 < self.mx < 1:
            raise ValidationError(
                f"fuel {self.id}: mx must be in (0, 1), got {self.mx!r}")


def _model(id: int, name: str, sigma: float, load_tpa: float,
           delta: float, mx: float) -> FuelModel:
    return FuelModel(id=id, name=name, sigma=sigma, w0=load_tpa * _TPA,
                     delta=delta, rho_p=PARTICLE_DENSITY, mx=mx,
                     heat_content=HEAT_CONTENT)


# Fine (1-hour) fuel load, bed depth, and extinction moisture per the
# published 13-model tables; sigma is the 1-hour size-class value.
_ANDERSON_13 = (
    _model(1, "short grass", 3500.0, 0.74, 1.0, 0.12),
    _model(2, "timber grass and understory", 3000.0, 2.00, 1.0, 0.15),
    _model(3, "tall grass", 1500.0, 3.01, 2.5, 0.25),
    _model(4, "chaparral", 2000.0, 5.01, 6.0, 0.20),
    _model(5, "brush", 2000.0, 1.00, 2.0, 0.20),
    _model(6, "dormant brush, hardwood slash", 1750.0, 1.50, 2.5, 0.25),
    _model(7, "southern rough", 1750.0, 1.13, 2.5, 0.40),
    _model(8, "closed timber litter", 2000.0, 1.50, 0.2, 0.30),
    _model(9, "hardwood litter", 2500.0, 2.92, 0.2, 0.25),
    _model(10, "timber litter and understory", 2000.0, 3.01, 1.0, 0.25),
    _model(11, "light logging slash", 1500.0, 1.50, 1.0, 0.15),
    _model(12, "medium logging slash", 1500.0, 4.01, 2.3, 0.20),
    _model(13, "heavy logging slash", 1500.0, 7.01, 3.0, 0.25),
)

# Conventional nonburnable land-cover codes.
NONBURNABLE_URBAN = 91
NONBURNABLE_SNOW_ICE = 92
NONBURNABLE_AGRICULTURE = 93
NONBURNABLE_WATER = 98
NONBURNABLE_BARE_GROUND = 99

_NONBURNABLE_IDS = frozenset({
    NONBURNABLE_URBAN,
    NONBURNABLE_SNOW_ICE,
    NONBURNABLE_AGRICULTURE,
    NONBURNABLE_WATER,
    NONBURNABLE_BARE_GROUND,
})


class FuelCatalog:
    """Immutable id -> FuelModel map plus the set of nonburnable ids."""

    def __init__(self, entries: list[FuelModel], nonburnable_ids=()):
        seen: dict[int, FuelModel] = {}
        for entry in entries:
            if entry.id in seen:
                raise ValidationError(f"duplicate fuel id {entry.id}")
            entry.validate()
            seen[entry.id] = entry
        nonburnable = frozenset(int(i) for i in nonburnable_ids)
        overlap = nonburnable & seen.keys()
        if overlap:
            raise ValidationError(
                f"ids marked nonburnable but defined as fuels: {sorted(overlap)}")
        self._entries = seen
        self._nonburnable = nonburnable

    @property
    def entries(self) -> dict[int, FuelModel]:
        return dict(self._entries)

    @property
    def nonburnable_ids(self) -> frozenset[int]:
        return self._nonburnable

    def knows(self, code: int) -> bool:
        return code in self._entries or code in self._nonburnable

    def is_burnable(self, code: int) -> bool:
        if code in self._entries:
            return True
        if code in self._nonburnable:
            return False
        raise ValidationError(f"unknown fuel code {code}")

    def model_for(self, code: int) -> FuelModel:
        """Resolve a burnable code; nonburnable codes are a domain error here."""
        model = self._entries.get(code)
        if model is not None:
            return model
        if code in self._nonburnable:
            raise DomainError(f"fuel code {code} is nonburnable")
        raise ValidationError(f"unknown fuel code {code}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, FuelCatalog):
            return NotImplemented
        return (self._entries == other._entries
                and self._nonburnable == other._nonburnable)

    def __repr__(self) -> str:
        return (f"FuelCatalog({len(self._entries)} fuels, "
                f"{len(self._nonburnable)} nonburnable ids)")


def builtin_catalog() -> FuelCatalog:
    """The 13 built-in fuel models plus the standard nonburnable codes."""
    return FuelCatalog(list(_ANDERSON_13), _NONBURNABLE_IDS)


_REQUIRED_KEYS = ("id", "name", "sigma", "w0", "delta", "rho_p", "mx", "heat_content")


def catalog_to_dict(catalog: FuelCatalog) -> dict:
    return {
        "version": CATALOG_VERSION,
        "fuels": [asdict(m) for m in sorted(catalog.entries.values(), key=lambda m: m.id)],
        "nonburnable": sorted(catalog.nonburnable_ids),
    }


def serialize_catalog(catalog: FuelCatalog) -> str:
    return json.dumps(catalog_to_dict(catalog), indent=2, sort_keys=True)


def catalog_from_dict(doc: dict) -> FuelCatalog:
    if not isinstance(doc, dict):
        raise ValidationError("catalog document must be an object")
    fuels = doc.get("fuels")
    if not isinstance(fuels, list):
        raise ValidationError("catalog document missing 'fuels' array")
    entries = []
    for i, raw in enumerate(fuels):
        if not isinstance(raw, dict):
            raise ValidationError(f"fuels[{i}] is not an object")
        missing = [k for k in _REQUIRED_KEYS if k not in raw]
        if missing:
            raise ValidationError(f"fuels[{i}] missing keys: {missing}")
        try:
            entries.append(FuelModel(
                id=int(raw["id"]), name=str(raw["name"]),
                sigma=float(raw["sigma"]), w0=float(raw["w0"]),
                delta=float(raw["delta"]), rho_p=float(raw["rho_p"]),
                mx=float(raw["mx"]), heat_content=float(raw["heat_content"]),
            ))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"fuels[{i}]: {exc}") from exc
    return FuelCatalog(entries, doc.get("nonburnable", ()))


def load_catalog(source: str) -> FuelCatalog:
    """Parse a catalog from JSON text; all invariants are validated."""
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"catalog is not valid JSON: {exc}") from exc
    return catalog_from_dict(doc)
