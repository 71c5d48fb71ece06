"""Ignition dataset pipeline: dedup, negative sampling, feature windows.

Operates on locally supplied delimited-text tables. Three stages:

1. dedup_incidents: time-ordered scan keeping ignitions that are inside
   the CONUS box, >= 5 km from same-day retained fires, and >= 2 h after
   any retained fire within 5 km.
2. sample_negatives: three tiers of synthesized non-fire samples (far
   from all fires; near a fire but 90-150 days off; one year before a
   fire), each rechecked against the positives before emission.
3. extract_windows: per sample, 75 daily weather rows (60 before the
   date through 14 after) looked up on a 1/24-degree grid, short gaps
   carried forward from the previous day.

Distances are great-circle on a 6371.0 km sphere. The optimized dedup
pass buckets retained records on a coarse lat/lon grid; tests hold it
equal to a brute-force restatement of the rules.
"""

from __future__ import annotations

import csv
import math
import random
from collections import deque
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone

from .errors import SaturationError, ValidationError

EARTH_RADIUS_KM = 6371.0

# lat_min, lat_max, lon_min, lon_max
CONUS_BBOX = (24.4, 49.4, -125.0, -66.9)

FAR_MIN_KM = 100.0        # FarNeg clearance from every positive
NEAR_MAX_KM = 100.0       # NearNeg jitter radius around its source
NEAR_OFFSET_DAYS = (90, 150)
YEARLY_OFFSET_DAYS = 365
CONFLICT_KM = 5.0         # a real fire this close (and within
CONFLICT_DAYS = 1         # this many days) vetoes a negative

DEFAULT_COUNTS = {"far": 5000, "near": 35000, "yearly": 36000}

WINDOW_PRE = 60           # days before the sample date
WINDOW_POST = 15          # the sample date plus days after
MAX_GAP_DAYS = 3          # longest carry-forward-fillable gap

GRID_CELLS_PER_DEG = 24   # 1/24 degree, about 4 km

WEATHER_VARS = ("pr", "rmax", "rmin", "sph", "srad", "tmmn", "tmmx", "vs",
                "bi", "fm100", "fm1000", "erc", "etr", "pet", "vpd")
TABLE_COLUMNS = ("latitude", "longitude", "datetime", "Wildfire") \
    + WEATHER_VARS

LABEL_FIRE = "Wildfire"
LABEL_NO_FIRE = "NoWildfire"
TIERS = ("Positive", "FarNeg", "NearNeg", "YearlyNeg")


@dataclass(frozen=True)
class IncidentRecord:
    lat: float
    lon: float
    discovered_at: datetime


@dataclass(frozen=True)
class LabeledSample:
    lat: float
    lon: float
    date: date
    label: str
    tier: str


@dataclass(frozen=True)
class FeatureWindow:
    sample: LabeledSample
    days: tuple              # WINDOW_PRE + WINDOW_POST dicts, oldest first

    def dates(self) -> list:
        start = self.sample.date - timedelta(days=WINDOW_PRE)
        return [start + timedelta(days=i) for i in range(len(self.days))]


# --- distance ----------------------------------------------------------------

def _haversine(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2.0) ** 2 \
        + math.cos(p1) * math.cos(p2) * math.sin(dl / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


def haversine_km(a, b) -> float:
    """Great-circle distance between two points with .lat/.lon (or
    (lat, lon) pairs)."""
    lat1, lon1 = (a.lat, a.lon) if hasattr(a, "lat") else (a[0], a[1])
    lat2, lon2 = (b.lat, b.lon) if hasattr(b, "lat") else (b[0], b[1])
    return _haversine(lat1, lon1, lat2, lon2)


# --- parsing -----------------------------------------------------------------

def parse_timestamp(value: str) -> datetime:
    """ISO 8601; naive values are taken as UTC."""
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc)


_LAT_KEYS = ("latitude", "lat")
_LON_KEYS = ("longitude", "lon")
_TIME_KEYS = ("discovered_at", "datetime", "discovery_datetime")


def _pick(row: dict, keys: tuple) -> str:
    for key in keys:
        if key in row and row[key] not in (None, ""):
            return row[key]
    raise KeyError(keys[0])


def parse_incident_rows(rows) -> tuple:
    """-> (records, diagnostics). Bad rows become {row, reason} entries
    (1-based data row numbers) and are skipped."""
    records = []
    diagnostics = []
    for number, row in enumerate(rows, start=1):
        try:
            lat = float(_pick(row, _LAT_KEYS))
            lon = float(_pick(row, _LON_KEYS))
            stamp = parse_timestamp(_pick(row, _TIME_KEYS))
        except (KeyError, ValueError, TypeError) as exc:
            diagnostics.append({"row": number, "reason": str(exc) or
                                exc.__class__.__name__})
            continue
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            diagnostics.append({"row": number,
                                "reason": f"coordinates out of range "
                                          f"({lat}, {lon})"})
            continue
        records.append(IncidentRecord(lat=lat, lon=lon, discovered_at=stamp))
    return records, diagnostics


def read_incidents(path) -> tuple:
    with open(path, newline="") as handle:
        return parse_incident_rows(csv.DictReader(handle))


def write_incidents(records, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["latitude", "longitude", "discovered_at"])
        for rec in records:
            writer.writerow([rec.lat, rec.lon,
                             rec.discovered_at.isoformat()])


# --- dedup -------------------------------------------------------------------

class _RetainedIndex:
    """Grid buckets over retained records, sized so any two points closer
    than min_km differ by at most one cell per axis."""

    def __init__(self, min_km: float, bbox: tuple):
        max_abs_lat = min(89.0, max(abs(bbox[0]), abs(bbox[1])))
        km_per_deg_lon = 111.32 * math.cos(math.radians(max_abs_lat))
        self.lat_cell = min_km / 110.0
        self.lon_cell = min_km / max(km_per_deg_lon, 1e-6)
        self.buckets: dict = {}

    def _cell(self, rec) -> tuple:
        return (int(math.floor(rec.lat / self.lat_cell)),
                int(math.floor(rec.lon / self.lon_cell)))

    def add(self, rec) -> None:
        self.buckets.setdefault(self._cell(rec), []).append(rec)

    def near(self, rec):
        row, col = self._cell(rec)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                yield from self.buckets.get((row + dr, col + dc), ())


def dedup_incidents(records, min_km: float = 5.0, min_hours: float = 2.0,
                    bbox: tuple = CONUS_BBOX) -> list:
    """Time-ordered scan; see the module docstring for the three rules."""
    lat_lo, lat_hi, lon_lo, lon_hi = bbox
    index = _RetainedIndex(min_km, bbox)
    recent: deque = deque()  # retained within the last min_hours
    retained = []
    gap = timedelta(hours=min_hours)

    for rec in sorted(records, key=lambda r: r.discovered_at):
        if not (lat_lo <= rec.lat <= lat_hi and lon_lo <= rec.lon <= lon_hi):
            continue
        while recent and rec.discovered_at - recent[0].discovered_at >= gap:
            recent.popleft()

        day = rec.discovered_at.date()
        blocked = any(
            kept.discovered_at.date() == day
            and _haversine(rec.lat, rec.lon, kept.lat, kept.lon) < min_km
            for kept in index.near(rec))
        if not blocked:
            blocked = any(
                _haversine(rec.lat, rec.lon, kept.lat, kept.lon) < min_km
                for kept in recent)
        if blocked:
            continue
        retained.append(rec)
        index.add(rec)
        recent.append(rec)
    return retained


# --- negative sampling ---------------------------------------------------------

def _as_point(p) -> tuple:
    when = p.date if hasattr(p, "date") and not callable(p.date) \
        else p.discovered_at.date()
    return p.lat, p.lon, when


def _in_region(lat: float, lon: float, region) -> bool:
    if len(region) == 4 and not hasattr(region[0], "__len__"):
        lat_lo, lat_hi, lon_lo, lon_hi = region
        return lat_lo <= lat <= lat_hi and lon_lo <= lon <= lon_hi
    # Polygon of (lat, lon) vertices; even-odd ray casting on longitude.
    inside = False
    n = len(region)
    for i in range(n):
        lat1, lon1 = region[i]
        lat2, lon2 = region[(i + 1) % n]
        if (lat1 > lat) != (lat2 > lat):
            cross = (lon2 - lon1) * (lat - lat1) / (lat2 - lat1) + lon1
            if lon < cross:
                inside = not inside
    return inside


def _region_bbox(region) -> tuple:
    if len(region) == 4 and not hasattr(region[0], "__len__"):
        return region
    lats = [v[0] for v in region]
    lons = [v[1] for v in region]
    return (min(lats), max(lats), min(lons), max(lons))


class _PositiveIndex:
    """One-degree buckets for clearance queries against the positives."""

    def __init__(self, points):
        self.points = points
        self.buckets: dict = {}
        max_abs_lat = 0.0
        for lat, lon, _ in points:
            self.buckets.setdefault((int(math.floor(lat)),
                                     int(math.floor(lon))), []).append(
                (lat, lon))
            max_abs_lat = max(max_abs_lat, abs(lat))
        self.max_abs_lat = max_abs_lat
        self.by_date: dict = {}
        for lat, lon, when in points:
            self.by_date.setdefault(when, []).append((lat, lon))

    def _reach(self, km: float, query_lat: float) -> tuple:
        worst = min(89.0, max(self.max_abs_lat, abs(query_lat)))
        km_per_deg_lon = max(111.32 * math.cos(math.radians(worst)), 1e-6)
        return (int(math.ceil(km / 110.0)),
                int(math.ceil(km / km_per_deg_lon)))

    def min_clearance_at_least(self, lat: float, lon: float,
                               km: float) -> bool:
        """True when every positive is at least km away."""
        lat_reach, lon_reach = self._reach(km, lat)
        row, col = int(math.floor(lat)), int(math.floor(lon))
        for dr in range(-lat_reach, lat_reach + 1):
            for dc in range(-lon_reach, lon_reach + 1):
                for plat, plon in self.buckets.get((row + dr, col + dc), ()):
                    if _haversine(lat, lon, plat, plon) < km:
                        return False
        return True

    def conflict(self, lat: float, lon: float, when: date,
                 km: float = CONFLICT_KM, days: int = CONFLICT_DAYS) -> bool:
        """A positive within km and +-days of (lat, lon, when)?"""
        for offset in range(-days, days + 1):
            for plat, plon in self.by_date.get(
                    when + timedelta(days=offset), ()):
                if _haversine(lat, lon, plat, plon) <= km:
                    return True
        return False


def _sample_far(rng, index, region, points, count, budget) -> list:
    # No temporal constraint applies; each sample borrows the date of a
    # randomly drawn positive so downstream window extraction has one.
    lat_lo, lat_hi, lon_lo, lon_hi = _region_bbox(region)
    out = []
    attempts = 0
    while len(out) < count and attempts < budget:
        attempts += 1
        lat = rng.uniform(lat_lo, lat_hi)
        lon = rng.uniform(lon_lo, lon_hi)
        if not _in_region(lat, lon, region):
            continue
        if index.min_clearance_at_least(lat, lon, FAR_MIN_KM):
            when = points[rng.randrange(len(points))][2]
            out.append((lat, lon, when))
    if len(out) < count:
        raise SaturationError(
            f"far-negative sampling saturated at {len(out)}/{count} "
            f"after {attempts} attempts", achieved=len(out), requested=count)
    return out


def _jitter(rng, lat: float, lon: float, max_km: float) -> tuple:
    bearing = rng.uniform(0.0, 2.0 * math.pi)
    dist = max_km * math.sqrt(rng.uniform(0.0, 1.0))
    dlat = dist * math.cos(bearing) / 111.32
    dlon = dist * math.sin(bearing) \
        / (111.32 * max(math.cos(math.radians(lat)), 1e-6))
    return lat + dlat, lon + dlon


def _sample_near(rng, index, points, count, budget) -> list:
    out = []
    attempts = 0
    lo, hi = NEAR_OFFSET_DAYS
    while len(out) < count and attempts < budget:
        attempts += 1
        lat0, lon0, day0 = points[rng.randrange(len(points))]
        lat, lon = _jitter(rng, lat0, lon0, NEAR_MAX_KM)
        if _haversine(lat, lon, lat0, lon0) > NEAR_MAX_KM:
            continue      # projection overshoot near the poles
        shift = rng.randint(lo, hi) * rng.choice((-1, 1))
        when = day0 + timedelta(days=shift)
        if index.conflict(lat, lon, when):
            continue
        out.append((lat, lon, when))
    if len(out) < count:
        raise SaturationError(
            f"near-negative sampling saturated at {len(out)}/{count} "
            f"after {attempts} attempts", achieved=len(out), requested=count)
    return out


def _sample_yearly(rng, index, points, count) -> list:
    order = list(range(len(points)))
    rng.shuffle(order)
    out = []
    for i in order:
        if len(out) == count:
            break
        lat, lon, day0 = points[i]
        when = day0 - timedelta(days=YEARLY_OFFSET_DAYS)
        if index.conflict(lat, lon, when):
            continue
        out.append((lat, lon, when))
    if len(out) < count:
        raise SaturationError(
            f"yearly-negative sampling saturated at {len(out)}/{count} "
            f"({len(points)} source positives)",
            achieved=len(out), requested=count)
    return out


def sample_negatives(positives, region=CONUS_BBOX, counts=None, seed: int = 0,
                     attempt_factor: int = 200) -> list:
    """Deterministic three-tier negative synthesis; see module docstring.

    positives: IncidentRecord or LabeledSample list. Raises
    SaturationError (with the achieved count) when a tier cannot reach
    its target within attempt_factor * count tries.
    """
    if not positives:
        raise ValidationError("negative sampling needs at least one positive")
    wanted = dict(DEFAULT_COUNTS)
    wanted.update(counts or {})
    unknown = set(wanted) - set(DEFAULT_COUNTS)
    if unknown:
        raise ValidationError(f"unknown negative tiers: {sorted(unknown)}")

    points = [_as_point(p) for p in positives]
    index = _PositiveIndex(points)
    rng = random.Random(seed)
    samples = []
    for lat, lon, when in _sample_far(rng, index, region, points,
                                      wanted["far"],
                                      attempt_factor * max(wanted["far"], 1)):
        samples.append(LabeledSample(lat, lon, when, LABEL_NO_FIRE,
                                     "FarNeg"))
    for lat, lon, when in _sample_near(rng, index, points, wanted["near"],
                                       attempt_factor
                                       * max(wanted["near"], 1)):
        samples.append(LabeledSample(lat, lon, when, LABEL_NO_FIRE,
                                     "NearNeg"))
    for lat, lon, when in _sample_yearly(rng, index, points,
                                         wanted["yearly"]):
        samples.append(LabeledSample(lat, lon, when, LABEL_NO_FIRE,
                                     "YearlyNeg"))
    return samples


def positives_to_samples(records) -> list:
    return [LabeledSample(lat, lon, when, LABEL_FIRE, "Positive")
            for lat, lon, when in map(_as_point, records)]


# --- feature windows ------------------------------------------------------------

def _snap(value: float) -> int:
    return int(round(value * GRID_CELLS_PER_DEG))


class WeatherTable:
    """Daily rows keyed by (1/24-degree cell, date)."""

    def __init__(self):
        self._rows: dict = {}

    @classmethod
    def from_rows(cls, rows) -> "WeatherTable":
        table = cls()
        for row in rows:
            lat = float(_pick(row, _LAT_KEYS))
            lon = float(_pick(row, _LON_KEYS))
            when = parse_timestamp(_pick(row, _TIME_KEYS)).date()
            values = {}
            for var in WEATHER_VARS:
                if var not in row:
                    raise ValidationError(f"weather row missing {var!r}")
                values[var] = float(row[var])
            table._rows[(_snap(lat), _snap(lon), when)] = values
        return table

    @classmethod
    def read_csv(cls, path) -> "WeatherTable":
        with open(path, newline="") as handle:
            return cls.from_rows(csv.DictReader(handle))

    def __len__(self) -> int:
        return len(self._rows)

    def lookup(self, lat: float, lon: float, when: date):
        return self._rows.get((_snap(lat), _snap(lon), when))


def extract_windows(samples, weather: WeatherTable,
                    pre: int = WINDOW_PRE, post: int = WINDOW_POST,
                    max_gap_days: int = MAX_GAP_DAYS) -> tuple:
    """-> (windows, diagnostics); diagnostics are {row, reason} for
    skipped samples (1-based sample numbers)."""
    windows = []
    diagnostics = []
    for number, sample in enumerate(samples, start=1):
        rows = []
        missing = 0
        last = None
        failure = None
        for offset in range(-pre, post):
            when = sample.date + timedelta(days=offset)
            values = weather.lookup(sample.lat, sample.lon, when)
            if values is None:
                missing += 1
                if last is None:
                    failure = (f"window start {when.isoformat()} outside "
                               f"weather coverage")
                    break
                if missing > max_gap_days:
                    failure = f"more than {max_gap_days} missing days"
                    break
                values = last
            rows.append(dict(values))
            last = values
        if failure is not None:
            diagnostics.append({"row": number, "reason": failure})
            continue
        windows.append(FeatureWindow(sample=sample, days=tuple(rows)))
    return windows, diagnostics


# --- sample and window serialization ---------------------------------------------

def write_samples(samples, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["latitude", "longitude", "datetime", "label",
                         "tier"])
        for s in samples:
            writer.writerow([s.lat, s.lon, s.date.isoformat(), s.label,
                             s.tier])


def read_samples(path) -> list:
    samples = []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            samples.append(LabeledSample(
                lat=float(_pick(row, _LAT_KEYS)),
                lon=float(_pick(row, _LON_KEYS)),
                date=parse_timestamp(_pick(row, _TIME_KEYS)).date(),
                label=row["label"], tier=row["tier"]))
    return samples


def window_rows(window: FeatureWindow):
    """Yield Table-ordered value lists, one per day."""
    flag = "Yes" if window.sample.label == LABEL_FIRE else "No"
    for when, values in zip(window.dates(), window.days):
        row = [window.sample.lat, window.sample.lon, when.isoformat(), flag]
        row.extend(values[var] for var in WEATHER_VARS)
        yield row


def write_windows(windows, path) -> int:
    """Serialize windows one day per row; returns the row count."""
    count = 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TABLE_COLUMNS)
        for window in windows:
            for row in window_rows(window):
                writer.writerow(row)
                count += 1
    return count
