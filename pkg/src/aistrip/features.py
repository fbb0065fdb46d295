"""Per-trip feature vectors: vessel shape, kinematics, geometry and timing."""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import IO, Iterable, Optional

import numpy as np

from aistrip.geo import (
    BoundingBox,
    UndefinedBearingError,
    bbox_area_km2,
    haversine_km,
    initial_bearing_deg,
    path_length_km,
)
from aistrip.records import VesselDims
from aistrip.segmentation import Trajectory


class MissingDimsError(ValueError):
    """Vessel length or width is zero or unknown."""


class MissingKinematicsError(ValueError):
    """No usable speed or course values in a trip."""


@dataclass(frozen=True)
class ShapeFeatures:
    length_m: float
    width_m: float
    aspect_ratio: float
    naive_perimeter_m: float
    naive_area_m2: float
    shape_complexity: float
    bridge_position_ratio: float


@dataclass(frozen=True)
class KinematicFeatures:
    sog_min: float
    sog_max: float
    sog_mean: float
    sog_median: float
    sog_std: float
    cog_min: float
    cog_max: float
    cog_mean: float
    cog_median: float
    cog_std: float
    init_cos: float
    init_sin: float


@dataclass(frozen=True)
class GeoTemporalFeatures:
    trip_duration_s: float
    n_positions: int
    trajectory_length_km: float
    endpoint_distance_km: float
    directness_ratio: float
    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float
    lat_span: float
    lon_span: float
    total_km2: float


def shape_features(dims: Optional[VesselDims]) -> ShapeFeatures:
    if dims is None:
        raise MissingDimsError("no A/B/C/D dimensions")
    length = dims.a_m + dims.b_m
    width = dims.c_m + dims.d_m
    if length <= 0 or width <= 0 or length * width == 0:  # the product can underflow
        raise MissingDimsError(f"degenerate hull L={length} W={width}")
    return ShapeFeatures(
        length_m=length,
        width_m=width,
        aspect_ratio=width / length,
        naive_perimeter_m=2 * (length + width),
        naive_area_m2=length * width,
        shape_complexity=(length + width) ** 2 / (length * width),
        bridge_position_ratio=dims.a_m / length,
    )


def course_series(traj: Trajectory) -> list[float]:
    """Reported COG per record, falling back to the bearing towards the next fix.

    The last record falls back to the bearing from its predecessor. Records
    whose fallback is undefined (no displacement) contribute nothing.
    """
    recs = traj.records
    out = []
    for i, r in enumerate(recs):
        if r.cog_deg is not None:
            out.append(r.cog_deg)
            continue
        if len(recs) < 2:
            continue
        a, b = (recs[i], recs[i + 1]) if i + 1 < len(recs) else (recs[i - 1], recs[i])
        try:
            out.append(initial_bearing_deg(a.position, b.position))
        except UndefinedBearingError:
            continue
    return out


def kinematic_features(traj: Trajectory) -> KinematicFeatures:
    sog = np.array([r.sog_knots for r in traj.records if r.sog_knots is not None], dtype=float)
    if sog.size == 0:
        raise MissingKinematicsError("no SOG values")
    cog = np.array(course_series(traj), dtype=float)
    if cog.size == 0:
        raise MissingKinematicsError("no course values")
    first = math.radians(cog[0])
    return KinematicFeatures(
        sog_min=float(sog.min()),
        sog_max=float(sog.max()),
        sog_mean=float(sog.mean()),
        sog_median=float(np.median(sog)),
        sog_std=float(sog.std()),
        cog_min=float(cog.min()),
        cog_max=float(cog.max()),
        cog_mean=float(cog.mean()),
        cog_median=float(np.median(cog)),
        cog_std=float(cog.std()),
        init_cos=math.cos(first),
        init_sin=math.sin(first),
    )


def geotemporal_features(traj: Trajectory) -> GeoTemporalFeatures:
    recs = traj.records
    if len(recs) < 2:
        raise ValueError("a trajectory needs at least two records")
    lat = [r.position.lat_deg for r in recs]
    lon = [r.position.lon_deg for r in recs]
    length = path_length_km(r.position for r in recs)
    endpoint = haversine_km(recs[0].position, recs[-1].position)
    box = BoundingBox(min(lat), min(lon), max(lat), max(lon))
    return GeoTemporalFeatures(
        trip_duration_s=float(recs[-1].timestamp - recs[0].timestamp),
        n_positions=len(recs),
        trajectory_length_km=length,
        endpoint_distance_km=endpoint,
        directness_ratio=min(1.0, endpoint / length) if length > 0 else 0.0,
        min_lat=box.min_lat,
        max_lat=box.max_lat,
        min_lon=box.min_lon,
        max_lon=box.max_lon,
        lat_span=box.max_lat - box.min_lat,
        lon_span=box.max_lon - box.min_lon,
        total_km2=bbox_area_km2(box),
    )


@dataclass
class FeatureRow:
    mmsi: int
    trip_id: int
    trip_start: int
    trip_end: int
    ship_type: Optional[str]
    cargo_type: Optional[str]
    callsign: Optional[str]
    name: Optional[str]
    destination: Optional[str]
    mobile_type: str
    shape: ShapeFeatures
    kinematics: KinematicFeatures
    geotemporal: GeoTemporalFeatures

    def as_dict(self) -> dict:
        flat = {**asdict(self.shape), **asdict(self.kinematics), **asdict(self.geotemporal)}
        flat.update({k: getattr(self, k) for k in IDENTITY_COLUMNS + ("mobile_type",)})
        return {c: flat[c] for c in TABLE_COLUMNS}


IDENTITY_COLUMNS = (
    "mmsi", "trip_id", "trip_start", "trip_end", "ship_type", "cargo_type",
    "callsign", "name", "destination",
)

# model inputs, in the documented feature-list order
MODEL_FEATURES = (
    "cargo_type",
    "trip_duration_s", "n_positions", "trajectory_length_km", "endpoint_distance_km",
    "directness_ratio", "min_lat", "max_lat", "min_lon", "max_lon", "lat_span", "lon_span",
    "sog_min", "sog_max", "sog_mean", "sog_median", "sog_std",
    "cog_min", "cog_max", "cog_mean", "cog_median", "cog_std",
    "init_cos", "init_sin",
    "naive_perimeter_m", "naive_area_m2", "aspect_ratio", "shape_complexity",
    "bridge_position_ratio", "mobile_type", "total_km2",
)
CATEGORICAL_FEATURES = ("cargo_type", "mobile_type")
NUMERIC_FEATURES = tuple(f for f in MODEL_FEATURES if f not in CATEGORICAL_FEATURES)

TABLE_COLUMNS = IDENTITY_COLUMNS + tuple(c for c in MODEL_FEATURES if c != "cargo_type") + ("length_m", "width_m")


def _first(traj: Trajectory, name: str):
    for r in traj.records:
        if r.static is not None and getattr(r.static, name) is not None:
            return getattr(r.static, name)
    return None


def assemble(traj: Trajectory, skips: Optional[Counter] = None, require_label: bool = True) -> Optional[FeatureRow]:
    """Build a FeatureRow, or count a skip reason and return None.

    With ``require_label=False`` a trip without a ship type still yields a
    row (label None); used when predicting types for unlabeled vessels.
    """
    skips = skips if skips is not None else Counter()
    ship_type = _first(traj, "ship_type")
    try:
        shape = shape_features(_first(traj, "dims"))
    except MissingDimsError:
        skips["missing_dims"] += 1
        return None
    try:
        kin = kinematic_features(traj)
    except MissingKinematicsError:
        skips["missing_kinematics"] += 1
        return None
    if ship_type is None and require_label:
        skips["missing_ship_type"] += 1
        return None
    mobile = Counter(r.mobile_type.value for r in traj.records).most_common(1)[0][0]
    return FeatureRow(
        mmsi=traj.mmsi,
        trip_id=traj.trip_id,
        trip_start=traj.trip_start,
        trip_end=traj.trip_end,
        ship_type=ship_type,
        cargo_type=_first(traj, "cargo_type"),
        callsign=_first(traj, "callsign"),
        name=_first(traj, "name"),
        destination=_first(traj, "destination"),
        mobile_type=mobile,
        shape=shape,
        kinematics=kin,
        geotemporal=geotemporal_features(traj),
    )


def featurize(trips: Iterable[Trajectory], require_label: bool = True) -> tuple[list[FeatureRow], Counter]:
    skips: Counter = Counter()
    rows = [row for t in trips if (row := assemble(t, skips, require_label)) is not None]
    return rows, skips


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_feature_table(fh: IO[str], rows: Iterable[FeatureRow]) -> int:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    n = 0
    for row in rows:
        d = row.as_dict()
        writer.writerow([_fmt(d[c]) for c in TABLE_COLUMNS])
        n += 1
    return n


_INT_COLUMNS = {"mmsi", "trip_id", "trip_start", "trip_end", "n_positions"}
_TEXT_COLUMNS = {"ship_type", "cargo_type", "callsign", "name", "destination", "mobile_type"}


def parse_feature_table(lines: Iterable[str]) -> list[dict]:
    """Read a feature table back into plain dicts (missing values become None)."""
    reader = csv.reader(lines)
    header = next(reader)
    out = []
    for row in reader:
        if not row:
            continue
        d = {}
        for col, text in zip(header, row):
            if text == "":
                d[col] = None
            elif col in _INT_COLUMNS:
                d[col] = int(text)
            elif col in _TEXT_COLUMNS:
                d[col] = text
            else:
                d[col] = float(text)
        out.append(d)
    return out
