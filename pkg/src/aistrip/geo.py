"""Spherical geometry primitives: great-circle distance, bearings, AOI containment."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

EARTH_RADIUS_KM = 6371.0


class UndefinedBearingError(ValueError):
    """Raised when a bearing is requested between two identical points."""


class GeoPoint(NamedTuple):
    lat_deg: float
    lon_deg: float

    def is_valid(self) -> bool:
        return -90.0 <= self.lat_deg <= 90.0 and -180.0 <= self.lon_deg <= 180.0


@dataclass(frozen=True)
class BoundingBox:
    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def __post_init__(self):
        if self.min_lat > self.max_lat or self.min_lon > self.max_lon:
            raise ValueError(f"inverted bounding box: {self}")

    @classmethod
    def from_lonlat(cls, min_lon: float, min_lat: float, max_lon: float, max_lat: float) -> "BoundingBox":
        """Build from the EPSG:4326 ``[minLon, minLat, maxLon, maxLat]`` ordering."""
        return cls(min_lat=min_lat, min_lon=min_lon, max_lat=max_lat, max_lon=max_lon)

    def contains(self, lat: float, lon: float) -> bool:
        return self.min_lat <= lat <= self.max_lat and self.min_lon <= lon <= self.max_lon


# Denmark outlier box, [minLon, minLat, maxLon, maxLat]
DENMARK_BBOX = BoundingBox.from_lonlat(4.25, 53.61, 19.54, 61.89)


class PolygonRing:
    """Closed polygon ring in lon/lat treated as planar coordinates.

    A repeated closing vertex is accepted and dropped. Containment uses the
    nonzero winding rule with boundary points counted as inside.
    """

    def __init__(self, vertices: Sequence[GeoPoint]):
        verts = [GeoPoint(float(v[0]), float(v[1])) for v in vertices]
        if len(verts) > 1 and verts[0] == verts[-1]:
            verts = verts[:-1]
        for a, b in zip(verts, verts[1:]):
            if a == b:
                raise ValueError(f"consecutive duplicate vertex {a}")
        if len(set(verts)) < 3:
            raise ValueError("a ring needs at least 3 distinct vertices")
        self.vertices: tuple[GeoPoint, ...] = tuple(verts)
        lat = np.array([v.lat_deg for v in verts])
        lon = np.array([v.lon_deg for v in verts])
        self._x0, self._y0 = lon, lat
        self._x1, self._y1 = np.roll(lon, -1), np.roll(lat, -1)
        self._edges = tuple(zip(self._x0.tolist(), self._y0.tolist(), self._x1.tolist(), self._y1.tolist()))
        self.extent = BoundingBox(lat.min(), lon.min(), lat.max(), lon.max())

    def __len__(self) -> int:
        return len(self.vertices)

    def contains(self, lat, lon) -> np.ndarray:
        """Vectorized containment test for arrays of latitudes/longitudes."""
        y = np.atleast_1d(np.asarray(lat, dtype=float))
        x = np.atleast_1d(np.asarray(lon, dtype=float))
        winding = np.zeros(x.shape, dtype=np.int64)
        on_edge = np.zeros(x.shape, dtype=bool)
        for x0, y0, x1, y1 in zip(self._x0, self._y0, self._x1, self._y1):
            cross = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0)
            scale = max(abs(x1 - x0), abs(y1 - y0))
            on_edge |= (
                (np.abs(cross) <= 1e-12 * scale)
                & (np.minimum(x0, x1) <= x) & (x <= np.maximum(x0, x1))
                & (np.minimum(y0, y1) <= y) & (y <= np.maximum(y0, y1))
            )
            up = (y0 <= y) & (y1 > y) & (cross > 0)
            down = (y0 > y) & (y1 <= y) & (cross < 0)
            winding += up.astype(np.int64) - down.astype(np.int64)
        return on_edge | (winding != 0)

    def contains_point(self, lat: float, lon: float) -> bool:
        """Scalar form of :meth:`contains` (same rule, no array overhead)."""
        y, x = float(lat), float(lon)
        winding = 0
        for x0, y0, x1, y1 in self._edges:
            cross = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0)
            if (abs(cross) <= 1e-12 * max(abs(x1 - x0), abs(y1 - y0))
                    and min(x0, x1) <= x <= max(x0, x1) and min(y0, y1) <= y <= max(y0, y1)):
                return True
            if y0 <= y < y1 and cross > 0:
                winding += 1
            elif y1 <= y < y0 and cross < 0:
                winding -= 1
        return winding != 0

    @classmethod
    def from_file(cls, path: str | Path) -> "PolygonRing":
        """Load a ring from ``lon lat`` lines or a GeoJSON ring/Polygon."""
        text = Path(path).read_text()
        return cls.from_text(text)

    @classmethod
    def from_text(cls, text: str) -> "PolygonRing":
        stripped = text.lstrip()
        if stripped.startswith("{") or stripped.startswith("["):
            obj = json.loads(stripped)
            if isinstance(obj, dict):
                if obj.get("type") == "FeatureCollection":
                    obj = obj["features"][0]
                if obj.get("type") == "Feature":
                    obj = obj["geometry"]
                obj = obj["coordinates"][0] if obj.get("type") == "Polygon" else obj["coordinates"]
            return cls([GeoPoint(lat, lon) for lon, lat, *_ in obj])
        pts = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            lon, lat = (float(tok) for tok in line.replace(",", " ").split())
            pts.append(GeoPoint(lat, lon))
        return cls(pts)


def baltic_aoi() -> PolygonRing:
    """The bundled Bornholm strait area of interest (79 vertices)."""
    text = resources.files("aistrip.data").joinpath("baltic_aoi.txt").read_text()
    return PolygonRing.from_text(text)


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km between two points (atan2 form)."""
    phi1, phi2 = math.radians(a.lat_deg), math.radians(b.lat_deg)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    h = min(max(h, 0.0), 1.0)
    return EARTH_RADIUS_KM * 2 * math.atan2(math.sqrt(h), math.sqrt(1 - h))


def haversine_km_arrays(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Elementwise haversine distance in km for broadcastable degree arrays."""
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlam = np.radians(np.asarray(lon2) - np.asarray(lon1))
    h = np.sin(dphi / 2) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2) ** 2
    h = np.clip(h, 0.0, 1.0)
    return EARTH_RADIUS_KM * 2 * np.arctan2(np.sqrt(h), np.sqrt(1 - h))


def path_length_km(points: Iterable[GeoPoint]) -> float:
    """Sum of consecutive haversine distances; 0 for fewer than two points."""
    pts = list(points)
    if len(pts) < 2:
        return 0.0
    lat = np.array([p.lat_deg for p in pts])
    lon = np.array([p.lon_deg for p in pts])
    return float(haversine_km_arrays(lat[:-1], lon[:-1], lat[1:], lon[1:]).sum())


def initial_bearing_deg(a: GeoPoint, b: GeoPoint) -> float:
    """Forward azimuth from ``a`` to ``b`` in [0, 360)."""
    if a == b:
        raise UndefinedBearingError(f"bearing undefined for identical points {a}")
    phi1, phi2 = math.radians(a.lat_deg), math.radians(b.lat_deg)
    dlam = math.radians(b.lon_deg - a.lon_deg)
    y = math.sin(dlam) * math.cos(phi2)
    x = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlam)
    deg = math.degrees(math.atan2(y, x)) % 360.0
    # -0.0 % 360 and tiny negatives can round up to 360.0
    return 0.0 if deg >= 360.0 else deg


def point_in_polygon(p: GeoPoint, ring: PolygonRing) -> bool:
    if not ring.extent.contains(p.lat_deg, p.lon_deg):
        return False
    return ring.contains_point(p.lat_deg, p.lon_deg)


def bbox_area_km2(box: BoundingBox) -> float:
    """Area of a lat/lon box as the product of its two mid-line edges."""
    mean_lat = (box.min_lat + box.max_lat) / 2
    mid_lon = (box.min_lon + box.max_lon) / 2
    width = haversine_km(GeoPoint(mean_lat, box.min_lon), GeoPoint(mean_lat, box.max_lon))
    height = haversine_km(GeoPoint(box.min_lat, mid_lon), GeoPoint(box.max_lat, mid_lon))
    return width * height
