"""Synthetic AIS fleet in the raw DMA CSV layout.

Five target classes with distinct size, speed and route profiles, plus the
kinds of rows the cleaner is meant to discard (duplicates, base stations,
moored/anchored pings, impossible speeds, positions outside the area,
malformed lines) and a few vessels that broadcast no ship type.
"""
from __future__ import annotations

import calendar
import csv
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from aistrip.geo import PolygonRing, baltic_aoi
from aistrip.seeding import derive_rng

RAW_HEADER = (
    "# Timestamp", "Type of mobile", "MMSI", "Latitude", "Longitude", "Navigational status",
    "ROT", "SOG", "COG", "Heading", "IMO", "Callsign", "Name", "Ship type", "Cargo type",
    "Width", "Length", "Type of position fixing device", "Draught", "Destination", "ETA",
    "Data source type", "A", "B", "C", "D",
)

KM_PER_DEG = 6371.0 * math.pi / 180.0
KNOT_KMS = 1.852 / 3600.0


@dataclass(frozen=True)
class Profile:
    length_m: tuple[float, float]
    width_ratio: tuple[float, float]   # W / L
    bridge_ratio: tuple[float, float]  # A / L
    speed_kn: tuple[float, float]
    speed_sd: float
    route: str                         # transit | shuttle | meander
    cargo_types: tuple[str, ...]
    class_b_share: float = 0.0
    turn_sd_deg: float = 2.0


PROFILES: dict[str, Profile] = {
    "Cargo": Profile((130, 250), (0.12, 0.168), (0.78, 0.89), (10.0, 15.0), 0.5, "transit",
                     ("No additional information", "No additional information", "Category Z")),
    "Tanker": Profile((110, 240), (0.16, 0.21), (0.85, 0.94), (9.0, 13.0), 0.5, "transit",
                      ("Category X", "Category Y", "No additional information")),
    "Passenger": Profile((90, 200), (0.14, 0.18), (0.15, 0.35), (15.0, 21.0), 0.6, "shuttle",
                         ("No additional information",)),
    "Fishing": Profile((14, 40), (0.24, 0.32), (0.40, 0.65), (2.0, 7.0), 1.5, "meander",
                       ("No additional information",), class_b_share=0.3, turn_sd_deg=25.0),
    "HSC": Profile((30, 100), (0.25, 0.30), (0.10, 0.30), (28.0, 36.0), 1.0, "shuttle",
                   ("No additional information",)),
    # non-target classes, dropped at the class filter
    "Tug": Profile((20, 35), (0.30, 0.38), (0.30, 0.50), (5.0, 9.0), 1.0, "meander",
                   ("No additional information",), turn_sd_deg=15.0),
    "Pleasure": Profile((8, 20), (0.28, 0.35), (0.40, 0.60), (4.0, 12.0), 1.5, "meander",
                        ("No additional information",), class_b_share=1.0, turn_sd_deg=20.0),
}

# 10:1 between the largest and smallest target class, 313 trips in total
DEFAULT_TRIPS = {"Cargo": 130, "Tanker": 70, "Passenger": 60, "Fishing": 40, "HSC": 13, "Tug": 6, "Pleasure": 6}


@dataclass
class FleetConfig:
    seed: int = 42
    trips: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_TRIPS))
    start: str = "2025-01-22 00:00:00"
    ping_s: float = 60.0
    n_untyped: int = 3
    noise: bool = True


@dataclass
class Fleet:
    rows: list[list[str]]          # raw rows without header, timestamp order
    truth: dict[int, str]          # MMSI -> generating class
    untyped: list[int]             # MMSIs broadcasting "Undefined"
    trips: dict[int, int]          # MMSI -> trips generated
    malformed: int = 0


class _Area:
    """AOI containment with a safety margin, looked up on a precomputed raster."""

    def __init__(self, ring: PolygonRing, margin_deg: float = 0.04, cell_deg: float = 0.005):
        ext = ring.extent
        self.lo = (ext.min_lat, ext.min_lon)
        self.hi = (ext.max_lat, ext.max_lon)
        self.cell = cell_deg
        lats = np.arange(self.lo[0], self.hi[0] + cell_deg, cell_deg)
        lons = np.arange(self.lo[1], self.hi[1] + cell_deg, cell_deg)
        LA, LO = np.meshgrid(lats, lons, indexing="ij")
        ok = np.ones(LA.shape, dtype=bool)
        # a cell counts as inside when its corner and four offset probes are all inside
        for dlat, dlon in ((0, 0), (margin_deg, 0), (-margin_deg, 0), (0, 1.7 * margin_deg), (0, -1.7 * margin_deg)):
            ok &= ring.contains((LA + dlat).ravel(), (LO + dlon).ravel()).reshape(LA.shape)
        # require all four corners of the cell so any point inside it is safe
        self.mask = ok[:-1, :-1] & ok[1:, :-1] & ok[:-1, 1:] & ok[1:, 1:]

    def inside(self, lat: float, lon: float) -> bool:
        i = int((lat - self.lo[0]) // self.cell)
        j = int((lon - self.lo[1]) // self.cell)
        if i < 0 or j < 0 or i >= self.mask.shape[0] or j >= self.mask.shape[1]:
            return False
        return bool(self.mask[i, j])

    def sample(self, rng) -> tuple[float, float]:
        while True:
            lat = rng.uniform(self.lo[0], self.hi[0])
            lon = rng.uniform(self.lo[1], self.hi[1])
            if self.inside(lat, lon):
                return lat, lon

    def segment_inside(self, a, b, n: int = 60) -> bool:
        return all(self.inside(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])) for t in np.linspace(0, 1, n))


def _km(a, b) -> float:
    dlat = (b[0] - a[0]) * KM_PER_DEG
    dlon = (b[1] - a[1]) * KM_PER_DEG * math.cos(math.radians((a[0] + b[0]) / 2))
    return math.hypot(dlat, dlon)


def _bearing(a, b) -> float:
    dlat = b[0] - a[0]
    dlon = (b[1] - a[1]) * math.cos(math.radians((a[0] + b[0]) / 2))
    return math.degrees(math.atan2(dlon, dlat)) % 360.0


def _step(p, heading_deg: float, km: float):
    h = math.radians(heading_deg)
    lat = p[0] + km * math.cos(h) / KM_PER_DEG
    lon = p[1] + km * math.sin(h) / (KM_PER_DEG * math.cos(math.radians(p[0])))
    return lat, lon


def _route_pair(area: _Area, rng, min_km: float, max_km: float, start=None):
    for _ in range(2000):
        a = start if start is not None else area.sample(rng)
        b = area.sample(rng)
        if min_km <= _km(a, b) <= max_km and area.segment_inside(a, b):
            return a, b
    raise RuntimeError("could not place a route inside the area")


@dataclass
class _Vessel:
    mmsi: int
    cls: str
    profile: Profile
    length: float
    width: float
    a: float
    c: float
    speed: float
    cargo: str
    mobile: str
    name: str
    callsign: str
    imo: str
    ship_type_text: str
    ports: Optional[tuple] = None
    has_dims: bool = True


def _fmt_ts(ts: float) -> str:
    return time.strftime("%d/%m/%Y %H:%M:%S", time.gmtime(int(ts)))


def _row(v: _Vessel, ts, pos, nav, sog, cog, heading, rng, static: bool = True) -> list[str]:
    def num(x, nd=1):
        return "" if x is None else f"{x:.{nd}f}"

    dims = ["", "", "", ""]
    width = length = ""
    if v.has_dims and static:
        a = round(v.a)
        b = round(v.length) - a
        c = round(v.c)
        d = round(v.width) - c
        dims = [str(a), str(b), str(c), str(d)]
        width, length = str(round(v.width)), str(round(v.length))
    s = static
    return [
        _fmt_ts(ts), v.mobile, str(v.mmsi), f"{pos[0]:.6f}", f"{pos[1]:.6f}", nav,
        num(rng.normal(0, 2) if sog and sog > 1 else 0.0), num(sog), num(cog), "" if heading is None else str(int(heading) % 360),
        v.imo if s else "", v.callsign if s else "", v.name if s else "", v.ship_type_text if s else "",
        v.cargo if s else "", width, length, "GPS" if s else "", num(rng.uniform(3, 11)) if s else "",
        "SYNTH PORT" if s else "", "", "AIS", *dims,
    ]


def _shifted(row: list[str], seconds: int, changes: dict[int, str]) -> list[str]:
    out = list(row)
    ts = calendar.timegm(time.strptime(row[0], "%d/%m/%Y %H:%M:%S")) + seconds
    out[0] = _fmt_ts(ts)
    for k, v in changes.items():
        out[k] = v
    return out


def _make_vessel(mmsi: int, cls: str, rng, area: _Area, untyped: bool = False) -> _Vessel:
    p = PROFILES[cls]
    length = rng.uniform(*p.length_m)
    width = length * rng.uniform(*p.width_ratio)
    a = length * rng.uniform(*p.bridge_ratio)
    c = width * rng.uniform(0.4, 0.6)
    ports = None
    if p.route == "shuttle":
        ports = _route_pair(area, rng, 25.0, 80.0)
    return _Vessel(
        mmsi=mmsi, cls=cls, profile=p, length=length, width=width, a=a, c=c,
        speed=rng.uniform(*p.speed_kn), cargo=str(rng.choice(p.cargo_types)),
        mobile="Class B" if rng.random() < p.class_b_share else "Class A",
        name=f"{cls.upper()} {mmsi % 1000:03d}", callsign=f"OZ{mmsi % 10000:04d}",
        imo=str(9000000 + mmsi % 1000000) if cls not in ("Fishing", "Pleasure") else "",
        ship_type_text="Undefined" if untyped else cls, ports=ports,
    )


def _trip_points(v: _Vessel, start, dest, rng, area: _Area, ping_s: float, ts: float):
    """Simulate one trip; returns (rows-to-be as tuples, end position, end time)."""
    p = v.profile
    out = []
    pos = start
    if p.route == "meander":
        duration = rng.uniform(1.5, 4.0) * 3600
        heading = rng.uniform(0, 360)
        t_end = ts + duration
    else:
        heading = _bearing(start, dest)
        t_end = None
    speed = v.speed
    while True:
        sog = max(0.5, speed + rng.normal(0, p.speed_sd))
        if p.route == "meander":
            # alternate slow working and faster steaming legs
            if rng.random() < 0.05:
                speed = rng.uniform(*p.speed_kn)
            heading = (heading + rng.normal(0, p.turn_sd_deg)) % 360
        else:
            heading = (_bearing(pos, dest) + rng.normal(0, p.turn_sd_deg)) % 360
        cog = (heading + rng.normal(0, 1.0)) % 360
        out.append((ts, pos, sog, cog))
        dt = ping_s + rng.uniform(-10, 10)
        step_km = sog * KNOT_KMS * dt
        nxt = _step(pos, heading, step_km)
        turns = 0
        while not area.inside(*nxt) and turns < 24:
            heading = (heading + 35.0) % 360
            nxt = _step(pos, heading, step_km)
            turns += 1
        if turns == 24:
            nxt = pos
        ts += dt
        pos = nxt
        if p.route == "meander":
            if ts >= t_end:
                break
        elif _km(pos, dest) < step_km * 1.5:
            out.append((ts, dest, 0.8, cog))
            pos = dest
            break
    return out, pos, ts


def _emit_stop(v: _Vessel, pos, ts, rng, kind: str, rows: list, ping_s: float) -> float:
    """Stay put for at least an hour; returns the time the next trip starts."""
    duration = rng.uniform(1.2, 3.5) * 3600
    if kind == "moored":
        t = ts + 120
        while t < ts + duration:
            rows.append(_row(v, t, pos, "Moored", 0.0, None, None, rng))
            t += 180
    elif kind == "drift":
        t = ts + ping_s
        while t < ts + duration:
            jitter = (pos[0] + rng.normal(0, 0.00012), pos[1] + rng.normal(0, 0.0002))
            rows.append(_row(v, t, jitter, "Under way using engine", round(rng.uniform(0.1, 0.4), 1),
                             rng.uniform(0, 360), None, rng))
            t += ping_s
    return ts + duration


def generate_fleet(cfg: Optional[FleetConfig] = None, area: Optional[PolygonRing] = None) -> Fleet:
    cfg = cfg or FleetConfig()
    zone = _Area(area or baltic_aoi())
    t0 = calendar.timegm(time.strptime(cfg.start, "%Y-%m-%d %H:%M:%S"))
    rows: list[list[str]] = []
    truth: dict[int, str] = {}
    trips_of: dict[int, int] = {}
    untyped: list[int] = []

    plan: list[tuple[str, int, bool]] = []  # (class, n_trips, untyped)
    rng_plan = derive_rng(cfg.seed, "synthetic", 0)
    for cls, total in cfg.trips.items():
        left = total
        while left > 0:
            n = int(min(left, rng_plan.integers(2, 5)))
            plan.append((cls, n, False))
            left -= n
    for k in range(cfg.n_untyped):
        plan.append((("Cargo", "Passenger", "Fishing")[k % 3], 2, True))

    for idx, (cls, n_trips, is_untyped) in enumerate(plan, start=1):
        rng = derive_rng(cfg.seed, "synthetic", idx)
        mmsi = 219_000_000 + idx * 7
        v = _make_vessel(mmsi, cls, rng, zone, untyped=is_untyped)
        truth[mmsi] = cls
        trips_of[mmsi] = n_trips
        if is_untyped:
            untyped.append(mmsi)
        ts = t0 + rng.uniform(0, 10 * 3600)
        if v.profile.route == "shuttle":
            pos = v.ports[0]
        else:
            pos = zone.sample(rng)
        for k in range(n_trips):
            if v.profile.route == "shuttle":
                dest = v.ports[(k + 1) % 2]
            elif v.profile.route == "transit":
                _, dest = _route_pair(zone, rng, 25.0, 110.0, start=pos)
            else:
                dest = None
            pts, pos, ts = _trip_points(v, pos, dest, rng, zone, cfg.ping_s, ts)
            for i, (t, p, sog, cog) in enumerate(pts):
                static = rng.random() > 0.15  # some position reports lack static fields
                heading = None if rng.random() < 0.1 else cog + rng.normal(0, 3)
                cog_out = None if rng.random() < 0.03 else cog
                rows.append(_row(v, t, p, "Under way using engine", sog, cog_out, heading, rng, static=static or i == 0))
            if k < n_trips - 1:
                kind = ("moored", "drift", "silent")[int(rng.integers(0, 3))]
                ts = _emit_stop(v, pos, ts, rng, kind, rows, cfg.ping_s)

    malformed = 0
    if cfg.noise:
        rng = derive_rng(cfg.seed, "synthetic", 10_000)
        noise = []
        # shore base station
        base = _Vessel(2190047, "Base", PROFILES["Cargo"], 0, 0, 0, 0, 0, "", "Base Station", "", "", "", "", has_dims=False)
        for t in np.arange(t0, t0 + 30 * 3600, 600):
            noise.append(_row(base, t, (54.9, 14.1), "Unknown value", None, None, None, rng, static=False))
        # vessel at anchor
        anchor = _make_vessel(219_999_001, "Tanker", rng, zone)
        p = zone.sample(rng)
        for t in np.arange(t0, t0 + 6 * 3600, 300):
            noise.append(_row(anchor, t, p, "At anchor", 0.1, 10.0, 10, rng))
        # receiver glitches: speed 102.3 (not available) and far-away positions
        for i in range(0, len(rows), 997):
            noise.append(_shifted(rows[i], 1, {7: "102.3"}))
        for i in range(5, len(rows), 1499):
            noise.append(_shifted(rows[i], 2, {3: "62.500000", 4: "5.000000"}))
        for i in range(11, len(rows), 1999):
            # inside the bbox, outside the area of interest
            noise.append(_shifted(rows[i], 3, {3: "57.500000", 4: "11.000000"}))
        for i in range(17, len(rows), 1301):
            noise.append(_shifted(rows[i], 4, {7: "0.0"}))
        # exact duplicates
        for i in range(3, len(rows), 211):
            noise.append(list(rows[i]))
        # a vessel that never reports its dimensions
        nodims = _make_vessel(219_999_002, "Cargo", rng, zone)
        nodims.has_dims = False
        truth[nodims.mmsi] = "Cargo"
        trips_of[nodims.mmsi] = 1
        a, b = _route_pair(zone, rng, 30.0, 80.0)
        pts, _, _ = _trip_points(nodims, a, b, rng, zone, cfg.ping_s, t0 + 3600)
        for t, p, sog, cog in pts:
            noise.append(_row(nodims, t, p, "Under way using engine", sog, cog, cog, rng))
        rows.extend(noise)
        malformed = 2

    rows.sort(key=lambda r: (calendar.timegm(time.strptime(r[0], "%d/%m/%Y %H:%M:%S")), int(r[2])))
    fleet = Fleet(rows, truth, untyped, trips_of, malformed)
    return fleet


def write_daily_files(fleet: Fleet, outdir: str | Path, prefix: str = "aisdk-") -> list[Path]:
    """Write one raw CSV per UTC day; malformed lines go into the first file."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    by_day: dict[str, list[list[str]]] = defaultdict(list)
    for r in fleet.rows:
        d, m, y = r[0][:10].split("/")
        by_day[f"{y}-{m}-{d}"].append(r)
    paths = []
    for k, day in enumerate(sorted(by_day)):
        path = outdir / f"{prefix}{day}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RAW_HEADER)
            rows = by_day[day]
            for i, r in enumerate(rows):
                w.writerow(r)
                if k == 0 and i in (10, 20) and fleet.malformed:
                    fh.write(",".join(r[:7]) + "\n")
        paths.append(path)
    return paths


def main(argv=None) -> int:
    import argparse

    ap = argparse.ArgumentParser(description="Write a synthetic raw AIS fleet as daily CSV files.")
    ap.add_argument("outdir")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--untyped", type=int, default=3)
    args = ap.parse_args(argv)
    fleet = generate_fleet(FleetConfig(seed=args.seed, n_untyped=args.untyped))
    for p in write_daily_files(fleet, args.outdir):
        print(p)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
