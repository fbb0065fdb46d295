"""Split per-vessel tracks into trips at prolonged stationary intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from aistrip.geo import EARTH_RADIUS_KM, path_length_km
from aistrip.records import AisRecord


@dataclass(frozen=True)
class SegmentationParams:
    stop_radius_m: float = 100.0
    stop_min_duration_s: float = 3600.0
    min_trip_length_km: float = 0.2
    min_trip_points: int = 10

    def __post_init__(self):
        for name in ("stop_radius_m", "stop_min_duration_s", "min_trip_length_km", "min_trip_points"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class StopInterval:
    start_index: int
    end_index: int  # inclusive
    duration_s: float


@dataclass
class Trajectory:
    trip_id: int
    mmsi: int
    records: list[AisRecord] = field(repr=False)

    @property
    def trip_start(self) -> int:
        return self.records[0].timestamp

    @property
    def trip_end(self) -> int:
        return self.records[-1].timestamp

    @property
    def length_km(self) -> float:
        return path_length_km(r.position for r in self.records)

    def __len__(self) -> int:
        return len(self.records)


def _dist_m(lat1, lon1, lat2, lon2) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    h = math.sin((p2 - p1) / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(math.radians(lon2 - lon1) / 2) ** 2
    h = min(h, 1.0)
    return 2000.0 * EARTH_RADIUS_KM * math.atan2(math.sqrt(h), math.sqrt(1 - h))


def detect_stops(track: Sequence[AisRecord], params: SegmentationParams = SegmentationParams()) -> list[StopInterval]:
    """Greedy left-to-right search for maximal stationary runs.

    A run is anchored at its first record and grows while every following
    record stays within ``stop_radius_m`` of that anchor. Runs lasting at
    least ``stop_min_duration_s`` become stops; otherwise the anchor moves on
    by one record.
    """
    stops: list[StopInterval] = []
    n = len(track)
    radius = params.stop_radius_m
    i = 0
    while i < n:
        a = track[i].position
        j = i
        while j + 1 < n:
            b = track[j + 1].position
            if _dist_m(a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg) > radius:
                break
            j += 1
        duration = track[j].timestamp - track[i].timestamp
        if j > i and duration >= params.stop_min_duration_s:
            stops.append(StopInterval(i, j, float(duration)))
            i = j + 1
        else:
            i += 1
    return stops


def segment(track: Sequence[AisRecord], stops: Sequence[StopInterval],
            params: SegmentationParams = SegmentationParams()) -> list[list[AisRecord]]:
    """Cut the track around stops and at long reporting gaps.

    Returns the runs of non-stop records in time order; trip ids are attached
    later by :func:`segment_tracks` so numbering spans all vessels.
    """
    in_stop = [False] * len(track)
    for s in stops:
        for k in range(s.start_index, s.end_index + 1):
            in_stop[k] = True
    pieces: list[list[AisRecord]] = []
    current: list[AisRecord] = []
    for k, r in enumerate(track):
        if in_stop[k]:
            if current:
                pieces.append(current)
                current = []
            continue
        if current and r.timestamp - current[-1].timestamp > params.stop_min_duration_s:
            pieces.append(current)
            current = []
        current.append(r)
    if current:
        pieces.append(current)
    return pieces


@dataclass
class SegmentationResult:
    trips: list[Trajectory]
    stops: dict[int, list[StopInterval]]


def segment_tracks(tracks: Mapping[int, Sequence[AisRecord]],
                   params: SegmentationParams = SegmentationParams()) -> SegmentationResult:
    """Segment every track and number trips 1..N in (mmsi, trip_start) order."""
    pieces: list[tuple[int, list[AisRecord]]] = []
    all_stops: dict[int, list[StopInterval]] = {}
    for mmsi, track in tracks.items():
        stops = detect_stops(track, params)
        all_stops[mmsi] = stops
        pieces.extend((mmsi, p) for p in segment(track, stops, params))
    pieces.sort(key=lambda mp: (mp[0], mp[1][0].timestamp))
    trips = [Trajectory(i + 1, mmsi, recs) for i, (mmsi, recs) in enumerate(pieces)]
    return SegmentationResult(trips, all_stops)


def filter_trips(trips: Iterable[Trajectory], params: SegmentationParams = SegmentationParams()) -> list[Trajectory]:
    """Drop near-stationary or sparse trips."""
    min_points = max(2, params.min_trip_points)
    return [
        t for t in trips
        if len(t) >= min_points and t.length_km >= params.min_trip_length_km
    ]
