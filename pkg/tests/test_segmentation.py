import math

import pytest
from hypothesis import given, settings, strategies as st

from aistrip.geo import GeoPoint, haversine_km
from aistrip.records import AisRecord, NavStatus
from aistrip.segmentation import (
    SegmentationParams,
    Trajectory,
    detect_stops,
    filter_trips,
    segment,
    segment_tracks,
)

P = SegmentationParams()
KM_PER_DEG_LAT = 6371.0 * math.pi / 180


def at(ts, lat, lon, mmsi=1, nav=NavStatus.UNDER_WAY_USING_ENGINE):
    return AisRecord(ts, mmsi, GeoPoint(lat, lon), nav, 10.0, 0.0)


def moving(t0, n, lat0=55.0, lon0=14.0, dt=60, step_km=0.3, mmsi=1):
    return [at(t0 + k * dt, lat0 + k * step_km / KM_PER_DEG_LAT, lon0, mmsi) for k in range(n)]


def parked(t0, seconds, lat=55.0, lon=14.0, dt=300, mmsi=1, nav=NavStatus.UNDER_WAY_USING_ENGINE):
    return [at(t0 + k * dt, lat, lon, mmsi, nav) for k in range(seconds // dt + 1)]


def test_two_hours_fixed_is_one_stop():
    track = parked(0, 7200)
    assert [(s.start_index, s.end_index) for s in detect_stops(track)] == [(0, len(track) - 1)]


def test_half_hour_then_moving_has_no_stop():
    track = parked(0, 1800) + moving(1860, 20, lat0=55.001)
    assert detect_stops(track) == []


def test_moored_two_days_despite_underway_status():
    track = parked(0, 48 * 3600, dt=360)
    stops = detect_stops(track)
    assert len(stops) == 1 and stops[0].duration_s >= 48 * 3600


def test_gps_jitter_within_radius_still_stop():
    jitter = [at(k * 300, 55.0 + (0.0003 if k % 2 else 0.0), 14.0) for k in range(20)]
    assert len(detect_stops(jitter)) == 1


def test_no_stops_gives_one_piece():
    track = moving(0, 30)
    assert segment(track, detect_stops(track)) == [track]


def test_mid_track_stop_gives_two_pieces():
    leg1 = moving(0, 20)
    end = leg1[-1].position
    dwell = parked(leg1[-1].timestamp + 60, 7200, lat=end.lat_deg + 0.01, lon=end.lon_deg)
    leg2 = moving(dwell[-1].timestamp + 60, 20, lat0=end.lat_deg + 0.02)
    track = leg1 + dwell + leg2
    stops = detect_stops(track)
    pieces = segment(track, stops)
    assert len(stops) == 1 and pieces == [leg1, leg2]


def test_exit_and_return_six_days_later():
    out = moving(0, 30)
    back = moving(6 * 86400, 30, lat0=56.0, step_km=-0.3)
    result = segment_tracks({1: out + back})
    assert len(result.trips) == 2
    assert result.trips[1].trip_start == 6 * 86400


def test_trip_ids_follow_mmsi_then_start():
    tracks = {7: moving(5000, 12, mmsi=7), 3: moving(0, 12, mmsi=3) + moving(90000, 12, mmsi=3)}
    trips = segment_tracks(tracks).trips
    assert [(t.trip_id, t.mmsi, t.trip_start) for t in trips] == [(1, 3, 0), (2, 3, 90000), (3, 7, 5000)]


class TestFilter:
    def test_short_length_dropped(self):
        t = Trajectory(1, 1, moving(0, 20, step_km=0.05 / 19))
        assert t.length_km == pytest.approx(0.05, rel=1e-3)
        assert filter_trips([t]) == []

    def test_normal_trip_kept(self):
        t = Trajectory(1, 1, moving(0, 50, step_km=5 / 49))
        assert filter_trips([t]) == [t]

    def test_too_few_points(self):
        t = Trajectory(1, 1, moving(0, 3, step_km=2.0))
        assert filter_trips([t]) == []


def test_params_must_be_positive():
    with pytest.raises(ValueError):
        SegmentationParams(stop_radius_m=0)


# random tracks assembled from moving legs, dwells and reporting gaps
leg = st.tuples(
    st.sampled_from(["move", "dwell", "gap"]),
    st.integers(2, 25),
    st.integers(30, 900),
)


def build_track(legs):
    recs, t, lat, lon = [], 1, 55.0, 14.0
    for kind, n, dt in legs:
        for _ in range(n):
            if kind == "move":
                lat += 0.2 / KM_PER_DEG_LAT
            elif kind == "dwell":
                lon += 1e-6
            recs.append(at(t, lat, lon))
            t += dt
        if kind == "gap":
            t += 4000
            lat += 0.05
    return recs


@settings(max_examples=150, deadline=None)
@given(st.lists(leg, min_size=1, max_size=8))
def test_partition_and_no_internal_stops(legs):
    track = build_track(legs)
    stops = detect_stops(track)
    pieces = segment(track, stops)
    stop_ts = [track[k].timestamp for s in stops for k in range(s.start_index, s.end_index + 1)]
    trip_ts = [r.timestamp for p in pieces for r in p]
    assert sorted(stop_ts + trip_ts) == [r.timestamp for r in track]
    assert len(set(stop_ts + trip_ts)) == len(track)
    for p in pieces:
        assert detect_stops(p) == []
    for s in stops:
        anchor = track[s.start_index].position
        assert s.duration_s >= P.stop_min_duration_s
        for k in range(s.start_index, s.end_index + 1):
            assert haversine_km(anchor, track[k].position) * 1000 <= P.stop_radius_m
    again = segment(track, detect_stops(track))
    assert again == pieces
