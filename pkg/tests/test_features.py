import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aistrip.features import (
    MODEL_FEATURES,
    MissingDimsError,
    MissingKinematicsError,
    assemble,
    course_series,
    geotemporal_features,
    kinematic_features,
    parse_feature_table,
    shape_features,
    write_feature_table,
    TABLE_COLUMNS,
)
from aistrip.geo import GeoPoint
from aistrip.records import AisRecord, NavStatus, StaticInfo, VesselDims
from aistrip.segmentation import Trajectory
from oracles import cosine_law_km

STATIC = StaticInfo(ship_type="Cargo", cargo_type="No additional information", dims=VesselDims(160, 40, 15, 15))


def trip(points, sogs=None, cogs=None, static=STATIC, dt=60):
    recs = []
    for k, (lat, lon) in enumerate(points):
        sog = 10.0 if sogs is None else sogs[k]
        cog = None if cogs is None else cogs[k]
        recs.append(AisRecord(1000 + k * dt, 219000001, GeoPoint(lat, lon), NavStatus.UNDER_WAY_USING_ENGINE, sog, cog, static=static))
    return Trajectory(1, 219000001, recs)


class TestShape:
    def test_reference_vessel(self):
        s = shape_features(VesselDims(160, 40, 15, 15))
        assert (s.length_m, s.width_m) == (200, 30)
        assert s.aspect_ratio == pytest.approx(0.15, abs=1e-12)
        assert s.naive_perimeter_m == 460
        assert s.naive_area_m2 == 6000
        assert s.shape_complexity == pytest.approx(52900 / 6000, abs=1e-12)
        assert round(s.shape_complexity, 4) == 8.8167
        assert s.bridge_position_ratio == pytest.approx(0.8, abs=1e-12)

    def test_square_hull_minimum(self):
        s = shape_features(VesselDims(10, 10, 10, 10))
        assert s.shape_complexity == 4.0 and s.aspect_ratio == 1.0

    def test_bridge_at_bow(self):
        assert shape_features(VesselDims(0, 20, 2, 2)).bridge_position_ratio == 0.0

    @pytest.mark.parametrize("dims", [None, VesselDims(0, 0, 5, 5), VesselDims(10, 10, 0, 0)])
    def test_missing_dims(self, dims):
        with pytest.raises(MissingDimsError):
            shape_features(dims)

    @given(st.floats(0, 400), st.floats(0.1, 400), st.floats(0, 60), st.floats(0.1, 60))
    def test_complexity_bound(self, a, b, c, d):
        s = shape_features(VesselDims(a, b, c, d))
        assert s.shape_complexity >= 4 - 1e-12
        assert 0.0 <= s.bridge_position_ratio <= 1.0
        if s.length_m == s.width_m:
            assert s.shape_complexity == pytest.approx(4.0, abs=1e-12)
        elif abs(s.length_m - s.width_m) > 1e-6 * max(s.length_m, s.width_m):
            assert s.shape_complexity > 4.0


line = [(55.0 + 0.01 * k, 14.0) for k in range(5)]


class TestKinematics:
    def test_constant_speed(self):
        k = kinematic_features(trip(line, sogs=[10.0] * 5))
        assert (k.sog_min, k.sog_max, k.sog_mean, k.sog_median, k.sog_std) == (10, 10, 10, 10, 0)

    def test_population_moments(self):
        k = kinematic_features(trip(line[:3], sogs=[8.0, 10.0, 12.0]))
        values = [8.0, 10.0, 12.0]
        mean = sum(values) / 3
        assert k.sog_mean == pytest.approx(mean)
        assert k.sog_median == 10.0
        assert k.sog_std == pytest.approx(math.sqrt(sum((v - mean) ** 2 for v in values) / 3))
        assert k.sog_std == pytest.approx(1.633, abs=5e-4)

    def test_initial_course_east(self):
        k = kinematic_features(trip(line, cogs=[90.0] * 5))
        assert k.init_cos == pytest.approx(0.0, abs=1e-12) and k.init_sin == pytest.approx(1.0)

    def test_missing_cog_uses_bearing(self):
        assert course_series(trip(line)) == pytest.approx([0.0] * 5, abs=1e-9)

    def test_no_speed(self):
        with pytest.raises(MissingKinematicsError):
            kinematic_features(trip(line, sogs=[None] * 5))

    def test_unit_circle(self):
        k = kinematic_features(trip(line, cogs=[37.0, 10, 10, 10, 10]))
        assert k.init_cos ** 2 + k.init_sin ** 2 == pytest.approx(1.0, abs=1e-9)


def east_offset(lat, lon, km):
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if cosine_law_km(lat, lon, lat, lon + mid) < km:
            lo = mid
        else:
            hi = mid
    return lon + (lo + hi) / 2


class TestGeoTemporal:
    def test_straight_two_points(self):
        g = geotemporal_features(trip([(55.0, 14.0), (55.1, 14.2)]))
        assert g.directness_ratio == pytest.approx(1.0, abs=1e-12)

    def test_out_and_back(self):
        g = geotemporal_features(trip([(55.0, 14.0), (55.1, 14.0), (55.0, 14.0)]))
        assert g.endpoint_distance_km == 0.0 and g.directness_ratio == 0.0

    def test_right_angle_3_4_5(self):
        lat1 = 55.0 + math.degrees(3.0 / 6371.0)
        corner = (lat1, 14.0)
        end = (lat1, east_offset(lat1, 14.0, 4.0))
        g = geotemporal_features(trip([(55.0, 14.0), corner, end]))
        assert g.trajectory_length_km == pytest.approx(7.0, rel=1e-6)
        assert g.endpoint_distance_km == pytest.approx(5.0, rel=1e-3)
        assert g.directness_ratio == pytest.approx(5 / 7, abs=1e-3)

    def test_box_and_timing(self):
        g = geotemporal_features(trip([(55.0, 14.0), (55.2, 14.5), (55.1, 13.9)], dt=120))
        assert g.trip_duration_s == 240 and g.n_positions == 3
        assert (g.min_lat, g.max_lat, g.min_lon, g.max_lon) == (55.0, 55.2, 13.9, 14.5)
        assert g.lat_span == pytest.approx(0.2) and g.lon_span == pytest.approx(0.6)
        assert g.total_km2 > 0

    @given(st.lists(st.tuples(st.floats(54.5, 55.5), st.floats(13.0, 15.0)), min_size=2, max_size=15))
    def test_endpoint_not_longer_than_path(self, pts):
        g = geotemporal_features(trip(pts))
        assert g.endpoint_distance_km <= g.trajectory_length_km + 1e-9
        assert 0.0 <= g.directness_ratio <= 1.0


class TestAssemble:
    def test_complete_row(self):
        row = assemble(trip(line))
        d = row.as_dict()
        assert len(MODEL_FEATURES) == 31
        assert all(d[f] is not None for f in MODEL_FEATURES if f in d)
        assert row.cargo_type == "No additional information"
        assert all(np.isfinite(d[c]) for c in TABLE_COLUMNS if isinstance(d[c], float))

    def test_missing_dims_counted(self):
        skips = Counter()
        assert assemble(trip(line, static=StaticInfo(ship_type="Cargo")), skips) is None
        assert skips == {"missing_dims": 1}

    def test_missing_type_counted(self):
        skips = Counter()
        static = StaticInfo(dims=VesselDims(10, 10, 2, 2))
        assert assemble(trip(line, static=static), skips) is None
        assert skips == {"missing_ship_type": 1}
        assert assemble(trip(line, static=static), skips, require_label=False).ship_type is None

    def test_resorting_input_gives_same_row(self):
        t = trip([(55.0, 14.0), (55.05, 14.1), (55.1, 14.3)], sogs=[5.0, 9.0, 7.0])
        shuffled = Trajectory(1, t.mmsi, sorted(reversed(t.records), key=lambda r: r.timestamp))
        assert assemble(t).as_dict() == assemble(shuffled).as_dict()

    def test_table_round_trip(self):
        import io
        buf = io.StringIO()
        write_feature_table(buf, [assemble(trip(line))])
        back = parse_feature_table(buf.getvalue().splitlines())
        assert back[0] == assemble(trip(line)).as_dict()
