import calendar
import time
from collections import Counter

import numpy as np
import pytest

from aistrip.geo import baltic_aoi
from aistrip.synthetic import DEFAULT_TRIPS, RAW_HEADER, FleetConfig, generate_fleet, write_daily_files

SMALL = FleetConfig(seed=3, trips={"Cargo": 6, "Fishing": 4, "HSC": 3}, n_untyped=2)


@pytest.fixture(scope="module")
def fleet():
    return generate_fleet(SMALL)


def test_deterministic(fleet):
    again = generate_fleet(SMALL)
    assert again.rows == fleet.rows and again.truth == fleet.truth


def test_seed_changes_output(fleet):
    other = generate_fleet(FleetConfig(seed=4, trips=SMALL.trips, n_untyped=2))
    assert other.rows != fleet.rows


def test_trip_plan(fleet):
    per_class = Counter()
    for mmsi, n in fleet.trips.items():
        if mmsi not in fleet.untyped and fleet.truth[mmsi] in SMALL.trips:
            per_class[fleet.truth[mmsi]] += n
    # the noise vessel without dimensions adds one Cargo trip
    assert per_class == {"Cargo": 7, "Fishing": 4, "HSC": 3}
    assert len(fleet.untyped) == 2


def test_default_mix_is_imbalanced_ten_to_one():
    target = [DEFAULT_TRIPS[c] for c in ("Cargo", "Tanker", "Passenger", "Fishing", "HSC")]
    assert sum(target) >= 300 and max(target) == 10 * min(target)


def test_vessel_positions_inside_area(fleet):
    ring = baltic_aoi()
    moving = [r for r in fleet.rows if r[5] == "Under way using engine" and r[7] not in ("102.3",)
              and (r[3], r[4]) not in (("62.500000", "5.000000"), ("57.500000", "11.000000"))]
    lat = np.array([float(r[3]) for r in moving])
    lon = np.array([float(r[4]) for r in moving])
    assert ring.contains(lat, lon).all()


def test_rows_in_time_order(fleet):
    ts = [calendar.timegm(time.strptime(r[0], "%d/%m/%Y %H:%M:%S")) for r in fleet.rows]
    assert ts == sorted(ts)


def test_untyped_vessels_never_broadcast_a_type(fleet):
    for r in fleet.rows:
        if int(r[2]) in fleet.untyped:
            assert r[13] in ("", "Undefined")


def test_daily_files(fleet, tmp_path):
    paths = write_daily_files(fleet, tmp_path)
    assert [p.name for p in paths] == sorted(p.name for p in paths)
    lines = [p.read_text().splitlines() for p in paths]
    assert all(ls[0] == ",".join(RAW_HEADER) for ls in lines)
    assert sum(len(ls) - 1 for ls in lines) == len(fleet.rows) + fleet.malformed
