import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ubi_attack.geo import (
    GeoPoint,
    TurnKind,
    bearing_deg,
    classify_turn,
    haversine_km,
    point_segment_km,
    point_segment_km_many,
)

lats = st.floats(-89.0, 89.0, allow_nan=False)
lons = st.floats(-179.9, 179.9, allow_nan=False)
points = st.builds(GeoPoint, lats, lons)
angles = st.floats(0.0, 360.0, exclude_max=True, allow_nan=False)

# Independently evaluated haversine/bearing values, frozen before the build.
ONE_DEG_LAT_KM = 111.19492664455873
HALF_CIRCUMFERENCE_KM = 20015.086796020572
DIAG_BEARING = 44.99563645534485
BRUTE_FORCE_SEG_KM = 1.1119492664455874


def test_geopoint_validates_and_normalizes():
    with pytest.raises(ValueError):
        GeoPoint(91.0, 0.0)
    assert GeoPoint(0.0, 180.0).lon_deg == -180.0
    assert GeoPoint(0.0, 190.0).lon_deg == pytest.approx(-170.0)


def test_haversine_examples():
    o = GeoPoint(0, 0)
    assert haversine_km(o, o) == 0.0
    assert haversine_km(o, GeoPoint(1, 0)) == pytest.approx(ONE_DEG_LAT_KM, abs=1e-9)
    assert haversine_km(o, GeoPoint(0, 180)) == pytest.approx(HALF_CIRCUMFERENCE_KM, abs=1e-6)
    assert HALF_CIRCUMFERENCE_KM == pytest.approx(math.pi * 6371.0)


def test_point_segment_examples():
    s, e = GeoPoint(0, 0), GeoPoint(0, 0.01)
    assert point_segment_km(GeoPoint(0, 0.005), s, e) == pytest.approx(0.0, abs=1e-12)
    assert point_segment_km(s, s, e) == 0.0
    assert point_segment_km(GeoPoint(0.01, 0.005), s, e) == pytest.approx(BRUTE_FORCE_SEG_KM, rel=1e-6)


def test_point_segment_degenerate_segment():
    p, s = GeoPoint(0.01, 0.0), GeoPoint(0, 0)
    assert point_segment_km(p, s, s) == pytest.approx(haversine_km(p, s))


def test_bearing_examples():
    o = GeoPoint(0, 0)
    assert bearing_deg(o, GeoPoint(1, 0)) == 0.0
    assert bearing_deg(o, GeoPoint(0, 1)) == 90.0
    assert bearing_deg(o, GeoPoint(1, 1)) == pytest.approx(DIAG_BEARING, abs=1e-9)
    with pytest.raises(ValueError):
        bearing_deg(o, o)


@pytest.mark.parametrize(
    "prev, nxt, angle, kind",
    [
        (0, 45, 45, TurnKind.STRAIGHT),
        (0, 90, 90, TurnKind.RIGHT),
        (90, 0, 90, TurnKind.LEFT),
        (0, 0, 0, TurnKind.STRAIGHT),
        (0, 60, 60, TurnKind.RIGHT),
        (0, 180, 180, TurnKind.RIGHT),
        (350, 20, 30, TurnKind.STRAIGHT),
        (300, 30, 90, TurnKind.RIGHT),
        (30, 300, 90, TurnKind.LEFT),
    ],
)
def test_classify_turn_examples(prev, nxt, angle, kind):
    tc = classify_turn(prev, nxt)
    assert tc.angle_deg == pytest.approx(angle)
    assert tc.kind is kind
    assert tc.is_turn == (kind is not TurnKind.STRAIGHT)


@given(angles, angles)
def test_classify_turn_symmetry(a, b):
    ab, ba = classify_turn(a, b), classify_turn(b, a)
    assert ab.angle_deg == ba.angle_deg
    assert 0.0 <= ab.angle_deg <= 180.0
    assert (ab.kind is TurnKind.STRAIGHT) == (ab.angle_deg < 60.0)
    if ab.kind is TurnKind.RIGHT and ab.angle_deg != 180.0:
        assert ba.kind is TurnKind.LEFT


@given(points, points, points)
def test_haversine_triangle_and_symmetry(a, b, c):
    assert haversine_km(a, b) == pytest.approx(haversine_km(b, a), abs=1e-9)
    assert haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-9


small = st.floats(-0.05, 0.05, allow_nan=False)


@given(st.floats(-60, 60), st.floats(-170, 170), small, small, small, small, small, small)
def test_point_segment_bounded_by_endpoints(lat, lon, a, b, c, d, e, f):
    p = GeoPoint(lat + a, lon + b)
    s = GeoPoint(lat + c, lon + d)
    t = GeoPoint(lat + e, lon + f)
    dist = point_segment_km(p, s, t)
    assert dist >= 0.0
    assert dist <= min(haversine_km(p, s), haversine_km(p, t)) + 1e-9


@settings(max_examples=50)
@given(st.lists(st.tuples(small, small), min_size=1, max_size=5),
       st.lists(st.tuples(small, small, small, small), min_size=1, max_size=5))
def test_vectorized_matches_scalar(pts, segs):
    base_lat, base_lon = 39.9, 116.3
    p = np.array([(base_lat + a, base_lon + b) for a, b in pts])
    s = np.array([(base_lat + a, base_lon + b) for a, b, _, _ in segs])
    e = np.array([(base_lat + c, base_lon + d) for _, _, c, d in segs])
    got = point_segment_km_many(p, s, e)
    for i in range(len(p)):
        for j in range(len(s)):
            want = point_segment_km(GeoPoint(*p[i]), GeoPoint(*s[j]), GeoPoint(*e[j]))
            assert got[i, j] == pytest.approx(want, rel=1e-9, abs=1e-12)
