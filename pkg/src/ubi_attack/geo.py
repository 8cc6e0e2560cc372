"""Spherical geometry helpers: distances, bearings and turn classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

EARTH_RADIUS_KM = 6371.0
KM_PER_DEG = EARTH_RADIUS_KM * math.pi / 180.0
TURN_ANGLE_MIN_DEG = 60.0


@dataclass(frozen=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        lat, lon = float(self.lat_deg), float(self.lon_deg)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise ValueError(f"non-finite coordinate ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon < 180.0:
            lon = (lon + 180.0) % 360.0 - 180.0
        object.__setattr__(self, "lat_deg", lat)
        object.__setattr__(self, "lon_deg", lon)


class TurnKind(str, Enum):
    STRAIGHT = "Straight"
    LEFT = "TurnLeft"
    RIGHT = "TurnRight"


@dataclass(frozen=True)
class TurnClass:
    angle_deg: float
    kind: TurnKind

    @property
    def is_turn(self) -> bool:
        return self.kind is not TurnKind.STRAIGHT


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    phi1 = math.radians(a.lat_deg)
    phi2 = math.radians(b.lat_deg)
    dphi = phi2 - phi1
    dlmb = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(1.0, h)))


def _wrap_dlon(dlon: float) -> float:
    return (dlon + 180.0) % 360.0 - 180.0


def point_segment_km(p: GeoPoint, seg_start: GeoPoint, seg_end: GeoPoint) -> float:
    """Distance from ``p`` to the closest point of the segment.

    The projection parameter is found in an equirectangular plane centred on
    the segment; the final distance is the haversine to the clamped point.
    """
    if seg_start == seg_end:
        return haversine_km(p, seg_start)
    lat0 = math.radians((seg_start.lat_deg + seg_end.lat_deg) / 2.0)
    kx = math.cos(lat0)
    bx = _wrap_dlon(seg_end.lon_deg - seg_start.lon_deg) * kx
    by = seg_end.lat_deg - seg_start.lat_deg
    px = _wrap_dlon(p.lon_deg - seg_start.lon_deg) * kx
    py = p.lat_deg - seg_start.lat_deg
    denom = bx * bx + by * by
    if denom == 0.0:
        return haversine_km(p, seg_start)
    t = min(1.0, max(0.0, (px * bx + py * by) / denom))
    q = GeoPoint(
        seg_start.lat_deg + t * (seg_end.lat_deg - seg_start.lat_deg),
        seg_start.lon_deg + t * _wrap_dlon(seg_end.lon_deg - seg_start.lon_deg),
    )
    return haversine_km(p, q)


def point_segment_km_many(points: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Vectorised :func:`point_segment_km` over all (point, segment) pairs.

    ``points`` is (N, 2) and ``starts``/``ends`` are (M, 2) arrays of
    (lat, lon) degrees. Returns an (N, M) distance matrix in km.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    starts = np.asarray(starts, dtype=float).reshape(-1, 2)
    ends = np.asarray(ends, dtype=float).reshape(-1, 2)
    dlon_seg = (ends[:, 1] - starts[:, 1] + 180.0) % 360.0 - 180.0
    kx = np.cos(np.radians((starts[:, 0] + ends[:, 0]) / 2.0))
    bx = dlon_seg * kx
    by = ends[:, 0] - starts[:, 0]
    px = ((points[:, None, 1] - starts[None, :, 1] + 180.0) % 360.0 - 180.0) * kx[None, :]
    py = points[:, None, 0] - starts[None, :, 0]
    denom = bx * bx + by * by
    safe = np.where(denom == 0.0, 1.0, denom)
    t = np.where(denom == 0.0, 0.0, (px * bx + py * by) / safe)
    t = np.clip(t, 0.0, 1.0)
    qlat = starts[None, :, 0] + t * by[None, :]
    qlon = starts[None, :, 1] + t * dlon_seg[None, :]
    phi1 = np.radians(points[:, None, 0])
    phi2 = np.radians(qlat)
    dlmb = np.radians(qlon - points[:, None, 1])
    h = np.sin((phi2 - phi1) / 2) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlmb / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(1.0, h)))


def bearing_deg(frm: GeoPoint, to: GeoPoint) -> float:
    """Initial great-circle bearing, clockwise from north, in [0, 360)."""
    if frm == to:
        raise ValueError("undefined direction: points coincide")
    phi1 = math.radians(frm.lat_deg)
    phi2 = math.radians(to.lat_deg)
    dlmb = math.radians(to.lon_deg - frm.lon_deg)
    y = math.sin(dlmb) * math.cos(phi2)
    x = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlmb)
    deg = math.degrees(math.atan2(y, x)) % 360.0
    return 0.0 if deg >= 360.0 else deg


def classify_turn(
    prev_bearing: float, next_bearing: float, min_angle_deg: float = TURN_ANGLE_MIN_DEG
) -> TurnClass:
    """Classify the heading change between two consecutive road directions.

    A change of at least ``min_angle_deg`` is a turn. Clockwise changes in
    (0, 180] are right turns, so a U-turn counts as right.
    """
    delta = next_bearing - prev_bearing
    # |a - b| is bit-identical to |b - a|, which keeps the angle symmetric.
    angle = abs(delta)
    if angle > 180.0:
        angle = 360.0 - angle
    if angle < min_angle_deg:
        return TurnClass(angle, TurnKind.STRAIGHT)
    clockwise = 0.0 < delta <= 180.0 or delta <= -180.0
    return TurnClass(angle, TurnKind.RIGHT if clockwise else TurnKind.LEFT)
