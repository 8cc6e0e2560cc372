"""Ground-truth trips: drive a known route and record what a UBI insurer sees."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from ..cornering import CorneringLog, Direction, TripAttributes, TurnEvent
from ..geo import TurnKind, classify_turn
from ..graph import GraphError, RoadGraph
from .world import HIGHWAY, RESIDENTIAL


class SimulationError(ValueError):
    pass


class TripType(str, Enum):
    RESIDENTIAL_TO_HIGHWAY = "ResidentialToHighway"
    RESIDENTIAL_HIGHWAY_RESIDENTIAL = "ResidentialHighwayResidential"
    STARTS_FROM_HIGHWAY = "StartsFromHighway"
    ALL_RESIDENTIAL = "AllResidential"


@dataclass(frozen=True)
class GroundTruthTrip:
    route: tuple[int, ...]
    speeds_kmh: tuple[float, ...]
    mc: CorneringLog
    trip: TripAttributes
    road_classes: tuple[str | None, ...]
    distance_km: float
    corners: tuple[int, ...]


def _ceil_seconds(t: float) -> int:
    # Absorb float noise such as 99.99999999999999 for an exact 100 s.
    return math.ceil(t - 1e-9)


def simulate_trip(
    g: RoadGraph,
    route: Sequence[int],
    speeds_kmh: float | Sequence[float] | None = None,
    start_delay_s: float = 0.0,
    turn_delay_s: float = 0.0,
    turn_angle_min_deg: float = 60.0,
) -> GroundTruthTrip:
    """Drive ``route`` and derive its cornering log and trip attributes.

    ``speeds_kmh`` is one speed for every edge, a per-edge sequence, or
    ``None`` for legal speed. Each cornering event is stamped (rounded up to a
    whole second) when its corner vertex is reached. ``start_delay_s`` and
    ``turn_delay_s`` add time for pulling away and for slowing through each
    corner.
    """
    route = tuple(route)
    if len(route) < 2:
        raise SimulationError("a route needs at least one edge")
    if len(set(route)) != len(route):
        raise SimulationError("route revisits a vertex")
    try:
        edges = [g.edge(a, b) for a, b in zip(route, route[1:])]
    except GraphError as exc:
        raise SimulationError(f"invalid route: {exc}") from None
    if speeds_kmh is None:
        speeds = [e.legal_speed_kmh for e in edges]
    elif isinstance(speeds_kmh, (int, float)):
        speeds = [float(speeds_kmh)] * len(edges)
    else:
        speeds = [float(s) for s in speeds_kmh]
        if len(speeds) != len(edges):
            raise SimulationError("need one speed per edge")
    for e, s in zip(edges, speeds):
        if not 0 < s <= e.legal_speed_kmh:
            raise SimulationError(
                f"speed {s} on {e.source}->{e.target} outside (0, {e.legal_speed_kmh}]"
            )

    corners = []
    directions = []
    for i in range(1, len(route) - 1):
        tc = classify_turn(
            g.edge_bearing(route[i - 1], route[i]),
            g.edge_bearing(route[i], route[i + 1]),
            turn_angle_min_deg,
        )
        if tc.is_turn:
            corners.append(i)
            directions.append(Direction.RIGHT if tc.kind is TurnKind.RIGHT else Direction.LEFT)
    if not corners:
        raise SimulationError("route has no cornering events; a cornering log needs at least one")

    arrival = [0.0]
    clock = start_delay_s
    corner_set = set(corners)
    for i, (e, s) in enumerate(zip(edges, speeds)):
        if i in corner_set:
            clock += turn_delay_s
        clock += e.length_km / s * 3600.0
        arrival.append(clock)
    events = []
    for i, d in zip(corners, directions):
        t = _ceil_seconds(arrival[i])
        if events and t <= events[-1].t_offset_s:
            raise SimulationError("two corners fall in the same second; route too dense")
        events.append(TurnEvent(d, t))
    total_time = max(_ceil_seconds(arrival[-1]), events[-1].t_offset_s, 1)
    distance = 0.0
    for e in edges:
        distance += e.length_km
    trip = TripAttributes(route[0], distance / (total_time / 3600.0), total_time)
    return GroundTruthTrip(
        route=route,
        speeds_kmh=tuple(speeds),
        mc=CorneringLog(tuple(events)),
        trip=trip,
        road_classes=tuple(e.road_class for e in edges),
        distance_km=distance,
        corners=tuple(corners),
    )


def classify_trip_type(truth: GroundTruthTrip) -> TripType:
    classes = truth.road_classes
    if not classes or any(c not in (HIGHWAY, RESIDENTIAL) for c in classes):
        raise SimulationError("trip edges lack road-class labels")
    if classes[0] == HIGHWAY:
        return TripType.STARTS_FROM_HIGHWAY
    if HIGHWAY not in classes:
        return TripType.ALL_RESIDENTIAL
    if classes[-1] == HIGHWAY:
        return TripType.RESIDENTIAL_TO_HIGHWAY
    return TripType.RESIDENTIAL_HIGHWAY_RESIDENTIAL
