"""Exhaustive enumeration of routes consistent with a cornering log.

The rules are checked declaratively on whole vertex sequences, without the
leg-by-leg machinery or the beam of :mod:`ubi_attack.search`:

* the route is simple and starts at ``start``;
* its corners (interior vertices whose heading change is at least the turn
  angle) match the log one-for-one, in order and direction;
* the route ends with the edge that leaves the last corner;
* along each leg, every prefix ending at a vertex up to the leg's corner is
  shorter than mean legal speed x time between events, and at most ``y_km``.
  The first leg starts at ``start``; later legs start at the previous corner.
"""

from __future__ import annotations

import math

from ..cornering import CorneringLog, Direction
from ..geo import TurnKind, bearing_deg, classify_turn
from ..graph import RoadGraph

_DIRECTION = {TurnKind.LEFT: Direction.LEFT, TurnKind.RIGHT: Direction.RIGHT}


class OracleOverflow(RuntimeError):
    pass


def oracle_enumerate(
    g: RoadGraph,
    start: int,
    mc: CorneringLog,
    band: tuple[float, float] | None = None,
    turn_angle_min_deg: float = 60.0,
    y_km: float = math.inf,
    max_expansions: int = 2_000_000,
    band_tol_km: float = 1e-9,
) -> set[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Return {(vertices, corner_indices)} for every admissible route."""
    n_events = len(mc)
    times = [e.t_offset_s for e in mc]
    found: set = set()
    expansions = 0

    def heading(a, b):
        la, lb = g.vertices[a].location, g.vertices[b].location
        return bearing_deg(la, lb)

    def leg_ok(route, leg_start, leg_no):
        dt = times[leg_no] - (times[leg_no - 1] if leg_no else 0)
        dist = 0.0
        speeds = 0.0
        for a, b in zip(route[leg_start:], route[leg_start + 1:]):
            e = g.edges[(a, b)]
            dist += e.length_km
            speeds += e.legal_speed_kmh
        n = len(route) - 1 - leg_start
        return dist < (speeds / n) * (dt / 3600.0) and dist <= y_km

    def total_length(route):
        d = 0.0
        for a, b in zip(route, route[1:]):
            d += g.edges[(a, b)].length_km
        return d

    def dfs(route, corners):
        nonlocal expansions
        expansions += 1
        if expansions > max_expansions:
            raise OracleOverflow(
                f"more than {max_expansions} expansions; use a smaller instance"
            )
        here = route[-1]
        for (_, nxt) in sorted(k for k in g.edges if k[0] == here):
            if nxt in route:
                continue
            new_corners = corners
            if len(route) >= 2:
                tc = classify_turn(
                    heading(route[-2], here), heading(here, nxt), turn_angle_min_deg
                )
                if tc.is_turn:
                    if len(corners) == n_events or _DIRECTION[tc.kind] is not mc[len(corners)].direction:
                        continue
                    new_corners = corners + (len(route) - 1,)
            ext = route + (nxt,)
            if len(new_corners) == n_events:
                # Only the edge leaving the final corner may follow it.
                if new_corners[-1] == len(ext) - 2:
                    if band is None or band[0] - band_tol_km <= total_length(ext) <= band[1] + band_tol_km:
                        found.add((ext, new_corners))
                continue
            leg_no = len(new_corners)
            leg_start = new_corners[-1] if new_corners else 0
            if not leg_ok(ext, leg_start, leg_no):
                continue
            dfs(ext, new_corners)

    if start in g:
        dfs((start,), ())
    return found
