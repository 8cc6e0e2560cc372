import random
import sys

import pytest

from ubi_attack.cornering import CorneringLog, Direction, TurnEvent
from ubi_attack.geo import KM_PER_DEG, GeoPoint, haversine_km
from ubi_attack.graph import Edge, RoadGraph, Vertex


def km_point(x_km: float, y_km: float) -> GeoPoint:
    """Point x km east and y km north of (0, 0); near-planar at the equator."""
    return GeoPoint(y_km / KM_PER_DEG, x_km / KM_PER_DEG)


def make_graph(coords, edges, speed=36.0, both=False, pops=None, exact_lengths=True):
    """coords: {id: (x_km, y_km)}; edges: [(u, v)] or [(u, v, speed)]."""
    pops = pops or {}
    locs = {i: km_point(*xy) for i, xy in coords.items()}
    out = []
    for spec in edges:
        u, v = spec[0], spec[1]
        w = spec[2] if len(spec) > 2 else speed
        pairs = [(u, v), (v, u)] if both else [(u, v)]
        for a, b in pairs:
            length = haversine_km(locs[a], locs[b]) if exact_lengths else 1.0
            out.append(Edge(a, b, length, w, pops.get((a, b), 0.0)))
    return RoadGraph([Vertex(i, p) for i, p in locs.items()], out)


def grid_coords(rows, cols, cell=1.0):
    return {r * cols + c: (c * cell, r * cell) for r in range(rows) for c in range(cols)}


def grid_graph(rows, cols, cell=1.0, speed=36.0, pops=None):
    coords = grid_coords(rows, cols, cell)
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return make_graph(coords, edges, speed=speed, both=True, pops=pops)


def log(*pairs) -> CorneringLog:
    return CorneringLog(tuple(TurnEvent(Direction(d), t) for d, t in pairs))


def random_log(rng: random.Random, k: int, lo=10, hi=200) -> CorneringLog:
    ts = sorted(rng.sample(range(lo, hi), k))
    return CorneringLog(tuple(TurnEvent(rng.choice(list(Direction)), t) for t in ts))


@pytest.fixture
def grid3():
    return grid_graph(3, 3)


def random_geometric_graph(rng: random.Random, n: int, k: int = 3, extent_km: float = 3.0, speeds=(30.0, 50.0, 80.0)):
    """Bidirectional graph linking each random point to its k nearest neighbours."""
    coords = {}
    while len(coords) < n:
        xy = (round(rng.uniform(0, extent_km), 3), round(rng.uniform(0, extent_km), 3))
        if xy not in coords.values():
            coords[len(coords)] = xy
    pairs = set()
    for i, (x, y) in coords.items():
        near = sorted((j for j in coords if j != i), key=lambda j: ((coords[j][0] - x) ** 2 + (coords[j][1] - y) ** 2, j))
        for j in near[:k]:
            pairs.add((min(i, j), max(i, j)))
    edges = [(a, b, rng.choice(speeds)) for a, b in sorted(pairs)]
    g = make_graph(coords, edges, both=True)
    return g.with_popularity({key: float(rng.randint(0, 20)) for key in sorted(g.edges)})


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
