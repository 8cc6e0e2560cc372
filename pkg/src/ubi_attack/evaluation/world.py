"""Synthetic road networks and GPS corpora for experiments."""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass

from ..geo import KM_PER_DEG, GeoPoint, classify_turn, haversine_km
from ..graph import Edge, RoadGraph, Vertex
from ..popularity import TraceCorpus, TraceFile

HIGHWAY = "highway"
RESIDENTIAL = "residential"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WorldConfig:
    rows: int = 8
    cols: int = 8
    cell_km: float = 0.5
    jitter: float = 0.08
    highway_every: int = 3
    highway_speed_kmh: float = 80.0
    residential_speed_kmh: float = 40.0
    skew: float = 10.0
    walks: int = 60
    walk_edges: int = 20
    point_spacing_km: float = 0.1
    gps_noise_km: float = 0.01
    origin_lat: float = 39.9
    origin_lon: float = 116.3
    min_road_km: float = 0.05
    max_road_km: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ConfigError(f"grid must be at least 2x2, got {self.rows}x{self.cols}")
        if not self.min_road_km <= self.cell_km <= self.max_road_km:
            raise ConfigError("cell_km must lie within [min_road_km, max_road_km]")
        if not 0 <= self.jitter < 0.25:
            raise ConfigError("jitter must be in [0, 0.25)")
        if self.highway_every < 0 or self.skew <= 0 or self.walks < 0 or self.walk_edges < 0:
            raise ConfigError("highway_every, walks and walk_edges must be >= 0 and skew > 0")
        if self.point_spacing_km <= 0 or self.gps_noise_km < 0:
            raise ConfigError("point spacing must be positive and noise non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


def vertex_id(cfg: WorldConfig, r: int, c: int) -> int:
    return r * cfg.cols + c


def _is_highway_line(cfg: WorldConfig, index: int) -> bool:
    return cfg.highway_every > 0 and index % cfg.highway_every == 1


def build_grid_graph(cfg: WorldConfig, rng: random.Random) -> RoadGraph:
    km_per_deg_lon = KM_PER_DEG * math.cos(math.radians(cfg.origin_lat))
    vertices = []
    for r in range(cfg.rows):
        for c in range(cfg.cols):
            dy = (r + rng.uniform(-cfg.jitter, cfg.jitter)) * cfg.cell_km
            dx = (c + rng.uniform(-cfg.jitter, cfg.jitter)) * cfg.cell_km
            loc = GeoPoint(cfg.origin_lat + dy / KM_PER_DEG, cfg.origin_lon + dx / km_per_deg_lon)
            vertices.append(Vertex(vertex_id(cfg, r, c), loc))
    locs = {v.id: v.location for v in vertices}
    edges = []
    for r in range(cfg.rows):
        for c in range(cfg.cols):
            here = vertex_id(cfg, r, c)
            for dr, dc in ((0, 1), (1, 0)):
                r2, c2 = r + dr, c + dc
                if r2 >= cfg.rows or c2 >= cfg.cols:
                    continue
                there = vertex_id(cfg, r2, c2)
                highway = _is_highway_line(cfg, r) if dr == 0 else _is_highway_line(cfg, c)
                speed = cfg.highway_speed_kmh if highway else cfg.residential_speed_kmh
                cls = HIGHWAY if highway else RESIDENTIAL
                length = haversine_km(locs[here], locs[there])
                edges.append(Edge(here, there, length, speed, 0.0, cls))
                edges.append(Edge(there, here, length, speed, 0.0, cls))
    return RoadGraph(vertices, edges)


def _interpolate(a: GeoPoint, b: GeoPoint, t: float) -> tuple[float, float]:
    return (a.lat_deg + t * (b.lat_deg - a.lat_deg), a.lon_deg + t * (b.lon_deg - a.lon_deg))


def _walk(g: RoadGraph, cfg: WorldConfig, rng: random.Random) -> list[tuple[int, int]]:
    ids = sorted(g.vertices)
    here = rng.choice(ids)
    prev = None
    steps = []
    for _ in range(cfg.walk_edges):
        options = [e for e in g.successors(here) if e.target != prev] or list(g.successors(here))
        if not options:
            break
        weights = [cfg.skew if e.road_class == HIGHWAY else 1.0 for e in options]
        e = rng.choices(options, weights=weights)[0]
        steps.append(e.key)
        prev, here = here, e.target
    return steps


def generate_corpus(g: RoadGraph, cfg: WorldConfig, rng: random.Random) -> TraceCorpus:
    noise_deg = cfg.gps_noise_km / KM_PER_DEG
    files = []
    for w in range(cfg.walks):
        pts = []
        for u, v in _walk(g, cfg, rng):
            a, b = g.location(u), g.location(v)
            n = max(1, int(g.edge(u, v).length_km / cfg.point_spacing_km))
            for i in range(n):
                lat, lon = _interpolate(a, b, (i + 0.5) / n)
                lat += rng.gauss(0.0, noise_deg)
                lon += rng.gauss(0.0, noise_deg)
                pts.append(GeoPoint(round(lat, 7), round(lon, 7)))
        files.append(TraceFile(f"vehicle_{w:04d}.csv", tuple(pts)))
    return TraceCorpus(tuple(files))


def generate_synthetic_world(cfg: WorldConfig) -> tuple[RoadGraph, TraceCorpus]:
    """Perturbed bidirectional grid with highway corridors, plus a trace corpus.

    Every ``highway_every``-th row and column (offset 1) is a highway with a
    higher legal speed; random walks prefer highway edges by ``skew``.
    Identical configs give identical outputs.
    """
    rng = random.Random(cfg.seed)
    g = build_grid_graph(cfg, rng)
    corpus = generate_corpus(g, cfg, random.Random(rng.getrandbits(64)))
    return g, corpus


# -- route sampling ----------------------------------------------------------

def _straight_successor(g: RoadGraph, prev: int, here: int, angle: float = 60.0):
    b = g.edge_bearing(prev, here)
    best = None
    for e in g.successors(here):
        if e.target == prev:
            continue
        tc = classify_turn(b, g.edge_bearing(here, e.target), angle)
        if not tc.is_turn and (best is None or tc.angle_deg < best[0]):
            best = (tc.angle_deg, e.target)
    return None if best is None else best[1]


def _turn_successors(g: RoadGraph, prev: int, here: int, angle: float = 60.0):
    b = g.edge_bearing(prev, here)
    out = []
    for e in g.successors(here):
        if e.target == prev:
            continue
        tc = classify_turn(b, g.edge_bearing(here, e.target), angle)
        if tc.is_turn and tc.angle_deg < 180.0:
            out.append(e.target)
    return out


def sample_route(
    g: RoadGraph,
    rng: random.Random,
    n_turns: int,
    leg_edges: tuple[int, int] = (1, 4),
    start: int | None = None,
    attempts: int = 200,
    highway_bias: float = 1.0,
) -> list[int] | None:
    """Random simple route with ``n_turns`` corners that ends on the last turn edge.

    Each leg runs straight for a random number of edges in ``leg_edges``. The
    first edge and every turn prefer highway edges by ``highway_bias``, the
    same preference the corpus walks use. Returns ``None`` when no route is
    found within ``attempts`` tries.
    """
    if not highway_bias > 0:
        raise ConfigError("highway_bias must be positive")

    def pick(edges):
        weights = [highway_bias if e.road_class == HIGHWAY else 1.0 for e in edges]
        return rng.choices(edges, weights=weights)[0].target

    ids = sorted(g.vertices)
    for _ in range(attempts):
        here = start if start is not None else rng.choice(ids)
        succ = g.successors(here)
        if not succ:
            continue
        route = [here, pick(succ)]
        ok = True
        for leg in range(n_turns):
            for _ in range(rng.randint(*leg_edges) - 1):
                nxt = _straight_successor(g, route[-2], route[-1])
                if nxt is None or nxt in route:
                    break
                route.append(nxt)
            options = [v for v in _turn_successors(g, route[-2], route[-1]) if v not in route]
            if not options:
                ok = False
                break
            route.append(pick([g.edge(route[-1], v) for v in options]))
        if ok:
            return route
    return None


def sample_walk_route(
    g: RoadGraph,
    rng: random.Random,
    n_turns: int,
    highway_bias: float = 1.0,
    max_edges: int = 16,
    attempts: int = 500,
) -> list[int] | None:
    """Route driven like a corpus walk: every step prefers highway edges by ``highway_bias``.

    The walk never revisits a vertex and stops on the edge leaving its
    ``n_turns``-th corner. Returns ``None`` when no such route of at most
    ``max_edges`` edges is found within ``attempts`` tries.
    """
    if not highway_bias > 0:
        raise ConfigError("highway_bias must be positive")
    ids = sorted(g.vertices)
    for _ in range(attempts):
        route = [rng.choice(ids)]
        turns = 0
        while len(route) <= max_edges:
            here = route[-1]
            options = [e for e in g.successors(here) if e.target not in route]
            if not options:
                break
            weights = [highway_bias if e.road_class == HIGHWAY else 1.0 for e in options]
            nxt = rng.choices(options, weights=weights)[0].target
            if len(route) >= 2 and classify_turn(g.edge_bearing(route[-2], here), g.edge_bearing(here, nxt)).is_turn:
                turns += 1
            route.append(nxt)
            if turns == n_turns:
                return route
    return None
