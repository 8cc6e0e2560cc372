"""Directed road graph with per-edge legal speed, length and popularity."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .geo import GeoPoint, bearing_deg, classify_turn, haversine_km

VertexId = int
EdgeKey = tuple[int, int]

NODES_HEADER = ["id", "lat", "lon"]
EDGES_HEADER = ["from", "to", "legal_speed_kmh", "length_km"]
POPULARITY_HEADER = ["from", "to", "popularity"]
CLASSES_HEADER = ["from", "to", "road_class"]


class GraphError(ValueError):
    """Raised for malformed graphs, unknown vertices and invalid paths."""


@dataclass(frozen=True)
class Vertex:
    id: VertexId
    location: GeoPoint


@dataclass(frozen=True)
class Edge:
    source: VertexId
    target: VertexId
    length_km: float
    legal_speed_kmh: float
    popularity: float = 0.0
    road_class: str | None = None

    @property
    def key(self) -> EdgeKey:
        return (self.source, self.target)


@dataclass(frozen=True)
class GraphBounds:
    min_road_km: float
    max_road_km: float
    max_turn_km: float

    def __post_init__(self):
        if not 0 < self.min_road_km <= self.max_road_km:
            raise ValueError("bounds require 0 < min_road_km <= max_road_km")
        if self.max_turn_km < self.min_road_km:
            raise ValueError("bounds require min_road_km <= max_turn_km")


class RoadGraph:
    """Immutable directed road network.

    Successor lists are ordered by destination id so that every search over
    the graph is reproducible.
    """

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[Edge]):
        self._vertices: dict[VertexId, Vertex] = {}
        for v in vertices:
            if v.id in self._vertices:
                raise GraphError(f"duplicate vertex id {v.id}")
            if v.id < 0:
                raise GraphError(f"vertex id must be non-negative, got {v.id}")
            self._vertices[v.id] = v
        self._edges: dict[EdgeKey, Edge] = {}
        out: dict[VertexId, list[Edge]] = {vid: [] for vid in self._vertices}
        for e in edges:
            if e.source not in self._vertices or e.target not in self._vertices:
                raise GraphError(f"edge {e.source}->{e.target} references an unknown vertex")
            if e.key in self._edges:
                raise GraphError(f"duplicate edge {e.source}->{e.target}")
            if not e.length_km > 0 or not e.legal_speed_kmh > 0 or e.popularity < 0:
                raise GraphError(
                    f"edge {e.source}->{e.target} needs length > 0, speed > 0, popularity >= 0"
                )
            self._edges[e.key] = e
            out[e.source].append(e)
        self._succ = {vid: tuple(sorted(lst, key=lambda e: e.target)) for vid, lst in out.items()}
        self._bearings: dict[EdgeKey, float] = {}

    def __contains__(self, vid: object) -> bool:
        return vid in self._vertices

    def __len__(self) -> int:
        return len(self._vertices)

    @property
    def vertices(self) -> Mapping[VertexId, Vertex]:
        return self._vertices

    @property
    def edges(self) -> Mapping[EdgeKey, Edge]:
        return self._edges

    def vertex(self, vid: VertexId) -> Vertex:
        try:
            return self._vertices[vid]
        except KeyError:
            raise GraphError(f"unknown vertex {vid}") from None

    def location(self, vid: VertexId) -> GeoPoint:
        return self.vertex(vid).location

    def edge(self, u: VertexId, v: VertexId) -> Edge:
        try:
            return self._edges[(u, v)]
        except KeyError:
            raise GraphError(f"no edge {u}->{v}") from None

    def successors(self, v: VertexId) -> tuple[Edge, ...]:
        try:
            return self._succ[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v}") from None

    def edge_bearing(self, u: VertexId, v: VertexId) -> float:
        key = (u, v)
        b = self._bearings.get(key)
        if b is None:
            self.edge(u, v)
            b = bearing_deg(self.location(u), self.location(v))
            self._bearings[key] = b
        return b

    def with_popularity(self, popularity: Mapping[EdgeKey, float]) -> "RoadGraph":
        """Copy of the graph whose edges carry ``popularity`` (missing keys -> 0)."""
        unknown = set(popularity) - set(self._edges)
        if unknown:
            u, v = sorted(unknown)[0]
            raise GraphError(f"popularity given for unknown edge {u}->{v}")
        edges = [replace(e, popularity=float(popularity.get(k, 0.0))) for k, e in self._edges.items()]
        return RoadGraph(self._vertices.values(), edges)

    def with_road_classes(self, classes: Mapping[EdgeKey, str]) -> "RoadGraph":
        edges = [replace(e, road_class=classes.get(k, e.road_class)) for k, e in self._edges.items()]
        return RoadGraph(self._vertices.values(), edges)

    def validate(self, bounds: GraphBounds) -> None:
        bad = [
            k for k, e in sorted(self._edges.items())
            if not bounds.min_road_km <= e.length_km <= bounds.max_road_km
        ]
        if bad:
            listed = ", ".join(f"{u}->{v}" for u, v in bad[:20])
            raise GraphError(f"{len(bad)} edges violate road length bounds: {listed}")


def _path_edges(g: RoadGraph, path: Sequence[VertexId]) -> list[Edge]:
    edges = []
    for u, v in zip(path, path[1:]):
        e = g.edges.get((u, v))
        if e is None:
            raise GraphError(f"path gap: no edge {u}->{v}")
        edges.append(e)
    return edges


def path_distance_km(g: RoadGraph, path: Sequence[VertexId]) -> float:
    if not path:
        raise GraphError("empty path")
    g.vertex(path[0])
    total = 0.0
    for e in _path_edges(g, path):
        total += e.length_km
    return total


def path_avg_legal_speed_kmh(g: RoadGraph, path: Sequence[VertexId]) -> float:
    # Unweighted mean over edges, not a length-weighted one.
    if len(path) < 2:
        raise GraphError("average speed needs a path of at least 2 vertices")
    edges = _path_edges(g, path)
    return sum(e.legal_speed_kmh for e in edges) / len(edges)


def path_avg_popularity(g: RoadGraph, path: Sequence[VertexId]) -> float:
    if len(path) < 2:
        raise GraphError("average popularity needs a path of at least 2 vertices")
    edges = _path_edges(g, path)
    return sum(e.popularity for e in edges) / len(edges)


def turn_count(g: RoadGraph, path: Sequence[VertexId], min_angle_deg: float = 60.0) -> int:
    _path_edges(g, path)
    count = 0
    for a, b, c in zip(path, path[1:], path[2:]):
        tc = classify_turn(g.edge_bearing(a, b), g.edge_bearing(b, c), min_angle_deg)
        if tc.is_turn:
            count += 1
    return count


# -- CSV formats -----------------------------------------------------------

def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="")
    return source


def _rows(source, header: list[str], what: str):
    f = _open_text(source)
    try:
        reader = csv.reader(f)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != header:
            raise GraphError(f"{what}: expected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            yield lineno, [c.strip() for c in row]
    finally:
        if f is not source:
            f.close()


def _parse_float(text: str, what: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise GraphError(f"{what} line {lineno}: not a number: {text!r}") from None


def _parse_int(text: str, what: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise GraphError(f"{what} line {lineno}: not an integer: {text!r}") from None


def read_nodes(source) -> list[Vertex]:
    out = []
    for lineno, row in _rows(source, NODES_HEADER, "nodes"):
        if len(row) != 3:
            raise GraphError(f"nodes line {lineno}: expected 3 fields")
        vid = _parse_int(row[0], "nodes", lineno)
        try:
            loc = GeoPoint(_parse_float(row[1], "nodes", lineno), _parse_float(row[2], "nodes", lineno))
        except ValueError as exc:
            if isinstance(exc, GraphError):
                raise
            raise GraphError(f"nodes line {lineno}: {exc}") from None
        out.append(Vertex(vid, loc))
    return out


def load_graph(
    nodes_source,
    edges_source,
    bounds: GraphBounds | None = None,
    validate: bool = False,
) -> RoadGraph:
    """Load a graph from the nodes/edges CSV files.

    Missing ``length_km`` values are filled with the haversine distance
    between the endpoints. Popularity starts at zero.
    """
    vertices = read_nodes(nodes_source)
    locs = {v.id: v.location for v in vertices}
    edges = []
    for lineno, row in _rows(edges_source, EDGES_HEADER, "edges"):
        if len(row) != 4:
            raise GraphError(f"edges line {lineno}: expected 4 fields")
        u = _parse_int(row[0], "edges", lineno)
        v = _parse_int(row[1], "edges", lineno)
        if u not in locs or v not in locs:
            raise GraphError(f"edges line {lineno}: edge {u}->{v} references an unknown vertex")
        speed = _parse_float(row[2], "edges", lineno)
        length = _parse_float(row[3], "edges", lineno) if row[3] else haversine_km(locs[u], locs[v])
        edges.append(Edge(u, v, length, speed))
    g = RoadGraph(vertices, edges)
    if validate:
        if bounds is None:
            raise GraphError("validation requested without bounds")
        g.validate(bounds)
    return g


def write_nodes(g: RoadGraph, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(NODES_HEADER)
        for vid in sorted(g.vertices):
            loc = g.vertices[vid].location
            w.writerow([vid, repr(loc.lat_deg), repr(loc.lon_deg)])


def write_edges(g: RoadGraph, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(EDGES_HEADER)
        for key in sorted(g.edges):
            e = g.edges[key]
            w.writerow([e.source, e.target, repr(e.legal_speed_kmh), repr(e.length_km)])


def save_graph(g: RoadGraph, nodes_path, edges_path) -> None:
    write_nodes(g, nodes_path)
    write_edges(g, edges_path)


def _fmt_count(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_popularity(g: RoadGraph, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(POPULARITY_HEADER)
        for key in sorted(g.edges):
            w.writerow([key[0], key[1], _fmt_count(g.edges[key].popularity)])


def read_popularity(source) -> dict[EdgeKey, float]:
    out: dict[EdgeKey, float] = {}
    for lineno, row in _rows(source, POPULARITY_HEADER, "popularity"):
        if len(row) != 3:
            raise GraphError(f"popularity line {lineno}: expected 3 fields")
        key = (_parse_int(row[0], "popularity", lineno), _parse_int(row[1], "popularity", lineno))
        p = _parse_float(row[2], "popularity", lineno)
        if p < 0:
            raise GraphError(f"popularity line {lineno}: negative popularity")
        out[key] = p
    return out


def load_graph_with_popularity(nodes_source, edges_source, popularity_source=None) -> RoadGraph:
    g = load_graph(nodes_source, edges_source)
    if popularity_source is not None:
        g = g.with_popularity(read_popularity(popularity_source))
    return g


def write_road_classes(g: RoadGraph, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CLASSES_HEADER)
        for key in sorted(g.edges):
            w.writerow([key[0], key[1], g.edges[key].road_class or ""])


def read_road_classes(source) -> dict[EdgeKey, str]:
    out = {}
    for lineno, row in _rows(source, CLASSES_HEADER, "road classes"):
        if len(row) != 3:
            raise GraphError(f"road classes line {lineno}: expected 3 fields")
        if row[2]:
            out[(int(row[0]), int(row[1]))] = row[2]
    return out

