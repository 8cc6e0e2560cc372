"""Edge popularity from GPS trace corpora.

Every GPS fix is credited to the road segment closest to it. A uniform grid
over the graph's bounding box narrows the nearest-segment search; the answer
is always the global minimum, the grid only prunes candidates.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .geo import KM_PER_DEG, GeoPoint, point_segment_km
from .graph import Edge, EdgeKey, RoadGraph

DEFAULT_CUTOFF_KM = 0.5
# Guards the grid lower bound against the spread of the local projections.
_BOUND_SAFETY = 0.9


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class TraceFile:
    name: str
    points: tuple[GeoPoint, ...]


@dataclass(frozen=True)
class TraceCorpus:
    files: tuple[TraceFile, ...] = ()

    @property
    def point_count(self) -> int:
        return sum(len(f.points) for f in self.files)


@dataclass
class PopularityReport:
    points_processed: int = 0
    points_discarded: int = 0
    max_popularity: float = 0.0
    files: int = 0

    def as_dict(self) -> dict:
        return {
            "files": self.files,
            "points_processed": self.points_processed,
            "points_discarded": self.points_discarded,
            "points_mapped": self.points_processed - self.points_discarded,
            "max_popularity": self.max_popularity,
        }


def read_trace_file(path) -> TraceFile:
    path = Path(path)
    pts = []
    try:
        f = open(path, newline="")
    except OSError as exc:
        raise TraceError(f"cannot read trace file {path}: {exc.strerror}") from None
    with f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) not in (2, 3):
                raise TraceError(f"{path}: line {lineno}: expected 'lat,lon[,timestamp]'")
            try:
                pts.append(GeoPoint(float(row[0]), float(row[1])))
            except ValueError as exc:
                raise TraceError(f"{path}: line {lineno}: {exc}") from None
    return TraceFile(path.name, tuple(pts))


def read_corpus(directory) -> TraceCorpus:
    directory = Path(directory)
    if not directory.is_dir():
        raise TraceError(f"trace directory not found: {directory}")
    names = sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith("."))
    return TraceCorpus(tuple(read_trace_file(p) for p in names))


def write_trace_file(trace: TraceFile, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        for p in trace.points:
            w.writerow([repr(p.lat_deg), repr(p.lon_deg)])


@dataclass
class SpatialIndex:
    cell_km: float
    lat0: float
    lon0: float
    kx: float
    row_range: tuple[int, int]
    col_range: tuple[int, int]
    cells: dict[tuple[int, int], tuple[EdgeKey, ...]] = field(default_factory=dict)

    def cell_of(self, p: GeoPoint) -> tuple[int, int]:
        x, y = self.project(p)
        return (math.floor(y / self.cell_km), math.floor(x / self.cell_km))

    def project(self, p: GeoPoint) -> tuple[float, float]:
        return ((p.lon_deg - self.lon0) * self.kx, (p.lat_deg - self.lat0) * KM_PER_DEG)

    def edges_in(self, cell: tuple[int, int]) -> tuple[EdgeKey, ...]:
        return self.cells.get(cell, ())


def build_spatial_index(g: RoadGraph, cell_km: float) -> SpatialIndex:
    """Grid index over the graph's bounding box, padded by one cell.

    Each edge is listed in every cell of its bounding box plus one guard ring.
    """
    if not cell_km > 0:
        raise ValueError(f"cell_km must be positive, got {cell_km}")
    if len(g) == 0 or not g.edges:
        raise ValueError("cannot index an empty graph")
    lats = [v.location.lat_deg for v in g.vertices.values()]
    lons = [v.location.lon_deg for v in g.vertices.values()]
    # East-west scale at the poleward edge keeps projected distances conservative.
    max_abs_lat = max(abs(min(lats)), abs(max(lats)))
    kx = KM_PER_DEG * math.cos(math.radians(max_abs_lat))
    pad_lat = cell_km / KM_PER_DEG
    pad_lon = cell_km / kx if kx > 0 else 0.0
    idx = SpatialIndex(cell_km, min(lats) - pad_lat, min(lons) - pad_lon, kx, (0, 0), (0, 0))
    buckets: dict[tuple[int, int], list[EdgeKey]] = {}
    for key in sorted(g.edges):
        a = g.location(key[0])
        b = g.location(key[1])
        ra, ca = idx.cell_of(a)
        rb, cb = idx.cell_of(b)
        for r in range(min(ra, rb) - 1, max(ra, rb) + 2):
            for c in range(min(ca, cb) - 1, max(ca, cb) + 2):
                buckets.setdefault((r, c), []).append(key)
    rows = [r for r, _ in buckets]
    cols = [c for _, c in buckets]
    idx.row_range = (min(rows), max(rows))
    idx.col_range = (min(cols), max(cols))
    idx.cells = {cell: tuple(keys) for cell, keys in buckets.items()}
    return idx


def _edge_distance(g: RoadGraph, p: GeoPoint, key: EdgeKey) -> float:
    return point_segment_km(p, g.location(key[0]), g.location(key[1]))


def nearest_edge_linear(g: RoadGraph, p: GeoPoint) -> tuple[Edge, float]:
    """Reference nearest-edge search over every edge."""
    best = None
    best_d = math.inf
    for key in sorted(g.edges):
        d = _edge_distance(g, p, key)
        if d < best_d:
            best, best_d = key, d
    return g.edges[best], best_d


def nearest_edge_with_distance(g: RoadGraph, idx: SpatialIndex, p: GeoPoint) -> tuple[Edge, float]:
    r0, c0 = idx.cell_of(p)
    # Chebyshev distance from the query cell to the farthest grid cell.
    far = max(
        abs(r0 - idx.row_range[0]), abs(r0 - idx.row_range[1]),
        abs(c0 - idx.col_range[0]), abs(c0 - idx.col_range[1]),
    )
    seen: set[EdgeKey] = set()
    best: tuple[float, EdgeKey] | None = None
    for ring in range(far + 1):
        for cell in _ring_cells(r0, c0, ring):
            for key in idx.cells.get(cell, ()):
                if key in seen:
                    continue
                seen.add(key)
                cand = (_edge_distance(g, p, key), key)
                if best is None or cand < best:
                    best = cand
        # Edges not yet seen lie at least (ring + 1) cells away.
        if best is not None and best[0] < (ring + 1) * idx.cell_km * _BOUND_SAFETY:
            break
    if best is None:
        return nearest_edge_linear(g, p)
    return g.edges[best[1]], best[0]


def nearest_edge(g: RoadGraph, idx: SpatialIndex, p: GeoPoint) -> Edge:
    """Edge closest to ``p``; equal distances go to the smaller (from, to)."""
    return nearest_edge_with_distance(g, idx, p)[0]


def _ring_cells(r0: int, c0: int, ring: int) -> Iterable[tuple[int, int]]:
    if ring == 0:
        yield (r0, c0)
        return
    for c in range(c0 - ring, c0 + ring + 1):
        yield (r0 - ring, c)
        yield (r0 + ring, c)
    for r in range(r0 - ring + 1, r0 + ring):
        yield (r, c0 - ring)
        yield (r, c0 + ring)


def _count_points(g, idx, points: Sequence[GeoPoint], cutoff_km, use_index) -> tuple[Counter, int]:
    counts: Counter = Counter()
    discarded = 0
    for p in points:
        if use_index:
            edge, d = nearest_edge_with_distance(g, idx, p)
        else:
            edge, d = nearest_edge_linear(g, p)
        if cutoff_km is not None and d > cutoff_km:
            discarded += 1
        else:
            counts[edge.key] += 1
    return counts, discarded


_worker_state: dict = {}


def _init_worker(g, idx, cutoff_km, use_index):
    _worker_state.update(g=g, idx=idx, cutoff=cutoff_km, use_index=use_index)


def _worker_count(points):
    s = _worker_state
    return _count_points(s["g"], s["idx"], points, s["cutoff"], s["use_index"])


def map_popularities(
    g: RoadGraph,
    corpus: TraceCorpus,
    cutoff_km: float | None = DEFAULT_CUTOFF_KM,
    cell_km: float | None = None,
    use_index: bool = True,
    workers: int = 1,
) -> tuple[RoadGraph, PopularityReport]:
    """Count, for every edge, the corpus points whose nearest edge it is.

    Points farther than ``cutoff_km`` from every edge are discarded and
    reported. Counts are merged per file, so the result does not depend on
    file order or on ``workers``.
    """
    report = PopularityReport(files=len(corpus.files))
    total: Counter = Counter()
    if corpus.point_count:
        idx = build_spatial_index(g, cell_km or _default_cell_km(g)) if use_index else None
        chunks = [f.points for f in corpus.files if f.points]
        if workers > 1 and len(chunks) > 1:
            with ProcessPoolExecutor(
                max_workers=workers, initializer=_init_worker,
                initargs=(g, idx, cutoff_km, use_index),
            ) as pool:
                parts = list(pool.map(_worker_count, chunks))
        else:
            parts = [_count_points(g, idx, pts, cutoff_km, use_index) for pts in chunks]
        for counts, discarded in parts:
            total.update(counts)
            report.points_discarded += discarded
        report.points_processed = corpus.point_count
    out = g.with_popularity({k: float(v) for k, v in total.items()})
    report.max_popularity = max((e.popularity for e in out.edges.values()), default=0.0)
    return out, report


def _default_cell_km(g: RoadGraph) -> float:
    lengths = sorted(e.length_km for e in g.edges.values())
    return max(lengths[len(lengths) // 2], 1e-3)

