"""Candidate path enumeration driven by a cornering log.

Three layers:

* :func:`straight_path_finder` walks straight from the end of a path until it
  reaches corners that turn in the requested direction.
* :func:`finding_paths` chains straight legs turn by turn, up to a cap on the
  number of matched turns.
* :func:`getting_popular_paths` raises that cap round by round, drops dead
  ends, and ranks complete candidates by average popularity.

A turn mark sits on the corner vertex. The edge that leaves the corner is part
of the candidate, so the direction of every matched turn is visible in the
vertex sequence. The time of the k-th cornering event is the moment the k-th
corner is reached; the leg between two corners must satisfy
``d < W * dt`` where ``W`` is the unweighted mean legal speed of the leg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from .cornering import CorneringLog, Direction
from .geo import TurnKind, classify_turn
from .graph import GraphError, RoadGraph, path_avg_popularity

_TURN_OF = {Direction.LEFT: TurnKind.LEFT, Direction.RIGHT: TurnKind.RIGHT}


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class CandidatePath:
    vertices: tuple[int, ...]
    turn_marks: tuple[int, ...] = ()
    closed: bool = False
    distance_km: float = 0.0

    @classmethod
    def start(cls, vertex: int) -> "CandidatePath":
        return cls((vertex,))

    @property
    def turns(self) -> int:
        return len(self.turn_marks)

    @property
    def last(self) -> int:
        return self.vertices[-1]

    def __len__(self) -> int:
        return len(self.vertices)

    def extended(self, vertex: int, length_km: float) -> "CandidatePath":
        return CandidatePath(
            self.vertices + (vertex,), self.turn_marks, False, self.distance_km + length_km
        )

    def as_closed(self) -> "CandidatePath":
        return self if self.closed else replace(self, closed=True)

    def as_open(self) -> "CandidatePath":
        return replace(self, closed=False) if self.closed else self

    @property
    def identity(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.vertices, self.turn_marks)


@dataclass(frozen=True)
class SearchParams:
    """Tuning knobs of the search.

    ``h=None`` disables the beam. ``residential_speed_kmh`` only feeds the
    hop-bound diagnostic :meth:`alpha`.
    """

    h: int | None = 2
    m: int = 3
    y_km: float = 10.0
    residential_speed_kmh: float = 50.0
    turn_angle_min_deg: float = 60.0
    reuse: bool = True
    max_turn_km: float | None = None

    def __post_init__(self):
        if self.h is not None and self.h < 1:
            raise ValueError(f"beam width h must be >= 1, got {self.h}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not self.y_km > 0:
            raise ValueError(f"y_km must be positive, got {self.y_km}")
        if not self.residential_speed_kmh > 0:
            raise ValueError("residential_speed_kmh must be positive")
        if self.max_turn_km is not None and not self.max_turn_km > 0:
            raise ValueError("max_turn_km must be positive when set")

    def alpha(self, max_dist_km: float, min_road_km: float) -> int:
        return math.ceil(max_dist_km / min_road_km)

    def alpha_for_interval(self, dt_s: float, min_road_km: float) -> int:
        max_dist = min(self.y_km, self.residential_speed_kmh * dt_s / 3600.0)
        return self.alpha(max_dist, min_road_km)


@dataclass
class SearchStats:
    expansions: int = 0
    reuse_hits: int = 0
    finding_calls: int = 0


def _within_budget(dist_km: float, speed_sum: float, n_edges: int, dt_h: float, y_km: float) -> bool:
    return dist_km < (speed_sum / n_edges) * dt_h and dist_km <= y_km


class _Leg:
    """One straight-leg search: state shared by the recursive expansion."""

    def __init__(self, g, dt_h, turn_dir, params, stats, examined, visited):
        self.g = g
        self.dt_h = dt_h
        self.want = _TURN_OF[turn_dir]
        self.params = params
        self.stats = stats
        self.examined = examined
        self.visited = visited
        self.out: list[CandidatePath] = []

    def expand(self, path: CandidatePath, dist: float, speed_sum: float, pop_sum: float, n: int):
        self.stats.expansions += 1
        g = self.g
        u = path.last
        succ = g.successors(u)
        if not succ:
            self.out.append(path.as_closed())
            return
        prev = g.edge_bearing(path.vertices[-2], u) if len(path) >= 2 else None
        corner_index = len(path) - 1
        opened = []
        blocked = False
        for e in succ:
            s = e.target
            if self.examined is not None:
                self.examined.add(s)
            if s in self.visited:
                blocked = True
                continue
            if prev is not None:
                tc = classify_turn(prev, g.edge_bearing(u, s), self.params.turn_angle_min_deg)
                if tc.is_turn:
                    if tc.kind is self.want:
                        turned = path.extended(s, e.length_km)
                        self.out.append(replace(
                            turned, turn_marks=path.turn_marks + (corner_index,), closed=True
                        ))
                    else:
                        blocked = True
                    continue
            nd = dist + e.length_km
            nw = speed_sum + e.legal_speed_kmh
            if _within_budget(nd, nw, n + 1, self.dt_h, self.params.y_km):
                opened.append((path.extended(s, e.length_km), nd, nw, pop_sum + e.popularity, n + 1))
            else:
                blocked = True
        if blocked:
            self.out.append(path.as_closed())
        if not opened:
            return
        h = self.params.h
        if h is not None and len(opened) > h:
            opened.sort(key=lambda o: (-(o[3] / o[4]), o[1], o[0].last))
            opened = opened[:h]
        for ext, nd, nw, np_, nn in opened:
            self.visited.add(ext.last)
            self.expand(ext, nd, nw, np_, nn)
            self.visited.discard(ext.last)


def _straight_leg(g, dt_h, turn_dir, path, from_turn, params, stats, examined):
    verts = path.vertices
    anchor = len(verts) - 2 if from_turn and len(verts) >= 2 else len(verts) - 1
    dist = speed_sum = pop_sum = 0.0
    n = 0
    for a, b in zip(verts[anchor:], verts[anchor + 1:]):
        e = g.edge(a, b)
        dist += e.length_km
        speed_sum += e.legal_speed_kmh
        pop_sum += e.popularity
        n += 1
    if n and not _within_budget(dist, speed_sum, n, dt_h, params.y_km):
        return [path.as_closed()]
    leg = _Leg(g, dt_h, turn_dir, params, stats, examined, set(verts))
    leg.expand(path.as_open(), dist, speed_sum, pop_sum, n)
    return leg.out


def straight_path_finder(
    g: RoadGraph,
    dt_s: float,
    turn_dir: Direction,
    path: CandidatePath,
    from_turn: bool,
    params: SearchParams,
    stats: SearchStats | None = None,
) -> list[CandidatePath]:
    """Closed continuations of ``path`` that go straight until a matching corner.

    With ``from_turn`` the last edge of ``path`` is the turn just taken, so it
    is charged to this leg's time budget. Returned paths either end with the
    edge leaving a corner that turns toward ``turn_dir`` (the corner carries a
    new turn mark) or stop where no admissible extension exists.
    """
    if path.last not in g:
        raise GraphError(f"unknown vertex {path.last}")
    if not dt_s > 0:
        raise ValueError(f"dt_s must be positive, got {dt_s}")
    if path.closed:
        raise SearchError("closed paths cannot be extended")
    return _straight_leg(
        g, dt_s / 3600.0, turn_dir, path, from_turn, params, stats or SearchStats(), None
    )


@dataclass
class _MemoEntry:
    prefix: frozenset
    examined: frozenset
    suffixes: list = field(default_factory=list)


def _graft(g: RoadGraph, path: CandidatePath, suffix) -> CandidatePath:
    verts, marks, closed = suffix
    out = path
    for v in verts:
        out = out.extended(v, g.edge(out.last, v).length_km)
    base = len(path)
    return replace(out, turn_marks=path.turn_marks + tuple(base + m for m in marks), closed=closed)


def _suffix(path: CandidatePath, result: CandidatePath):
    # Marks are stored relative to the prefix length so they survive grafting
    # onto a prefix of a different length.
    n = len(path)
    return (result.vertices[n:], tuple(m - n for m in result.turn_marks[path.turns:]), result.closed)


def _finding(g, trip_time_s, path, mc, m_cap, params, stats, memo):
    stats.finding_calls += 1
    k = path.turns
    key = None
    if memo is not None and k > 0 and len(path) >= 2:
        key = (path.vertices[-2], path.last, k, m_cap, trip_time_s)
        prefix = frozenset(path.vertices)
        for entry in memo.get(key, ()):
            # A cached subtree is valid when every vertex it looked at has the
            # same visited status under the new prefix.
            if all((q in entry.prefix) == (q in prefix) for q in entry.examined):
                stats.reuse_hits += 1
                return [_graft(g, path, s) for s in entry.suffixes], entry.examined
    examined: set = set()
    results: list[CandidatePath] = []
    event = mc[k]
    dt = event.t_offset_s - trip_time_s
    if dt > 0:
        legs = _straight_leg(g, dt / 3600.0, event.direction, path, True, params, stats, examined)
        for c in legs:
            if c.turns == k:
                continue
            if c.turns == len(mc):
                results.append(c.as_closed())
            elif c.turns >= m_cap:
                results.append(c.as_open())
            else:
                sub, sub_examined = _finding(
                    g, event.t_offset_s, c.as_open(), mc, m_cap, params, stats, memo
                )
                examined |= sub_examined
                results.extend(sub)
    if not results:
        results = [path.as_closed()]
    if key is not None:
        memo.setdefault(key, []).append(
            _MemoEntry(prefix, frozenset(examined), [_suffix(path, r) for r in results])
        )
    return results, examined


def finding_paths(
    g: RoadGraph,
    trip_time_s: float,
    path: CandidatePath,
    mc: CorneringLog,
    m_cap: int,
    params: SearchParams,
    stats: SearchStats | None = None,
    memo: dict | None = None,
) -> list[CandidatePath]:
    """Extend ``path`` turn by turn until it holds ``m_cap`` marks or completes ``mc``.

    ``trip_time_s`` is the time of the path's last matched event (0 at the
    start). Completed paths come back closed, paths stopped at the cap come
    back open, and a path with no continuation comes back closed as-is.
    Pass a dict as ``memo`` to reuse continuations already searched from the
    same corner.
    """
    if path.turns >= len(mc):
        raise SearchError(f"path already holds {path.turns} marks for a {len(mc)}-event log")
    if path.last not in g:
        raise GraphError(f"unknown vertex {path.last}")
    if m_cap < 1:
        raise ValueError("m_cap must be >= 1")
    results, _ = _finding(g, trip_time_s, path.as_open(), mc, m_cap, params, stats or SearchStats(), memo)
    return results


def ranking_key(g: RoadGraph, path: CandidatePath):
    return (-path_avg_popularity(g, path.vertices), path.distance_km, path.vertices)


def same_direction_gaps_ok(g: RoadGraph, path: CandidatePath, mc: CorneringLog, max_turn_km: float) -> bool:
    """Check the optional bound on the distance between same-direction turns."""
    cum = [0.0]
    for a, b in zip(path.vertices, path.vertices[1:]):
        cum.append(cum[-1] + g.edge(a, b).length_km)
    marks = path.turn_marks
    for i in range(1, len(marks)):
        if mc[i].direction is mc[i - 1].direction and cum[marks[i]] - cum[marks[i - 1]] > max_turn_km:
            return False
    return True


def getting_popular_paths(
    g: RoadGraph,
    start: int,
    mc: CorneringLog,
    params: SearchParams,
    stats: SearchStats | None = None,
) -> list[CandidatePath]:
    """All complete candidates from ``start``, most popular first.

    Round ``c`` lets :func:`finding_paths` reach ``m * c`` marks in total;
    dead ends are dropped between rounds. Ties in average popularity go to
    the shorter path, then to the lexicographically smaller vertex sequence.
    """
    if start not in g:
        raise GraphError(f"start vertex {start} is not in the graph")
    stats = stats or SearchStats()
    memo: dict | None = {} if params.reuse else None
    total = len(mc)
    c = 1
    paths, _ = _finding(g, 0, CandidatePath.start(start), mc, params.m * c, params, stats, memo)
    c += 1
    while any(not p.closed for p in paths):
        paths = [p for p in paths if not (p.closed and p.turns < total)]
        nxt: list[CandidatePath] = []
        for p in paths:
            if p.closed:
                nxt.append(p)
            else:
                sub, _ = _finding(
                    g, mc[p.turns - 1].t_offset_s, p, mc, params.m * c, params, stats, memo
                )
                nxt.extend(sub)
        paths = nxt
        c += 1
    done = _unique(p for p in paths if p.turns == total)
    if params.max_turn_km is not None:
        done = [p for p in done if same_direction_gaps_ok(g, p, mc, params.max_turn_km)]
    done.sort(key=lambda p: ranking_key(g, p))
    return done


def _unique(paths: Iterable[CandidatePath]) -> list[CandidatePath]:
    seen = {}
    for p in paths:
        seen.setdefault(p.identity, p)
    return list(seen.values())
