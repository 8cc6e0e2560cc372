"""End-to-end path retrieval: candidates, speed filter, ranking."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .cornering import CorneringLog, TripAttributes
from .graph import GraphError, RoadGraph, path_avg_popularity
from .search import CandidatePath, SearchParams, SearchStats, getting_popular_paths

# Slack on the band edges for unit-conversion rounding.
BAND_TOL_KM = 1e-9


@dataclass(frozen=True)
class RankedEntry:
    rank: int
    path: CandidatePath
    avg_popularity: float
    distance_km: float

    def as_dict(self) -> dict:
        return {
            "rank": self.rank,
            "avg_popularity": self.avg_popularity,
            "distance_km": self.distance_km,
            "vertices": list(self.path.vertices),
            "turn_marks": list(self.path.turn_marks),
        }


@dataclass(frozen=True)
class RankedResult:
    entries: tuple[RankedEntry, ...] = ()
    candidates_before_filter: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> RankedEntry:
        return self.entries[i]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.as_dict(), separators=(",", ":")) + "\n" for e in self.entries)


def speed_band(s_average_kmh: float, total_time_s: float) -> tuple[float, float]:
    expected = s_average_kmh * (total_time_s / 3600.0)
    return 0.9 * expected, 1.1 * expected


def speed_filter(
    paths: Iterable[CandidatePath], s_average_kmh: float, total_time_s: float
) -> list[CandidatePath]:
    """Keep paths whose length lies in [0.9, 1.1] x average speed x total time."""
    lo, hi = speed_band(s_average_kmh, total_time_s)
    return [p for p in paths if lo - BAND_TOL_KM <= p.distance_km <= hi + BAND_TOL_KM]


def rank_paths(g: RoadGraph, paths: Sequence[CandidatePath], before_filter: int | None = None) -> RankedResult:
    entries = tuple(
        RankedEntry(i, p, path_avg_popularity(g, p.vertices), p.distance_km)
        for i, p in enumerate(paths, start=1)
    )
    return RankedResult(entries, len(paths) if before_filter is None else before_filter)


def retrieve_driver_paths(
    g: RoadGraph,
    trip: TripAttributes,
    mc: CorneringLog,
    params: SearchParams,
    stats: SearchStats | None = None,
) -> RankedResult:
    """Rank every route consistent with the trip's cornering log and speed.

    ``g`` must already carry popularities. An empty result is a valid answer.
    """
    if trip.start_vertex not in g:
        raise GraphError(f"start vertex {trip.start_vertex} is not in the graph")
    trip.check_against(mc)
    candidates = getting_popular_paths(g, trip.start_vertex, mc, params, stats)
    kept = speed_filter(candidates, trip.s_average_kmh, trip.total_time_s)
    return rank_paths(g, kept, before_filter=len(candidates))
