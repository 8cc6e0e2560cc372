"""Reconstruction quality: route deviation and the standing of the best match."""

from __future__ import annotations

import random
from typing import Sequence

import numpy as np

from ..attack import RankedResult
from ..geo import point_segment_km_many
from ..graph import GraphError, RoadGraph
from .trips import GroundTruthTrip

SAMPLE_STEP_KM = 0.05


def _polyline(g: RoadGraph, path: Sequence[int]) -> np.ndarray:
    if not path:
        raise GraphError("empty path")
    pts = [(g.location(v).lat_deg, g.location(v).lon_deg) for v in path]
    for a, b in zip(path, path[1:]):
        g.edge(a, b)
    return np.array(pts, dtype=float)


def _samples(g: RoadGraph, path: Sequence[int], step_km: float) -> np.ndarray:
    verts = _polyline(g, path)
    out = [verts[:1]]
    for i, (a, b) in enumerate(zip(path, path[1:])):
        n = max(1, int(np.ceil(g.edge(a, b).length_km / step_km)))
        t = (np.arange(1, n + 1) / n)[:, None]
        out.append(verts[i] + t * (verts[i + 1] - verts[i]))
    return np.vstack(out)


def _directed(samples: np.ndarray, other: np.ndarray) -> float:
    if len(other) == 1:
        starts = ends = other
    else:
        starts, ends = other[:-1], other[1:]
    return float(point_segment_km_many(samples, starts, ends).min(axis=1).max())


def max_deviation_km(
    g: RoadGraph, candidate: Sequence[int], truth: Sequence[int], step_km: float = SAMPLE_STEP_KM
) -> float:
    """Symmetric sampled Hausdorff distance between two routes.

    Both routes are sampled at their vertices and every ``step_km`` along each
    edge; each sample is measured to the nearest segment of the other route.
    """
    if tuple(candidate) == tuple(truth):
        _polyline(g, candidate)
        return 0.0
    a_line, b_line = _polyline(g, candidate), _polyline(g, truth)
    a_pts, b_pts = _samples(g, candidate, step_km), _samples(g, truth, step_km)
    return max(_directed(a_pts, b_line), _directed(b_pts, a_line))


def deviations(g: RoadGraph, result: RankedResult, truth: GroundTruthTrip) -> list[float]:
    return [max_deviation_km(g, e.path.vertices, truth.route) for e in result]


def closest_standing(g: RoadGraph, result: RankedResult, truth: GroundTruthTrip, devs=None) -> int:
    """Rank of the candidate nearest to the true route; ties go to the better rank."""
    if len(result) == 0:
        raise ValueError("attack failed: no candidates to rank")
    devs = deviations(g, result, truth) if devs is None else devs
    best = min(range(len(devs)), key=lambda i: (devs[i], i))
    return result[best].rank


def median_index(n: int) -> int:
    """0-based index of the median-ranked entry, rank floor((n + 1) / 2)."""
    return (n + 1) // 2 - 1


def random_index(n: int, rng: random.Random) -> int:
    return rng.randrange(n)
