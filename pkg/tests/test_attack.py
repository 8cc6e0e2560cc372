import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import grid_graph, log
from ubi_attack.attack import rank_paths, retrieve_driver_paths, speed_band, speed_filter
from ubi_attack.cornering import InputError, TripAttributes
from ubi_attack.evaluation.oracle import oracle_enumerate
from ubi_attack.graph import GraphError
from ubi_attack.search import CandidatePath, SearchParams

FULL = SearchParams(h=None, reuse=False)


def path_of(d):
    return CandidatePath((0, 1), (), True, d)


def test_band_example():
    lo, hi = speed_band(30, 600)
    assert (lo, hi) == pytest.approx((4.5, 5.5), abs=1e-12)
    kept = speed_filter([path_of(5.0), path_of(5.5), path_of(5.51), path_of(4.5), path_of(4.49)], 30, 600)
    assert [p.distance_km for p in kept] == [5.0, 5.5, 4.5]
    assert speed_filter([], 30, 600) == []


@given(st.lists(st.floats(0, 20), max_size=20), st.floats(1, 120), st.floats(10, 7200))
def test_filter_idempotent_and_in_band(ds, s, t):
    paths = [path_of(d) for d in ds]
    once = speed_filter(paths, s, t)
    assert speed_filter(once, s, t) == once
    lo, hi = speed_band(s, t)
    assert all(lo - 1e-9 <= p.distance_km <= hi + 1e-9 for p in once)


def uniform_grid():
    return grid_graph(4, 4).with_popularity({k: 1.0 for k in grid_graph(4, 4).edges})


def test_infeasible_trip_is_empty():
    g = uniform_grid()
    # Band upper end 0.01 km is below any edge length.
    res = retrieve_driver_paths(g, TripAttributes(0, 0.1, 300), log(("L", 150)), FULL)
    assert len(res) == 0
    assert res.to_jsonl() == ""


def test_result_equals_oracle_within_band():
    g = uniform_grid()
    mc = log(("R", 250))
    trip = TripAttributes(5, 36.0, 300)
    res = retrieve_driver_paths(g, trip, mc, FULL)
    want = oracle_enumerate(g, 5, mc, band=speed_band(36.0, 300))
    assert {(e.path.vertices, e.path.turn_marks) for e in res} == want
    assert len(want) > 0
    assert [e.rank for e in res] == list(range(1, len(res) + 1))


def test_dominant_route_ranked_first():
    base = uniform_grid()
    mc = log(("R", 250))
    trip = TripAttributes(5, 36.0, 300)
    res = retrieve_driver_paths(base, trip, mc, FULL)
    target = res[len(res) - 1].path.vertices
    pops = {k: e.popularity for k, e in base.edges.items()}
    for a, b in zip(target, target[1:]):
        pops[(a, b)] *= 10
    res2 = retrieve_driver_paths(base.with_popularity(pops), trip, mc, FULL)
    assert res2[0].path.vertices == target


def test_scaling_popularity_keeps_order():
    rng = random.Random(5)
    g0 = grid_graph(4, 4)
    g = g0.with_popularity({k: float(rng.randint(0, 9)) for k in sorted(g0.edges)})
    mc, trip = log(("L", 200), ("R", 400)), TripAttributes(0, 30.0, 480)
    res = retrieve_driver_paths(g, trip, mc, FULL)
    scaled = retrieve_driver_paths(g.with_popularity({k: e.popularity * 8 for k, e in g.edges.items()}), trip, mc, FULL)
    assert [e.path.identity for e in res] == [e.path.identity for e in scaled]
    pops = [e.avg_popularity for e in res]
    assert pops == sorted(pops, reverse=True)


def test_jsonl_format():
    g = uniform_grid()
    res = retrieve_driver_paths(g, TripAttributes(5, 36.0, 300), log(("R", 250)), FULL)
    rows = [json.loads(line) for line in res.to_jsonl().splitlines()]
    assert set(rows[0]) == {"rank", "avg_popularity", "distance_km", "vertices", "turn_marks"}
    assert rows[0]["rank"] == 1


def test_retrieve_errors():
    g = uniform_grid()
    with pytest.raises(GraphError):
        retrieve_driver_paths(g, TripAttributes(99, 30, 300), log(("L", 10)), FULL)
    with pytest.raises(InputError):
        retrieve_driver_paths(g, TripAttributes(0, 30, 5), log(("L", 10)), FULL)


def test_rank_paths_counts():
    res = rank_paths(grid_graph(2, 2), [CandidatePath((0, 1), (), True, 1.0)], before_filter=4)
    assert res.candidates_before_filter == 4
    assert res[0].rank == 1
