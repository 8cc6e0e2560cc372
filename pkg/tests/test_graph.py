import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import grid_graph, km_point, make_graph
from ubi_attack.geo import GeoPoint
from ubi_attack.graph import (
    Edge,
    GraphBounds,
    GraphError,
    RoadGraph,
    Vertex,
    load_graph,
    load_graph_with_popularity,
    path_avg_legal_speed_kmh,
    path_avg_popularity,
    path_distance_km,
    read_popularity,
    read_road_classes,
    save_graph,
    turn_count,
    write_popularity,
    write_road_classes,
)

ONE_DEG_LAT_KM = 111.19492664455873


def two_nodes(lat2=0.01):
    return io.StringIO(f"id,lat,lon\n1,0,0\n2,{lat2},0\n")


def test_load_explicit_length():
    g = load_graph(two_nodes(), io.StringIO("from,to,legal_speed_kmh,length_km\n1,2,50,1.5\n"))
    assert g.edge(1, 2).length_km == 1.5
    assert g.edge(1, 2).popularity == 0.0
    assert (2, 1) not in g.edges


def test_load_computes_missing_length():
    g = load_graph(two_nodes(1), io.StringIO("from,to,legal_speed_kmh,length_km\n1,2,50,\n"))
    assert g.edge(1, 2).length_km == pytest.approx(ONE_DEG_LAT_KM, abs=1e-9)


@pytest.mark.parametrize(
    "edges, match",
    [
        ("1,3,50,1\n", "unknown vertex"),
        ("1,2,50,1\n1,2,40,1\n", "duplicate edge"),
        ("1,2,0,1\n", "speed > 0"),
        ("1,2,50,-1\n", "length > 0"),
        ("1,2,fast,1\n", "line 2"),
    ],
)
def test_load_errors(edges, match):
    with pytest.raises(GraphError, match=match):
        load_graph(two_nodes(), io.StringIO("from,to,legal_speed_kmh,length_km\n" + edges))


def test_bad_header_and_duplicate_vertex():
    with pytest.raises(GraphError):
        load_graph(io.StringIO("id,lon,lat\n1,0,0\n"), io.StringIO("from,to,legal_speed_kmh,length_km\n"))
    with pytest.raises(GraphError, match="duplicate vertex"):
        RoadGraph([Vertex(1, GeoPoint(0, 0)), Vertex(1, GeoPoint(1, 0))], [])


def test_bounds_validation_is_opt_in():
    nodes = "id,lat,lon\n1,0,0\n2,0.01,0\n"
    edges = "from,to,legal_speed_kmh,length_km\n1,2,50,9\n"
    load_graph(io.StringIO(nodes), io.StringIO(edges))
    bounds = GraphBounds(0.05, 5.0, 5.0)
    with pytest.raises(GraphError, match="1->2"):
        load_graph(io.StringIO(nodes), io.StringIO(edges), bounds, validate=True)
    with pytest.raises(ValueError):
        GraphBounds(2.0, 1.0, 3.0)


def test_successors_ordering_and_leaf():
    coords = {1: (0, 0), 7: (1, 0), 3: (0, 1)}
    g = make_graph(coords, [(1, 7), (1, 3)])
    assert [e.target for e in g.successors(1)] == [3, 7]
    assert g.successors(7) == ()
    with pytest.raises(GraphError):
        g.successors(99)


def test_grid_interior_has_four_successors(grid3):
    assert len(grid3.successors(4)) == 4
    assert len(grid3.successors(0)) == 2
    assert len(grid3.edges) == 24


def test_path_distance():
    coords = {0: (0, 0), 1: (0, 1), 2: (0, 3.5)}
    g = RoadGraph(
        [Vertex(i, km_point(*xy)) for i, xy in coords.items()],
        [Edge(0, 1, 1.0, 50), Edge(1, 2, 2.5, 50)],
    )
    assert path_distance_km(g, [0]) == 0.0
    assert path_distance_km(g, [0, 1, 2]) == 3.5
    with pytest.raises(GraphError):
        path_distance_km(g, [0, 2])


def test_block_loop_distance(grid3):
    # 0 -> 1 -> 4 -> 3 -> 0 around one unit block
    d = path_distance_km(grid3, [0, 1, 4, 3, 0])
    assert d == pytest.approx(4.0, rel=1e-3)


def test_average_speed_and_popularity():
    coords = {0: (0, 0), 1: (0, 1), 2: (0, 2), 3: (0, 3)}
    g = make_graph(coords, [(0, 1, 30.0), (1, 2, 90.0), (2, 3, 90.0)],
                   pops={(0, 1): 1, (1, 2): 1, (2, 3): 4})
    assert path_avg_legal_speed_kmh(g, [0, 1]) == 30.0
    assert path_avg_legal_speed_kmh(g, [0, 1, 2]) == 60.0
    assert path_avg_legal_speed_kmh(g, [1, 2, 3]) == 90.0
    assert path_avg_popularity(g, [0, 1, 2, 3]) == 2.0
    assert path_avg_popularity(g.with_popularity({(1, 2): 2, (2, 3): 4}), [1, 2, 3]) == 3.0
    assert path_avg_popularity(g.with_popularity({}), [0, 1, 2]) == 0.0
    with pytest.raises(GraphError):
        path_avg_legal_speed_kmh(g, [0])


def test_turn_count_shapes(grid3):
    assert turn_count(grid3, [0, 1, 2]) == 0
    assert turn_count(grid3, [0, 1, 4]) == 1
    # U shape: 0 -> 1 -> 4 -> 3, two left turns
    assert turn_count(grid3, [0, 1, 4, 3]) == 2


@given(st.lists(st.integers(0, 8), min_size=1, max_size=8))
def test_turn_count_bound_and_additivity(walk):
    g = grid_graph(3, 3)
    path = [walk[0]]
    for v in walk[1:]:
        if (path[-1], v) in g.edges:
            path.append(v)
    assert turn_count(g, path) <= max(0, len(path) - 2)
    for cut in range(len(path)):
        whole = path_distance_km(g, path)
        parts = path_distance_km(g, path[: cut + 1]) + path_distance_km(g, path[cut:])
        assert parts == pytest.approx(whole, abs=1e-12)


def test_round_trip_bit_identical(tmp_path, grid3):
    g = grid3.with_popularity({(0, 1): 3, (1, 0): 2.5})
    save_graph(g, tmp_path / "n.csv", tmp_path / "e.csv")
    write_popularity(g, tmp_path / "p.csv")
    g2 = load_graph_with_popularity(tmp_path / "n.csv", tmp_path / "e.csv", tmp_path / "p.csv")
    assert g2.vertices == g.vertices
    assert g2.edges == g.edges
    save_graph(g2, tmp_path / "n2.csv", tmp_path / "e2.csv")
    write_popularity(g2, tmp_path / "p2.csv")
    for a, b in (("n", "n2"), ("e", "e2"), ("p", "p2")):
        assert (tmp_path / f"{a}.csv").read_bytes() == (tmp_path / f"{b}.csv").read_bytes()
    assert read_popularity(tmp_path / "p.csv")[(0, 1)] == 3.0
    assert "0,1,3\n" in (tmp_path / "p.csv").read_text()


def test_road_class_sidecar(tmp_path, grid3):
    g = grid3.with_road_classes({(0, 1): "highway"})
    write_road_classes(g, tmp_path / "c.csv")
    assert read_road_classes(tmp_path / "c.csv") == {(0, 1): "highway"}


def test_popularity_for_unknown_edge_rejected(grid3):
    with pytest.raises(GraphError, match="unknown edge"):
        grid3.with_popularity({(0, 8): 1})
