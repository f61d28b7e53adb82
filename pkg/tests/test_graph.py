from __future__ import annotations

import gzip
import io

import numpy as np
import pytest
from hypothesis import given, settings

from oracles import bellman_ford, floyd_warshall
from strategies import small_graphs
from stl_oracle.graph import (
    INF,
    MAX_WEIGHT,
    DimacsDomainError,
    DimacsError,
    DimacsRangeError,
    EdgeNotFound,
    Graph,
    UpdateEvent,
    UpdateKind,
    all_pairs_distances,
    apply_update,
    dijkstra_restricted,
    iter_updates,
    oracle_distance,
    parse_dimacs,
    parse_queries,
    parse_updates,
    read_dimacs,
    sat_add,
    write_dimacs,
)


def _parse(text: str) -> Graph:
    return parse_dimacs(io.StringIO(text))


def test_dimacs_merges_arc_pairs_and_keeps_min_parallel():
    g = _parse("c comment\np sp 3 5\na 1 2 7\na 2 1 7\na 1 2 4\na 2 3 1\na 3 2 9\n")
    assert g.n == 3 and g.m == 2
    assert g.weight(0, 1) == 4
    assert g.weight(1, 2) == 1


def test_dimacs_drops_self_loops():
    g = _parse("p sp 2 2\na 1 1 5\na 1 2 3\n")
    assert g.m == 1 and not g.has_edge(0, 0)


@pytest.mark.parametrize(
    "text, exc, lineno",
    [
        ("p sp 2 1\na 1 3 5\n", DimacsRangeError, 2),
        ("p sp 2 1\na 0 1 5\n", DimacsRangeError, 2),
        ("p sp 2 1\na 1 2 -1\n", DimacsDomainError, 2),
        (f"p sp 2 1\na 1 2 {MAX_WEIGHT + 1}\n", DimacsDomainError, 2),
        ("a 1 2 3\n", DimacsError, 1),
        ("p sp 2 1\nc ok\nx 1 2\n", DimacsError, 3),
        ("p sp 2 1\na 1 2\n", DimacsError, 2),
        ("p sp 2 1\na 1 two 3\n", DimacsError, 2),
        ("p sp 2 1\np sp 2 1\n", DimacsError, 2),
        ("p max 2 1\n", DimacsError, 1),
    ],
)
def test_dimacs_errors_carry_line_numbers(text, exc, lineno):
    with pytest.raises(exc) as info:
        _parse(text)
    assert info.value.lineno == lineno
    assert f"line {lineno}" in str(info.value)


def test_dimacs_missing_problem_line():
    with pytest.raises(DimacsError):
        _parse("c nothing\n")


def test_dimacs_round_trip_plain_and_gz(tmp_path):
    g = Graph.from_edges(4, [(0, 1, 3), (1, 2, 0), (2, 3, 8), (0, 3, 1)])
    buf = io.StringIO()
    write_dimacs(g, buf)
    plain = tmp_path / "g.gr"
    plain.write_text(buf.getvalue())
    packed = tmp_path / "g.gr.gz"
    with gzip.open(packed, "wt") as fh:
        fh.write(buf.getvalue())
    assert read_dimacs(plain) == g
    assert read_dimacs(packed) == g


def test_apply_update_decrease_and_increase():
    g = Graph.from_edges(2, [(0, 1, 4)])
    ev = UpdateEvent(0, 1, 1)
    assert apply_update(g, ev) == 4
    assert ev.old_weight == 4 and ev.kind is UpdateKind.DECREASE
    assert g.weight(1, 0) == 1

    g = Graph.from_edges(2, [(0, 1, 4)])
    ev = UpdateEvent(1, 0, 7)
    apply_update(g, ev)
    assert ev.kind is UpdateKind.INCREASE and g.weight(0, 1) == 7

    ev = UpdateEvent(0, 1, 7)
    apply_update(g, ev)
    assert ev.kind is UpdateKind.NOOP


def test_update_kind_needs_application():
    with pytest.raises(ValueError):
        UpdateEvent(0, 1, 3).kind


def test_unknown_edge_and_bad_weights():
    g = Graph.from_edges(3, [(0, 1, 1)])
    with pytest.raises(EdgeNotFound):
        apply_update(g, UpdateEvent(0, 2, 1))
    with pytest.raises(ValueError):
        g.set_weight(0, 1, -1)
    with pytest.raises(ValueError):
        g.add_edge(0, 2, MAX_WEIGHT + 1)
    with pytest.raises(IndexError):
        g.add_edge(0, 5, 1)


def test_edges_are_listed_once_in_insertion_order():
    g = Graph.from_edges(4, [(2, 1, 5), (0, 3, 1), (1, 2, 9)])
    assert list(g.edges()) == [(1, 2, 5), (0, 3, 1)]


def test_parse_updates_and_queries():
    text = "# header\n1 2 5\n\n3 1 0\n"
    evs = parse_updates(io.StringIO(text), 3)
    assert [(e.u, e.v, e.new_weight) for e in evs] == [(0, 1, 5), (2, 0, 0)]
    assert [ln for ln, _ in iter_updates(io.StringIO(text), 3)] == [2, 4]
    with pytest.raises(DimacsRangeError) as info:
        parse_updates(io.StringIO("1 2 3\n1 4 3\n"), 3)
    assert info.value.lineno == 2
    with pytest.raises(DimacsDomainError):
        parse_updates(io.StringIO("1 2 -3\n"), 3)
    assert list(parse_queries(io.StringIO("1 1\n2 3\n"))) == [(1, 1, 1), (2, 2, 3)]
    with pytest.raises(DimacsError):
        list(parse_queries(io.StringIO("1 2 3\n")))


def test_sat_add_saturates():
    assert sat_add(INF, 5) == INF
    assert sat_add(INF - 1, 1) == INF
    assert sat_add(2, 3) == 5
    # INF + INF stays inside int64
    assert np.int64(INF) + np.int64(INF) > 0


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_w=5))
def test_dijkstra_matches_bellman_ford(g):
    for s in range(g.n):
        assert dijkstra_restricted(g, s) == bellman_ford(g, s)


@settings(max_examples=40, deadline=None)
@given(small_graphs(min_n=2, max_w=3))
def test_restricted_dijkstra_matches_bellman_ford(g):
    allowed = set(range(0, g.n, 2)) | {1}
    for s in allowed:
        assert dijkstra_restricted(g, s, allowed.__contains__) == bellman_ford(g, s, allowed)


def test_restricted_source_must_be_allowed():
    g = Graph.from_edges(2, [(0, 1, 1)])
    with pytest.raises(ValueError):
        dijkstra_restricted(g, 0, lambda v: v == 1)


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_w=4))
def test_bulk_oracle_matches_floyd_warshall_including_zero_weights(g):
    fw = floyd_warshall(g)
    assert all_pairs_distances(g).tolist() == fw
    for s in range(g.n):
        for t in range(g.n):
            assert oracle_distance(g, s, t) == fw[s][t]
