from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import small_graphs
from stl_oracle.graph import INF, Graph, UpdateEvent, UpdateKind, apply_update
from stl_oracle.hierarchy import build_hierarchy
from stl_oracle.label_search import ls_decrease, ls_increase, ls_repair
from stl_oracle.labelling import build_labels, rebuild_reference
from stl_oracle.synthetic import grid, path, random_connected, random_geometric


def _setup(g, **kw):
    h = build_hierarchy(g, **kw)
    return h, build_labels(g, h)


def _run(g, h, lab, batch):
    kinds = {ev.kind for ev in batch}
    assert len(kinds) == 1
    fn = ls_decrease if kinds.pop() is UpdateKind.DECREASE else ls_increase
    return fn(g, h, lab, batch)


@pytest.mark.parametrize("seed", range(10))
def test_single_updates_match_rebuild(seed):
    rng = random.Random(seed)
    g = random_geometric(70, seed, max_weight=50) if seed % 2 else random_connected(70, seed, max_weight=50)
    h, lab = _setup(g, seed=seed)
    edges = [(u, v) for u, v, _ in g.edges()]
    for _ in range(25):
        u, v = rng.choice(edges)
        w = g.weight(u, v)
        ev = UpdateEvent(u, v, rng.choice([2 * w + 1, rng.randint(0, w)]))
        apply_update(g, ev)
        if ev.kind is UpdateKind.NOOP:
            continue
        _run(g, h, lab, [ev])
        assert lab == rebuild_reference(g, h)


@pytest.mark.parametrize("seed", range(6))
def test_batches_match_rebuild(seed):
    rng = random.Random(seed)
    g = grid(7, 7, seed=seed, max_weight=9)
    h, lab = _setup(g, seed=seed, leaf_threshold=2)
    edges = [(u, v) for u, v, _ in g.edges()]
    for step in range(12):
        dec = step % 2 == 0
        picked = rng.sample(edges, 5)
        batch = []
        for u, v in picked:
            w = g.weight(u, v)
            ev = UpdateEvent(u, v, rng.randint(0, w) if dec else w + rng.randint(1, 9))
            apply_update(g, ev)
            if ev.kind is not UpdateKind.NOOP:
                batch.append(ev)
        if batch:
            st_ = _run(g, h, lab, batch)
            assert st_.updates == len(batch)
        assert lab == rebuild_reference(g, h)


def test_zero_weight_increase_marks_both_endpoints():
    # with weight 0 each endpoint's distance can equal the other's; either may be affected
    g = Graph.from_edges(4, [(0, 1, 0), (1, 2, 3), (0, 3, 5), (2, 3, 1)])
    h, lab = _setup(g, leaf_threshold=1)
    ev = UpdateEvent(0, 1, 4)
    apply_update(g, ev)
    ls_increase(g, h, lab, [ev])
    assert lab == rebuild_reference(g, h)


def test_wrong_kind_raises():
    g = path(3, weight=5)
    h, lab = _setup(g, leaf_threshold=1)
    ev = UpdateEvent(0, 1, 9)
    apply_update(g, ev)
    with pytest.raises(ValueError):
        ls_decrease(g, h, lab, [ev])
    with pytest.raises(ValueError):
        ls_increase(g, h, lab, [UpdateEvent(0, 1, 3)])


def test_stats_counters_are_consistent():
    g = random_connected(80, 7)
    h, lab = _setup(g)
    u, v, w = next(iter(g.edges()))
    ev = UpdateEvent(u, v, w + 50)
    apply_update(g, ev)
    s = ls_increase(g, h, lab, [ev])
    assert s.algo == "label-search" and s.kind == "increase"
    assert s.pops >= s.repair_pops >= 0
    assert s.vertex_delta <= s.label_delta
    assert s.seconds >= 0


# repair --------------------------------------------------------------------

def test_repair_with_empty_affected_set_is_noop():
    g = random_connected(30, 2)
    h, lab = _setup(g)
    before = lab.copy()
    ls_repair(g, h, lab, 0, set())
    assert lab == before


def test_repair_restores_scrambled_column():
    g = random_connected(60, 4)
    h, lab = _setup(g)
    good = lab.copy()
    rng = random.Random(0)
    for i in range(0, h.height, 3):
        members = [v for v in range(g.n) if h.tau[v] > i]
        aff = set(rng.sample(members, min(len(members), 10)))
        for v in aff:
            lab.set_entry(v, i, rng.choice([0, 1, INF]))
        ls_repair(g, h, lab, i, aff)
        assert lab == good


def test_repair_reaches_ancestor_over_direct_edge():
    # vertex 2's only route to the root cut vertex is the direct edge
    g = path(5, weight=2)
    h, lab = _setup(g, leaf_threshold=1)
    r = h.nodes[0].cut[0]
    nbr = g.nbrs[r][0]
    good = lab.copy()
    lab.set_entry(nbr, 0, INF)
    ls_repair(g, h, lab, 0, [nbr])
    assert lab == good


def test_repair_leaves_unreachable_entries_infinite():
    g = Graph.from_edges(5, [(0, 1, 1), (1, 2, 1), (3, 4, 1)])
    h, lab = _setup(g, leaf_threshold=1)
    good = lab.copy()
    for v in range(5):
        for i in range(h.tau[v]):
            lab.set_entry(v, i, 7)
            ls_repair(g, h, lab, i, {v} | {x for x in range(5) if h.tau[x] > i and good.entry(x, i) >= INF})
    assert lab == good


@settings(max_examples=50, deadline=None)
@given(small_graphs(min_n=2, max_n=14, max_w=5), st.data())
def test_repair_is_idempotent_on_exact_labels(g, data):
    h, lab = _setup(g, leaf_threshold=1)
    good = lab.copy()
    i = data.draw(st.integers(0, max(h.tau)))
    members = [v for v in range(g.n) if h.tau[v] > i]
    aff = data.draw(st.sets(st.sampled_from(members))) if members else set()
    ls_repair(g, h, lab, i, aff)
    assert lab == good


@settings(max_examples=40, deadline=None)
@given(small_graphs(min_n=2, max_n=14, max_w=4, connected=True), st.data())
def test_random_update_sequences(g, data):
    h, lab = _setup(g, leaf_threshold=data.draw(st.integers(1, 3)))
    edges = [(u, v) for u, v, _ in g.edges()]
    if not edges:
        return
    for _ in range(data.draw(st.integers(1, 8))):
        u, v = data.draw(st.sampled_from(edges))
        ev = UpdateEvent(u, v, data.draw(st.integers(0, 8)))
        apply_update(g, ev)
        if ev.kind is not UpdateKind.NOOP:
            _run(g, h, lab, [ev])
        assert lab == rebuild_reference(g, h)
