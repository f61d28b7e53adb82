from __future__ import annotations

import json

from stl_oracle.index import STLIndex
from stl_oracle.synthetic import grid, random_connected
from stl_oracle.verify import dump_counterexample, random_updates, replay, verify_dynamic, verify_hierarchy_mode, verify_static


def test_static_passes_on_fresh_index():
    rep = verify_static(STLIndex.build(random_connected(60, 1)))
    assert rep.ok and rep.mismatches == 0


def test_static_names_corrupted_entry():
    ix = STLIndex.build(grid(6, 6, seed=2))
    v = max(range(ix.graph.n), key=lambda x: ix.hierarchy.tau[x])
    want = ix.labelling.entry(v, 1)
    ix.labelling.set_entry(v, 1, want + 1)
    rep = verify_static(ix)
    assert not rep.ok
    ce = rep.counterexample
    assert (ce["v"], ce["i"], ce["expected"], ce["got"]) == (v, 1, want, want + 1)
    assert f"v={v} i=1 expected={want} got={want + 1}" in rep.detail


def test_static_sampled_sources():
    rep = verify_static(STLIndex.build(random_connected(80, 4)), samples=10, seed=3)
    assert rep.ok and rep.checked > 0


def test_dynamic_passes_for_both_families():
    rep = verify_dynamic(STLIndex.build(random_connected(40, 6)), updates=120, seed=1)
    assert rep.ok and rep.checked > 0


def test_hierarchy_mode_passes_and_detects_tampering():
    ix = STLIndex.build(grid(5, 5))
    assert verify_hierarchy_mode(ix).ok
    ix.hierarchy.tau[0] += 1
    assert not verify_hierarchy_mode(ix).ok


def test_random_updates_are_valid_and_deterministic():
    g = random_connected(30, 2)
    a = random_updates(g, 50, 7)
    assert a == random_updates(g, 50, 7)
    assert all(g.has_edge(u, v) for u, v, _ in a)


def test_counterexample_round_trips_through_json(tmp_path):
    ix = STLIndex.build(random_connected(20, 3))
    rep = verify_dynamic(ix, updates=10, seed=0)
    rep.counterexample = {
        "graph": {"n": ix.graph.n, "edges": [list(e) for e in ix.graph.edges()]},
        "updates": [list(u) for u in random_updates(ix.graph, 10, 0)],
        "beta": 0.2, "leaf_threshold": 8, "partition_seed": 0, "restarts": 2,
    }
    p = tmp_path / "ce.json"
    dump_counterexample(rep, p)
    assert replay(json.loads(p.read_text())).ok
