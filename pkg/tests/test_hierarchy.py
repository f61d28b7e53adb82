from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ancestors_brute, desc_set, precedes
from strategies import small_graphs
from stl_oracle.graph import Graph
from stl_oracle.hierarchy import (
    StableTreeHierarchy,
    TreeNode,
    build_hierarchy,
    common_label_prefix_len,
    is_descendant,
    lca_level,
    verify_hierarchy,
)
from stl_oracle.partition import Separator
from stl_oracle.synthetic import complete, grid, path, random_connected, random_geometric, star


def manual(n: int, tree, beta: float = 0.2) -> StableTreeHierarchy:
    """Hierarchy from a nested ``(cut, left, right)`` spec; leaves are ``(cut,)``."""
    nodes: list[TreeNode] = []

    def add(spec, parent, level, bits, offset):
        node = TreeNode(len(nodes), parent, level, bits, list(spec[0]), offset)
        nodes.append(node)
        if len(spec) == 3:
            end = offset + len(spec[0])
            node.left = add(spec[1], node.id, level + 1, bits << 1, end)
            node.right = add(spec[2], node.id, level + 1, (bits << 1) | 1, end)
        return node.id

    add(tree, -1, 0, 0, 0)
    node_of, rank, tau = [-1] * n, [0] * n, [0] * n
    for node in nodes:
        for j, v in enumerate(node.cut):
            node_of[v], rank[v], tau[v] = node.id, j, node.tau_offset + j
    return StableTreeHierarchy(nodes, node_of, tau, rank, beta)


def test_lca_level_from_bitstrings():
    # vertex 3 sits at node "11", vertex 4 at node "100"; they share the prefix "1"
    h = manual(7, ([0], ([1],), ([2], ([5], ([4],), ([6],)), ([3],))))
    assert h.vertex_bitstring(3) == "11"
    assert h.vertex_bitstring(4) == "100"
    assert lca_level(h, 3, 4) == 1
    assert h.lca_level(4, 3) == 1
    assert h.lca_level(3, 3) == 2
    assert h.lca_level(1, 4) == 0
    # shared ancestors: 0 (root) and 2 (node "1")
    assert common_label_prefix_len(h, 3, 4) == 2


def test_path_of_four_root_cut_is_middle_vertex():
    g = path(4)
    h = build_hierarchy(g, beta=0.2, leaf_threshold=1)
    root = h.nodes[0]
    assert len(root.cut) == 1 and root.cut[0] in (1, 2)
    assert verify_hierarchy(g, h)


def test_clique_becomes_single_leaf():
    g = complete(5)
    h = build_hierarchy(g, leaf_threshold=1)
    assert len(h.nodes) == 1 and h.nodes[0].is_leaf
    assert sorted(h.tau) == [0, 1, 2, 3, 4]
    assert verify_hierarchy(g, h)


def test_star_root_cut_is_center():
    g = star(10)
    h = build_hierarchy(g, leaf_threshold=1)
    assert h.nodes[0].cut == [0]
    assert verify_hierarchy(g, h)


def test_beta_half_on_path_bisects_strictly():
    g = path(31)
    h = build_hierarchy(g, beta=0.5, leaf_threshold=1)
    assert verify_hierarchy(g, h)
    sizes = h.subtree_sizes()
    for node in h.nodes:
        if not node.is_leaf:
            for c in (node.left, node.right):
                assert sizes[c] <= sizes[node.id] / 2


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        build_hierarchy(Graph(0))
    with pytest.raises(ValueError):
        build_hierarchy(path(3), beta=0.9)
    with pytest.raises(ValueError):
        build_hierarchy(path(3), leaf_threshold=0)


def test_label_length_and_height():
    g = random_connected(80, 2)
    h = build_hierarchy(g)
    assert all(h.label_len(v) == h.tau[v] + 1 for v in range(g.n))
    assert h.height == max(len(h.ancestors(v)) for v in range(g.n))


@pytest.mark.parametrize("seed", range(6))
def test_tree_queries_match_brute_force(seed):
    g = random_geometric(40, seed) if seed % 2 else random_connected(40, seed)
    h = build_hierarchy(g, leaf_threshold=2, seed=seed)
    for v in range(g.n):
        assert h.ancestors(v) == ancestors_brute(h, v)
        assert sorted(h.descendants(v)) == sorted(desc_set(h, v))
        assert [h.tau[a] for a in h.ancestors(v)] == list(range(h.tau[v] + 1))
    for s in range(g.n):
        row = h.prefix_lengths_from(s)
        for t in range(g.n):
            assert is_descendant(h, s, t) == precedes(h, t, s)
            shared = set(ancestors_brute(h, s)) & set(ancestors_brute(h, t))
            k = common_label_prefix_len(h, s, t)
            assert k == len(shared) == row[t]
            assert h.ancestors(s)[:k] == h.ancestors(t)[:k]


@pytest.mark.parametrize("seed", range(8))
def test_hierarchy_is_weight_independent(seed):
    g = random_connected(100, seed)
    h1 = build_hierarchy(g, seed=seed)
    g2 = g.copy()
    rng = random.Random(seed)
    for u, v, _ in list(g2.edges()):
        g2.set_weight(u, v, rng.randint(0, 10**6))
    h2 = build_hierarchy(g2, seed=seed)
    assert h1.structure_equal(h2)
    assert h1 == h2


def test_deterministic_across_runs():
    g = grid(12, 12)
    assert build_hierarchy(g, seed=3) == build_hierarchy(g, seed=3)


def test_disconnected_graph():
    g = Graph.from_edges(9, [(0, 1, 1), (1, 2, 1), (3, 4, 1), (4, 5, 1), (6, 7, 1)])
    h = build_hierarchy(g, leaf_threshold=1)
    assert verify_hierarchy(g, h)


def test_untrusted_partitioner_falls_back_to_default():
    def bogus(sub, beta, rng):
        s = sub.shape[0]
        return Separator([], list(range(s - 1)), [s - 1])

    g = grid(6, 6)
    h = build_hierarchy(g, leaf_threshold=2, partitioner=bogus)
    assert verify_hierarchy(g, h)


def test_custom_partitioner_is_used_when_valid():
    calls = []

    def middle(sub, beta, rng):
        s = sub.shape[0]
        calls.append(s)
        m = s // 2
        return Separator([m], list(range(m)), list(range(m + 1, s)))

    g = path(15)
    h = build_hierarchy(g, leaf_threshold=1, partitioner=middle)
    assert calls and h.nodes[0].cut == [7]
    assert verify_hierarchy(g, h)


# seeded faults -------------------------------------------------------------

def test_verify_detects_unbalanced_split():
    g = path(11)
    h = manual(11, ([1], ([0],), ([2, 3, 4, 5, 6, 7, 8, 9, 10],)))
    rep = verify_hierarchy(g, h)
    assert not rep and rep.check == "balance"


def test_verify_detects_crossing_edge_and_names_lca():
    g = path(3)
    h = manual(3, ([], ([0, 1],), ([2],)))
    rep = verify_hierarchy(g, h)
    assert not rep and rep.check == "separator"
    assert rep.counterexample == (1, 2, 0)


def test_verify_detects_missing_vertex():
    g = path(4)
    h = build_hierarchy(g, leaf_threshold=1)
    node = h.nodes[h.node_of[3]]
    node.cut = [v for v in node.cut if v != 3]
    rep = verify_hierarchy(g, h)
    assert not rep and rep.check == "structure"


def test_verify_detects_bad_tau():
    g = path(6)
    h = build_hierarchy(g, leaf_threshold=1)
    h.tau[0] += 1
    rep = verify_hierarchy(g, h)
    assert not rep and rep.check == "structure" and rep.counterexample == (0,)


def test_verify_detects_wrong_vertex_count():
    h = build_hierarchy(path(4))
    assert verify_hierarchy(path(5), h).check == "structure"


@settings(max_examples=80, deadline=None)
@given(small_graphs(min_n=1, max_n=24), st.sampled_from([0.2, 0.3, 0.5]), st.integers(1, 4))
def test_every_built_hierarchy_verifies(g, beta, leaf):
    h = build_hierarchy(g, beta=beta, leaf_threshold=leaf)
    rep = verify_hierarchy(g, h)
    assert rep, rep
    # prefix lengths agree with the scalar form
    for s in range(g.n):
        assert np.array_equal(h.prefix_lengths_from(s), [h.common_label_prefix_len(s, t) for t in range(g.n)])
