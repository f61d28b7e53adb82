"""Stable tree hierarchy: a weight-independent binary tree of vertex cuts.

Vertices are ordered by (tree node depth-first ancestry, rank inside the node).
``tau[v]`` counts the strict predecessors of ``v``; a vertex's label has
``tau[v] + 1`` entries, the last one being the distance to itself.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .graph import Graph, to_csr
from .partition import FlowPartitioner, Partitioner, Separator, is_balanced, separate_subgraph


@dataclass
class TreeNode:
    id: int
    parent: int  # -1 for the root
    level: int
    bits: int  # bitstring of length ``level``, most significant bit first
    cut: list[int]
    tau_offset: int
    left: int = -1
    right: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.left < 0

    @property
    def bitstring(self) -> str:
        return format(self.bits, f"0{self.level}b") if self.level else ""

    @property
    def tau_end(self) -> int:
        return self.tau_offset + len(self.cut)


@dataclass
class StableTreeHierarchy:
    nodes: list[TreeNode]
    node_of: list[int]
    tau: list[int]
    rank: list[int]
    beta: float = 0.2
    leaf_threshold: int = 8
    seed: int = 0
    _anc_end: list[list[int]] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._anc_end = []
        for node in self.nodes:
            if node.parent < 0:
                self._anc_end.append([node.tau_end])
            else:
                self._anc_end.append(self._anc_end[node.parent] + [node.tau_end])

    @property
    def n(self) -> int:
        return len(self.node_of)

    @property
    def height(self) -> int:
        """Longest label, i.e. max |ANC(v)| counting v itself."""
        return max(self.tau) + 1 if self.tau else 0

    @property
    def depth(self) -> int:
        return max(node.level for node in self.nodes)

    def vertex_bitstring(self, v: int) -> str:
        return self.nodes[self.node_of[v]].bitstring

    def label_len(self, v: int) -> int:
        return self.tau[v] + 1

    def lca_level(self, s: int, t: int) -> int:
        a = self.nodes[self.node_of[s]]
        b = self.nodes[self.node_of[t]]
        m = min(a.level, b.level)
        x = (a.bits >> (a.level - m)) ^ (b.bits >> (b.level - m))
        return m - x.bit_length()

    def common_label_prefix_len(self, s: int, t: int) -> int:
        """Number of shared label positions, |ANC(s) ∩ ANC(t)| with ANC inclusive."""
        ns = self.node_of[s]
        k = min(self.tau[s], self.tau[t]) + 1
        end = self._anc_end[ns][self.lca_level(s, t)]
        return end if end < k else k

    def is_descendant(self, x: int, r: int) -> bool:
        """True iff r precedes-or-equals x."""
        nx, nr = self.nodes[self.node_of[x]], self.nodes[self.node_of[r]]
        if nr.level > nx.level or (nx.bits >> (nx.level - nr.level)) != nr.bits:
            return False
        return nx.id != nr.id or self.rank[x] >= self.rank[r]

    def path_nodes(self, node_id: int) -> list[int]:
        path = []
        while node_id >= 0:
            path.append(node_id)
            node_id = self.nodes[node_id].parent
        return path[::-1]

    def ancestors(self, v: int) -> list[int]:
        """ANC(v) in order, v included last; position j holds the vertex with tau j."""
        out: list[int] = []
        for nid in self.path_nodes(self.node_of[v]):
            cut = self.nodes[nid].cut
            if nid == self.node_of[v]:
                out.extend(cut[: self.rank[v] + 1])
            else:
                out.extend(cut)
        return out

    def subtree_vertices(self, node_id: int) -> list[int]:
        out: list[int] = []
        stack = [node_id]
        while stack:
            node = self.nodes[stack.pop()]
            out.extend(node.cut)
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def descendants(self, r: int) -> list[int]:
        """DESC(r), r included, enumerated from the tree (no tau shortcuts)."""
        node = self.nodes[self.node_of[r]]
        out = node.cut[self.rank[r]:]
        if not node.is_leaf:
            out = out + self.subtree_vertices(node.left) + self.subtree_vertices(node.right)
        return out

    def subtree_sizes(self) -> list[int]:
        size = [len(node.cut) for node in self.nodes]
        for node in reversed(self.nodes):  # children always have larger ids
            if node.parent >= 0:
                size[node.parent] += size[node.id]
        return size

    @cached_property
    def _euler(self) -> tuple[np.ndarray, np.ndarray]:
        tin = np.zeros(len(self.nodes), dtype=np.int64)
        tout = np.zeros(len(self.nodes), dtype=np.int64)
        clock = 0
        stack = [(0, False)]
        while stack:
            nid, done = stack.pop()
            if done:
                tout[nid] = clock - 1
                continue
            tin[nid] = clock
            clock += 1
            stack.append((nid, True))
            node = self.nodes[nid]
            if not node.is_leaf:
                stack.append((node.right, False))
                stack.append((node.left, False))
        return tin, tout

    def prefix_lengths_from(self, s: int) -> np.ndarray:
        """Vectorised ``common_label_prefix_len(s, t)`` for every t."""
        tin, tout = self._euler
        node_of = np.asarray(self.node_of)
        tin_v = tin[node_of]
        path = self.path_nodes(self.node_of[s])
        depth = np.full(self.n, -1, dtype=np.int64)
        for nid in path:
            depth += (tin_v >= tin[nid]) & (tin_v <= tout[nid])
        ends = np.array([self.nodes[nid].tau_end for nid in path], dtype=np.int64)
        tau = np.asarray(self.tau, dtype=np.int64)
        return np.minimum(ends[depth], np.minimum(tau, self.tau[s]) + 1)

    def structure_equal(self, other: StableTreeHierarchy) -> bool:
        return (
            self.nodes == other.nodes
            and self.node_of == other.node_of
            and self.tau == other.tau
            and self.rank == other.rank
        )


def _separator_ok(csr, sep: Separator, vertices: list[int], beta: float) -> bool:
    """Independent re-check of a partitioner result (custom partitioners are untrusted)."""
    if sep.degenerate:
        return False
    total = len(vertices)
    if sorted(sep.cut + sep.side_a + sep.side_b) != vertices:
        return False
    if not (is_balanced(len(sep.side_a), total, beta) and is_balanced(len(sep.side_b), total, beta)):
        return False
    side_b = set(sep.side_b)
    indptr, indices = csr.indptr, csr.indices
    for u in sep.side_a:
        for w in indices[indptr[u]:indptr[u + 1]]:
            if int(w) in side_b:
                return False
    return True


def build_hierarchy(
    graph: Graph,
    beta: float = 0.2,
    leaf_threshold: int = 8,
    seed: int = 0,
    restarts: int = 2,
    partitioner: Partitioner | None = None,
) -> StableTreeHierarchy:
    """Recursively bisect G by balanced vertex cuts.

    Only the topology of ``graph`` is read, so the result is identical before
    and after any sequence of weight updates.  A subgraph becomes a leaf when
    it has at most ``leaf_threshold`` vertices or admits no separator with two
    non-empty sides.
    """
    if graph.n == 0:
        raise ValueError("cannot build a hierarchy for an empty graph")
    if not 0 < beta <= 0.5:
        raise ValueError("beta must lie in (0, 0.5]")
    if leaf_threshold < 1:
        raise ValueError("leaf_threshold must be >= 1")

    csr = to_csr(graph, weighted=False)
    default = FlowPartitioner(restarts)
    nodes: list[TreeNode] = []
    pending: deque[tuple[int, list[int]]] = deque()
    nodes.append(TreeNode(0, -1, 0, 0, [], 0))
    pending.append((0, list(range(graph.n))))

    while pending:
        nid, verts = pending.popleft()
        node = nodes[nid]
        sep: Separator | None = None
        if len(verts) > leaf_threshold:
            rng = np.random.default_rng([seed, nid])
            sep = separate_subgraph(csr, np.array(verts), beta, rng, partitioner or default)
            if partitioner is not None and not _separator_ok(csr, sep, verts, beta):
                sep = separate_subgraph(csr, np.array(verts), beta, rng, default)
            if sep.degenerate:
                sep = None
        if sep is None:
            node.cut = verts
            continue
        node.cut = sep.cut
        for bit, side in ((0, sep.side_a), (1, sep.side_b)):
            child = TreeNode(
                len(nodes), nid, node.level + 1, (node.bits << 1) | bit, [], node.tau_offset + len(sep.cut)
            )
            nodes.append(child)
            if bit == 0:
                node.left = child.id
            else:
                node.right = child.id
            pending.append((child.id, side))

    node_of = [-1] * graph.n
    rank = [0] * graph.n
    tau = [0] * graph.n
    for node in nodes:
        for j, v in enumerate(node.cut):
            node_of[v] = node.id
            rank[v] = j
            tau[v] = node.tau_offset + j
    return StableTreeHierarchy(nodes, node_of, tau, rank, beta, leaf_threshold, seed)


def lca_level(hierarchy: StableTreeHierarchy, s: int, t: int) -> int:
    return hierarchy.lca_level(s, t)


def common_label_prefix_len(hierarchy: StableTreeHierarchy, s: int, t: int) -> int:
    return hierarchy.common_label_prefix_len(s, t)


def is_descendant(hierarchy: StableTreeHierarchy, x: int, r: int) -> bool:
    return hierarchy.is_descendant(x, r)


@dataclass
class HierarchyReport:
    ok: bool
    check: str = ""
    detail: str = ""
    counterexample: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def verify_hierarchy(graph: Graph, hierarchy: StableTreeHierarchy) -> HierarchyReport:
    """Check structure, balance, the separator property and edge comparability.

    Returns the first violation found.
    """
    h = hierarchy
    nodes = h.nodes
    if h.n != graph.n:
        return HierarchyReport(False, "structure", f"hierarchy covers {h.n} vertices, graph has {graph.n}")

    seen = [0] * graph.n
    for node in nodes:
        if node.cut != sorted(node.cut):
            return HierarchyReport(False, "structure", f"cut of node {node.id} is not in ascending order", (node.id,))
        if node.is_leaf != (node.right < 0):
            return HierarchyReport(False, "structure", f"node {node.id} has exactly one child", (node.id,))
        if node.is_leaf and not node.cut:
            return HierarchyReport(False, "structure", f"leaf {node.id} holds no vertices", (node.id,))
        if node.parent >= 0:
            p = nodes[node.parent]
            bit = 0 if p.left == node.id else 1 if p.right == node.id else -1
            if bit < 0:
                return HierarchyReport(False, "structure", f"node {node.id} not a child of its parent", (node.id,))
            if node.level != p.level + 1 or node.bits != (p.bits << 1) | bit:
                return HierarchyReport(False, "structure", f"bad level/bitstring at node {node.id}", (node.id,))
            if node.tau_offset != p.tau_end:
                return HierarchyReport(False, "structure", f"bad tau offset at node {node.id}", (node.id,))
        elif node.level != 0 or node.tau_offset != 0:
            return HierarchyReport(False, "structure", "root must have level 0 and tau offset 0", (node.id,))
        for j, v in enumerate(node.cut):
            seen[v] += 1
            if h.node_of[v] != node.id or h.rank[v] != j or h.tau[v] != node.tau_offset + j:
                return HierarchyReport(False, "structure", f"vertex {v} has inconsistent node/rank/tau", (v,))
    for v, c in enumerate(seen):
        if c != 1:
            return HierarchyReport(False, "structure", f"vertex {v} assigned to {c} nodes", (v,))

    sizes = h.subtree_sizes()
    for node in nodes:
        if node.is_leaf:
            continue
        for child in (node.left, node.right):
            if not is_balanced(sizes[child], sizes[node.id], h.beta):
                return HierarchyReport(
                    False, "balance",
                    f"child {child} of node {node.id} holds {sizes[child]} of {sizes[node.id]} vertices "
                    f"(bound {(1 - h.beta) * sizes[node.id]:.3f})",
                    (node.id, child),
                )

    # An edge whose endpoints sit in incomparable nodes crosses the cut of their LCA node.
    for u, v, _ in graph.edges():
        a, b = nodes[h.node_of[u]], nodes[h.node_of[v]]
        m = min(a.level, b.level)
        if (a.bits >> (a.level - m)) != (b.bits >> (b.level - m)):
            lvl = h.lca_level(u, v)
            lca = h.path_nodes(a.id)[lvl]
            return HierarchyReport(
                False, "separator", f"edge ({u}, {v}) joins both sides of the cut at node {lca}", (u, v, lca)
            )
    for u, v, _ in graph.edges():
        if not (h.is_descendant(u, v) or h.is_descendant(v, u)):
            return HierarchyReport(False, "comparability", f"edge ({u}, {v}) joins incomparable vertices", (u, v))
    return HierarchyReport(True)
