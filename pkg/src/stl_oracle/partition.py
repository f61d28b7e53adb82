"""Balanced vertex separators for the hierarchy builder.

The default partitioner grows two seed regions by BFS from a pseudo-peripheral
vertex pair and takes a minimum vertex cut between them (max-flow on the
node-split graph).  If both seeds hold at least ``ceil(beta * |S|)`` vertices,
neither side of any such cut can exceed ``(1 - beta) * |S|``, so balance comes
for free and only the cut size is optimised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, connected_components, maximum_flow, shortest_path

from .graph import Graph, to_csr

BALANCE_EPS = 1e-9


@dataclass
class Separator:
    cut: list[int]
    side_a: list[int]
    side_b: list[int]

    @property
    def degenerate(self) -> bool:
        return not self.side_a or not self.side_b

    def sizes(self) -> tuple[int, int, int]:
        return len(self.cut), len(self.side_a), len(self.side_b)


# (subgraph CSR over local ids 0..s-1, beta, rng) -> Separator in local ids
Partitioner = Callable[[sp.csr_matrix, float, np.random.Generator], Separator]


def is_balanced(part: int, total: int, beta: float) -> bool:
    return part <= (1.0 - beta) * total + BALANCE_EPS


def _valid(sep: Separator, total: int, beta: float) -> bool:
    return (
        not sep.degenerate
        and is_balanced(len(sep.side_a), total, beta)
        and is_balanced(len(sep.side_b), total, beta)
    )


def _score(sep: Separator) -> tuple[int, int]:
    return len(sep.cut), max(len(sep.side_a), len(sep.side_b))


def _lpt_split(groups: Sequence[np.ndarray]) -> tuple[list[int], list[int]]:
    """Largest-first greedy two-way packing of whole groups."""
    a: list[int] = []
    b: list[int] = []
    for grp in sorted(groups, key=lambda g: (-len(g), int(g[0]))):
        (a if len(a) <= len(b) else b).extend(int(x) for x in grp)
    return a, b


def _components(sub: sp.csr_matrix, keep: np.ndarray | None = None) -> list[np.ndarray]:
    if keep is not None:
        idx = np.flatnonzero(keep)
        sub = sub[idx][:, idx]
    else:
        idx = np.arange(sub.shape[0])
    _, labels = connected_components(sub, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.flatnonzero(np.diff(labels[order])) + 1
    return [idx[g] for g in np.split(order, bounds)]


def _hops(sub: sp.csr_matrix, source: int) -> np.ndarray:
    return shortest_path(sub, directed=False, unweighted=True, indices=source)


def _pseudo_peripheral_pair(sub: sp.csr_matrix, start: int) -> tuple[int, np.ndarray, int, np.ndarray]:
    x = start
    hx = _hops(sub, x)
    ecc = -1.0
    for _ in range(8):
        finite = np.where(np.isfinite(hx), hx, -1.0)
        far = int(np.argmax(finite))
        if finite[far] <= ecc:
            break
        ecc = finite[far]
        x, hx = far, _hops(sub, far)
    # x is now the far end; its farthest vertex is the other end
    finite = np.where(np.isfinite(hx), hx, -1.0)
    y = int(np.argmax(finite))
    return x, hx, y, _hops(sub, y)


def _min_vertex_cut(sub: sp.csr_matrix, source: np.ndarray, sink: np.ndarray) -> list[Separator]:
    """Source-side and sink-side minimum vertex cuts between two seed sets.

    Seed vertices may themselves be cut.
    """
    s = sub.shape[0]
    big = s + 1
    coo = sub.tocoo()
    src_node, snk_node = 2 * s, 2 * s + 1
    rows = np.concatenate([np.arange(s), coo.row + s, np.full(len(source), src_node), sink + s])
    cols = np.concatenate([np.arange(s) + s, coo.col, source, np.full(len(sink), snk_node)])
    caps = np.concatenate([
        np.ones(s, dtype=np.int32),
        np.full(len(coo.row), big, dtype=np.int32),
        np.full(len(source) + len(sink), big, dtype=np.int32),
    ])
    cap = sp.csr_matrix((caps, (rows, cols)), shape=(2 * s + 2, 2 * s + 2), dtype=np.int32)
    cap.sum_duplicates()
    flow = maximum_flow(cap, src_node, snk_node, method="dinic").flow
    resid = (cap - flow).tocsr()
    resid.data[resid.data < 0] = 0
    resid.eliminate_zeros()

    fwd = np.zeros(2 * s + 2, dtype=bool)
    fwd[breadth_first_order(resid, src_node, directed=True, return_predecessors=False)] = True
    bwd = np.zeros(2 * s + 2, dtype=bool)
    bwd[breadth_first_order(resid.T.tocsr(), snk_node, directed=True, return_predecessors=False)] = True

    fin, fout = fwd[:s], fwd[s:2 * s]
    bin_, bout = bwd[:s], bwd[s:2 * s]
    seps = []
    cut = fin & ~fout
    seps.append(Separator(
        np.flatnonzero(cut).tolist(), np.flatnonzero(fin & fout).tolist(), np.flatnonzero(~fin).tolist()
    ))
    cut = bout & ~bin_
    seps.append(Separator(
        np.flatnonzero(cut).tolist(), np.flatnonzero(~bout).tolist(), np.flatnonzero(bin_).tolist()
    ))
    return seps


def _rebalanced(sub: sp.csr_matrix, sep: Separator) -> Separator:
    """Re-pack the components left after removing the cut into two sides."""
    keep = np.ones(sub.shape[0], dtype=bool)
    keep[sep.cut] = False
    comps = _components(sub, keep)
    if len(comps) < 2:
        return sep
    a, b = _lpt_split(comps)
    return Separator(list(sep.cut), sorted(a), sorted(b))


def _pruned(sub: sp.csr_matrix, sep: Separator, beta: float) -> Separator:
    """Move cut vertices with no neighbour on one side into the other side, while balance allows."""
    s = sub.shape[0]
    side = np.zeros(s, dtype=np.int8)  # 0 cut, 1 side a, 2 side b
    side[sep.side_a] = 1
    side[sep.side_b] = 2
    na, nb = len(sep.side_a), len(sep.side_b)
    indptr, indices = sub.indptr, sub.indices
    for c in sep.cut:
        nbr = side[indices[indptr[c]:indptr[c + 1]]]
        to_a = not (nbr == 2).any() and is_balanced(na + 1, s, beta)
        to_b = not (nbr == 1).any() and is_balanced(nb + 1, s, beta)
        if to_a and (not to_b or na <= nb):
            side[c] = 1
            na += 1
        elif to_b:
            side[c] = 2
            nb += 1
    if na + nb == len(sep.side_a) + len(sep.side_b):
        return sep
    return Separator(
        np.flatnonzero(side == 0).tolist(), np.flatnonzero(side == 1).tolist(), np.flatnonzero(side == 2).tolist()
    )


def _bfs_median_split(sub: sp.csr_matrix, root: int) -> Separator:
    """Split a BFS ordering at its median; first-half vertices touching the second half form the cut."""
    s = sub.shape[0]
    hops = _hops(sub, root)
    order = np.lexsort((np.arange(s), np.where(np.isfinite(hops), hops, np.inf)))
    first = np.zeros(s, dtype=bool)
    first[order[: (s + 1) // 2]] = True
    coo = sub.tocoo()
    crossing = first[coo.row] & ~first[coo.col]
    in_cut = np.zeros(s, dtype=bool)
    in_cut[coo.row[crossing]] = True
    return Separator(
        np.flatnonzero(in_cut).tolist(),
        np.flatnonzero(first & ~in_cut).tolist(),
        np.flatnonzero(~first).tolist(),
    )


class FlowPartitioner:
    """Default partitioner: best of ``restarts`` seeded min-vertex-cut attempts."""

    def __init__(self, restarts: int = 2, fractions: Sequence[float] | None = None):
        if restarts < 1:
            raise ValueError("restarts must be >= 1")
        self.restarts = restarts
        self.fractions = fractions

    def __call__(self, sub: sp.csr_matrix, beta: float, rng: np.random.Generator) -> Separator:
        s = sub.shape[0]
        comps = _components(sub)
        if len(comps) > 1:
            a, b = _lpt_split(comps)
            sep = Separator([], sorted(a), sorted(b))
            if _valid(sep, s, beta):
                return sep
        largest = max(comps, key=len)

        fractions = self.fractions or sorted({beta, (beta + 0.5) / 2})
        best: Separator | None = None
        for _ in range(self.restarts):
            start = int(largest[rng.integers(len(largest))])
            p, hp, q, hq = _pseudo_peripheral_pair(sub, start)
            order_p = np.lexsort((np.arange(s), hp))
            order_q = np.lexsort((np.arange(s), hq))
            for f in fractions:
                k = min(len(largest), max(1, math.ceil(f * s - BALANCE_EPS)))
                for sep in _min_vertex_cut(sub, order_p[:k], order_q[:k]):
                    pruned = _pruned(sub, sep, beta)
                    for cand in (sep, _rebalanced(sub, sep), pruned, _rebalanced(sub, pruned)):
                        if _valid(cand, s, beta) and (best is None or _score(cand) < _score(best)):
                            best = cand
        if best is not None:
            return best
        fallback = _bfs_median_split(sub, int(largest[0]))
        repacked = _rebalanced(sub, fallback)
        if _valid(repacked, s, beta) and (fallback.degenerate or _score(repacked) < _score(fallback)):
            return repacked
        return fallback


def separate_subgraph(
    csr: sp.csr_matrix,
    vertices: np.ndarray,
    beta: float,
    rng: np.random.Generator,
    partitioner: Partitioner | None = None,
) -> Separator:
    """Run a partitioner on G[vertices] and map the result back to global ids."""
    vertices = np.asarray(vertices, dtype=np.int64)
    sub = csr[vertices][:, vertices].tocsr()
    sep = (partitioner or FlowPartitioner())(sub, beta, rng)
    glob = vertices.tolist()
    return Separator(
        sorted(glob[i] for i in sep.cut),
        sorted(glob[i] for i in sep.side_a),
        sorted(glob[i] for i in sep.side_b),
    )


def find_balanced_separator(
    graph: Graph,
    vertices: Sequence[int] | None = None,
    beta: float = 0.2,
    seed: int = 0,
    restarts: int = 2,
) -> Separator:
    """Balanced vertex separator of G[vertices] (all of G by default).

    The result may be degenerate (an empty side) when no separator with two
    non-empty sides exists, e.g. on a clique.
    """
    if not 0 < beta <= 0.5:
        raise ValueError("beta must lie in (0, 0.5]")
    vs = np.arange(graph.n) if vertices is None else np.array(sorted(vertices), dtype=np.int64)
    if len(vs) == 0:
        raise ValueError("empty vertex set")
    return separate_subgraph(
        to_csr(graph, weighted=False), vs, beta, np.random.default_rng(seed), FlowPartitioner(restarts)
    )
