"""Ancestor-centric maintenance: one pruned Dijkstra per affected ancestor index.

Queues are keyed by ancestor *index* i rather than by ancestor vertex.  Two
ancestors sharing an index lie in disjoint subtrees with no edges between
their descendant sets, and every search only follows neighbours with
``tau > i``, so the searches never mix.
"""
from __future__ import annotations

import heapq
import time
from typing import Iterable, Sequence

from .graph import INF, Graph, UpdateEvent, UpdateKind
from .hierarchy import StableTreeHierarchy
from .labelling import Labelling
from .stats import UpdateStats


def _check_kind(batch: Sequence[UpdateEvent], kind: UpdateKind) -> None:
    for ev in batch:
        if ev.kind is not kind:
            raise ValueError(f"expected only {kind.value} events, got {ev.kind.value} on {ev.key}")


def _oriented(ev: UpdateEvent, tau: list[int]) -> tuple[int, int]:
    """(upper, lower) endpoint: tau[upper] < tau[lower]."""
    a, b = ev.u, ev.v
    return (a, b) if tau[a] < tau[b] else (b, a)


def ls_decrease(
    graph: Graph, hierarchy: StableTreeHierarchy, labelling: Labelling, batch: Sequence[UpdateEvent]
) -> UpdateStats:
    """Weight decreases. ``graph`` already carries the new weights."""
    t0 = time.perf_counter()
    _check_kind(batch, UpdateKind.DECREASE)
    st = UpdateStats("label-search", "decrease", updates=len(batch))
    tau, off, L = hierarchy.tau, labelling.offsets, labelling.dist
    nbrs, wts = graph.nbrs, graph.wts
    push, pop = heapq.heappush, heapq.heappop

    queues: dict[int, list[tuple[int, int]]] = {}
    for ev in batch:
        a, b = _oriented(ev, tau)
        w = ev.new_weight
        oa, ob = off[a], off[b]
        for i in range(tau[a] + 1):
            la, lb = L[oa + i], L[ob + i]
            if la + w < lb:
                push(queues.setdefault(i, []), (la + w, b))
                st.seeds += 1
            elif lb + w < la:
                push(queues.setdefault(i, []), (lb + w, a))
                st.seeds += 1

    enqueued: set[int] = set()
    written: set[int] = set()
    for i in sorted(queues):
        q = queues[i]
        enqueued.update(off[v] + i for _, v in q)
        while q:
            d, v = pop(q)
            st.pops += 1
            p = off[v] + i
            if d < L[p]:
                L[p] = d
                st.writes += 1
                written.add(v)
                for n, w in zip(nbrs[v], wts[v]):
                    if tau[n] > i:
                        nd = d + w
                        pn = off[n] + i
                        if nd < L[pn]:
                            push(q, (nd, n))
                            st.pushes += 1
                            enqueued.add(pn)
    st.label_delta = len(enqueued)
    st.vertex_delta = len(written)
    st.seconds = time.perf_counter() - t0
    return st


def ls_increase(
    graph: Graph, hierarchy: StableTreeHierarchy, labelling: Labelling, batch: Sequence[UpdateEvent]
) -> UpdateStats:
    """Weight increases: mark vertices whose old shortest path to an ancestor used an
    updated edge, then repair each ancestor column from unaffected neighbours."""
    t0 = time.perf_counter()
    _check_kind(batch, UpdateKind.INCREASE)
    st = UpdateStats("label-search", "increase", updates=len(batch))
    tau, off, L = hierarchy.tau, labelling.offsets, labelling.dist
    nbrs, wts = graph.nbrs, graph.wts
    push, pop = heapq.heappush, heapq.heappop

    queues: dict[int, list[tuple[int, int]]] = {}
    for ev in batch:
        a, b = _oriented(ev, tau)
        w = ev.old_weight
        oa, ob = off[a], off[b]
        for i in range(tau[a] + 1):
            la, lb = L[oa + i], L[ob + i]
            if la < INF and la + w == lb:
                push(queues.setdefault(i, []), (lb, b))
                st.seeds += 1
            if i < tau[a] and lb < INF and lb + w == la:
                push(queues.setdefault(i, []), (la, a))
                st.seeds += 1

    enqueued: set[int] = set()
    touched: set[int] = set()
    for i in sorted(queues):
        q = queues[i]
        aff: set[int] = set()
        while q:
            d, v = pop(q)
            st.pops += 1
            if v in aff:
                continue
            aff.add(v)
            enqueued.add(off[v] + i)
            for n, w in zip(nbrs[v], wts[v]):
                if tau[n] > i and d + w == L[off[n] + i]:
                    push(q, (d + w, n))
                    st.pushes += 1
        st.affected += len(aff)
        touched.update(aff)
        ls_repair(graph, hierarchy, labelling, i, aff, st)
    st.label_delta = len(enqueued)
    st.vertex_delta = len(touched)
    st.seconds = time.perf_counter() - t0
    return st


def ls_repair(
    graph: Graph,
    hierarchy: StableTreeHierarchy,
    labelling: Labelling,
    i: int,
    affected: Iterable[int],
    stats: UpdateStats | None = None,
) -> None:
    """Recompute column ``i`` for the affected vertices.

    Each affected vertex starts from its best unaffected neighbour.  The
    neighbour filter is ``tau >= i`` so that a direct edge to the ancestor
    itself (whose own entry is 0) counts.
    """
    tau, off, L = hierarchy.tau, labelling.offsets, labelling.dist
    nbrs, wts = graph.nbrs, graph.wts
    push, pop = heapq.heappush, heapq.heappop
    aff = affected if isinstance(affected, (set, frozenset)) else set(affected)

    for v in aff:
        L[off[v] + i] = INF
    q: list[tuple[int, int]] = []
    for v in aff:
        best = INF
        for n, w in zip(nbrs[v], wts[v]):
            if tau[n] >= i and n not in aff:
                c = L[off[n] + i] + w
                if c < best:
                    best = c
        if best < INF:
            q.append((best, v))
    heapq.heapify(q)

    pops = writes = 0
    while q:
        d, v = pop(q)
        pops += 1
        p = off[v] + i
        if d < L[p]:
            L[p] = d
            writes += 1
            for n, w in zip(nbrs[v], wts[v]):
                if tau[n] > i:
                    nd = d + w
                    if nd < L[off[n] + i]:
                        push(q, (nd, n))
    if stats is not None:
        stats.repair_pops += pops
        stats.pops += pops
        stats.writes += writes
