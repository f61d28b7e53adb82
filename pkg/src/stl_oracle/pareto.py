"""Update-centric maintenance: two interval-combined Dijkstra searches per update.

A queue entry ``(d, v, [lo, hi])`` stands for a path of length ``d`` from the
search origin to ``v`` that stays inside every ancestor subgraph with index
``<= hi``.  Entries pop by ascending ``d``, then descending ``hi``; the
per-vertex ``level`` (next unprocessed index) discards dominated entries.
"""
from __future__ import annotations

import heapq
import time
from typing import Iterable

from .graph import INF, Graph, UpdateEvent, UpdateKind
from .hierarchy import StableTreeHierarchy
from .labelling import Labelling
from .stats import UpdateStats


def pareto_front(pairs: Iterable[tuple[int, int]]) -> set[tuple[int, int]]:
    """Non-dominated (distance, index) pairs.

    (d', i') dominates (d, i) when d' <= d and i' >= i: a path valid for a
    higher index lies in a smaller subgraph and is valid for every lower one.
    """
    pairs = set(pairs)
    return {
        (d, i) for d, i in pairs
        if not any((d2, i2) != (d, i) and d2 <= d and i2 >= i for d2, i2 in pairs)
    }


class LevelTracker:
    """Per-vertex next-unprocessed index; ``reset`` is O(1) via epoch stamps."""

    __slots__ = ("level", "stamp", "epoch")

    def __init__(self, n: int):
        self.level = [0] * n
        self.stamp = [0] * n
        self.epoch = 0

    def reset(self) -> None:
        self.epoch += 1

    def get(self, v: int) -> int:
        return self.level[v] if self.stamp[v] == self.epoch else 0

    def set(self, v: int, value: int) -> None:
        self.level[v] = value
        self.stamp[v] = self.epoch


_trackers: dict[int, LevelTracker] = {}


def _tracker(n: int) -> LevelTracker:
    t = _trackers.get(n)
    if t is None:
        t = _trackers[n] = LevelTracker(n)
    t.reset()
    return t


def _check(update: UpdateEvent, kind: UpdateKind) -> None:
    if update.kind is not kind:
        raise ValueError(f"expected a {kind.value} update, got {update.kind.value} on {update.key}")


def pareto_decrease(
    graph: Graph,
    hierarchy: StableTreeHierarchy,
    labelling: Labelling,
    update: UpdateEvent,
    trace: list | None = None,
) -> UpdateStats:
    """Single weight decrease; ``graph`` already carries the new weight.

    ``trace``, if given, receives ``(search, d, v, lo, hi, (first, last written index))``
    for every processed (non-discarded) queue entry; (-1, -1) means no write.
    """
    t0 = time.perf_counter()
    _check(update, UpdateKind.DECREASE)
    st = UpdateStats("pareto", "decrease", updates=1)
    touched: set[int] = set()
    written: set[int] = set()
    a, b, w = update.u, update.v, update.new_weight
    for search, (r, r2) in enumerate(((a, b), (b, a))):
        _search_decrease(graph, hierarchy, labelling, r, r2, w, st, touched, written, trace, search)
    st.label_delta = len(written)
    st.vertex_delta = len(touched)
    st.seconds = time.perf_counter() - t0
    return st


def _search_decrease(graph, hierarchy, labelling, r, r2, phi, st, touched, written, trace, search):
    tau, off, L = hierarchy.tau, labelling.offsets, labelling.dist
    nbrs, wts = graph.nbrs, graph.wts
    push, pop = heapq.heappush, heapq.heappop
    tr = _tracker(graph.n)
    level, stamp, epoch = tr.level, tr.stamp, tr.epoch

    o_r = off[r]
    heap = [(phi, -min(tau[r], tau[r2]), r2, 0)]
    st.seeds += 1
    while heap:
        d, neg_hi, v, lo = pop(heap)
        st.pops += 1
        hi = -neg_hi
        if hi > tau[v]:
            hi = tau[v]
        if stamp[v] == epoch and lo < level[v]:
            lo = level[v]
        if lo > hi:
            continue
        level[v] = hi + 1
        stamp[v] = epoch
        st.interval_scan += hi - lo + 1
        o_v = off[v]
        w_lo = w_hi = -1
        for i in range(lo, hi + 1):
            c = d + L[o_r + i]
            if c < L[o_v + i]:
                L[o_v + i] = c
                written.add(o_v + i)
                st.writes += 1
                if w_lo < 0:
                    w_lo = i
                w_hi = i
        if trace is not None:
            trace.append((search, d, v, lo, hi, (w_lo, w_hi)))
        if w_lo >= 0:
            touched.add(v)
            for n, wn in zip(nbrs[v], wts[v]):
                push(heap, (d + wn, -w_hi, n, w_lo))
                st.pushes += 1


def pareto_increase(
    graph: Graph,
    hierarchy: StableTreeHierarchy,
    labelling: Labelling,
    update: UpdateEvent,
    trace: list | None = None,
) -> UpdateStats:
    """Single weight increase; ``graph`` already carries the new weight and
    ``update.old_weight`` the previous one.

    Matches are tested against the values every entry had before this update
    (the first search rewrites entries, including the second search's anchor).
    Matched entries are raised to ``old + delta`` immediately, then the union
    of affected intervals is repaired.
    """
    t0 = time.perf_counter()
    _check(update, UpdateKind.INCREASE)
    st = UpdateStats("pareto", "increase", updates=1)
    delta = update.new_weight - update.old_weight
    snapshot: dict[int, int] = {}
    affected: dict[int, list[int]] = {}
    a, b, w = update.u, update.v, update.old_weight
    for search, (r, r2) in enumerate(((a, b), (b, a))):
        _search_increase(graph, hierarchy, labelling, r, r2, w, delta, snapshot, affected, st, trace, search)
    st.label_delta = len(snapshot)
    st.vertex_delta = len(affected)
    st.affected = len(affected)
    pareto_repair(graph, hierarchy, labelling, affected, st)
    st.seconds = time.perf_counter() - t0
    return st


def _search_increase(graph, hierarchy, labelling, r, r2, phi, delta, snapshot, affected, st, trace, search):
    tau, off, L = hierarchy.tau, labelling.offsets, labelling.dist
    nbrs, wts = graph.nbrs, graph.wts
    push, pop = heapq.heappush, heapq.heappop
    tr = _tracker(graph.n)
    level, stamp, epoch = tr.level, tr.stamp, tr.epoch
    old = snapshot.get

    o_r = off[r]
    heap = [(phi, -min(tau[r], tau[r2]), r2, 0)]
    st.seeds += 1
    while heap:
        d, neg_hi, v, lo = pop(heap)
        st.pops += 1
        hi = -neg_hi
        # own entry is 0 and can only be "matched" by a zero-weight cycle
        if hi >= tau[v]:
            hi = tau[v] - 1
        if stamp[v] == epoch and lo < level[v]:
            lo = level[v]
        if lo > hi:
            continue
        level[v] = hi + 1
        stamp[v] = epoch
        st.interval_scan += hi - lo + 1
        o_v = off[v]
        w_lo = w_hi = -1
        for i in range(lo, hi + 1):
            pr = o_r + i
            lr = old(pr, L[pr])
            if lr >= INF:
                continue
            pv = o_v + i
            lv = old(pv, L[pv])
            if d + lr == lv:
                if pv not in snapshot:
                    snapshot[pv] = lv
                L[pv] = lv + delta
                st.writes += 1
                if w_lo < 0:
                    w_lo = i
                w_hi = i
        if trace is not None:
            trace.append((search, d, v, lo, hi, (w_lo, w_hi)))
        if w_lo >= 0:
            for n, wn in zip(nbrs[v], wts[v]):
                push(heap, (d + wn, -w_hi, n, w_lo))
                st.pushes += 1
            iv = affected.get(v)
            if iv is None:
                affected[v] = [w_lo, w_hi]
            else:
                if w_lo < iv[0]:
                    iv[0] = w_lo
                if w_hi > iv[1]:
                    iv[1] = w_hi


def pareto_repair(
    graph: Graph,
    hierarchy: StableTreeHierarchy,
    labelling: Labelling,
    affected: dict[int, list[int]],
    stats: UpdateStats | None = None,
) -> None:
    """Lower covered entries from their current upper bounds to exact distances.

    ``affected`` maps a vertex to an inclusive index interval; covering more
    than the truly changed entries is allowed.
    """
    tau, off, L = hierarchy.tau, labelling.offsets, labelling.dist
    nbrs, wts = graph.nbrs, graph.wts
    push, pop = heapq.heappush, heapq.heappop

    q: list[tuple[int, int, int]] = []
    for v, (lo, hi) in affected.items():
        o_v = off[v]
        for n, wn in zip(nbrs[v], wts[v]):
            o_n = off[n]
            top = hi if hi < tau[n] else tau[n]
            for i in range(lo, top + 1):
                c = L[o_n + i] + wn
                if c < L[o_v + i]:
                    q.append((c, v, i))
    heapq.heapify(q)

    pops = writes = 0
    get = affected.get
    while q:
        d, v, i = pop(q)
        pops += 1
        p = off[v] + i
        if d < L[p]:
            L[p] = d
            writes += 1
            for n, wn in zip(nbrs[v], wts[v]):
                iv = get(n)
                if iv is not None and iv[0] <= i <= iv[1]:
                    c = d + wn
                    if c < L[off[n] + i]:
                        push(q, (c, n, i))
    if stats is not None:
        stats.repair_pops += pops
        stats.pops += pops
        stats.writes += writes
