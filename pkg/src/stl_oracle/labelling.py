"""Stable tree labelling: per-vertex distances to every ancestor, each measured
inside that ancestor's descendant subgraph, stored in one flat array."""
from __future__ import annotations

import heapq
import os
from array import array
from concurrent.futures import ProcessPoolExecutor
from itertools import islice
from operator import add

import numpy as np

from .graph import INF, Graph, dijkstra_restricted
from .hierarchy import StableTreeHierarchy


class Labelling:
    """Flat ``int64`` distance store; vertex v owns ``dist[offsets[v]:offsets[v+1]]``."""

    __slots__ = ("offsets", "dist")

    def __init__(self, offsets: array, dist: array):
        self.offsets = offsets
        self.dist = dist

    @classmethod
    def empty(cls, hierarchy: StableTreeHierarchy) -> Labelling:
        offsets = array("q", [0])
        total = 0
        for t in hierarchy.tau:
            total += t + 1
            offsets.append(total)
        dist = array("q", [INF]) * total
        for v, t in enumerate(hierarchy.tau):
            dist[offsets[v] + t] = 0
        return cls(offsets, dist)

    @property
    def n(self) -> int:
        return len(self.offsets) - 1

    @property
    def total_entries(self) -> int:
        return len(self.dist)

    @property
    def nbytes(self) -> int:
        return self.dist.itemsize * len(self.dist) + self.offsets.itemsize * len(self.offsets)

    def label_len(self, v: int) -> int:
        return self.offsets[v + 1] - self.offsets[v]

    def label(self, v: int) -> list[int]:
        return self.dist[self.offsets[v]:self.offsets[v + 1]].tolist()

    def entry(self, v: int, i: int) -> int:
        assert 0 <= i < self.label_len(v), f"label index {i} out of range for vertex {v}"
        return self.dist[self.offsets[v] + i]

    def set_entry(self, v: int, i: int, d: int) -> None:
        assert 0 <= i < self.label_len(v), f"label index {i} out of range for vertex {v}"
        assert 0 <= d <= INF
        self.dist[self.offsets[v] + i] = d

    def copy(self) -> Labelling:
        return Labelling(array("q", self.offsets), array("q", self.dist))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Labelling):
            return NotImplemented
        return self.offsets == other.offsets and self.dist == other.dist

    def first_difference(self, other: Labelling) -> tuple[int, int, int, int] | None:
        """(v, i, self value, other value) of the first differing entry, or None."""
        if self.offsets != other.offsets:
            raise ValueError("labellings have different shapes")
        if self.dist == other.dist:
            return None
        a, b = self.as_numpy(), other.as_numpy()
        p = int(np.flatnonzero(a != b)[0])
        v = int(np.searchsorted(np.frombuffer(self.offsets, dtype=np.int64), p, side="right")) - 1
        return v, p - self.offsets[v], int(a[p]), int(b[p])

    def as_numpy(self) -> np.ndarray:
        """Zero-copy int64 view of the flat distance array."""
        return np.frombuffer(self.dist, dtype=np.int64)

    def padded(self) -> np.ndarray:
        """(n, max label length) matrix, INF-padded."""
        off = np.frombuffer(self.offsets, dtype=np.int64)
        lens = np.diff(off)
        width = int(lens.max()) if len(lens) else 0
        cols = np.arange(width)
        mask = cols[None, :] < lens[:, None]
        out = np.full((self.n, width), INF, dtype=np.int64)
        out[mask] = self.as_numpy()[(off[:-1, None] + cols[None, :])[mask]]
        return out


def _ancestor_column(graph: Graph, tau: list[int], r: int) -> list[tuple[int, int]]:
    """Dijkstra from r inside DESC(r); neighbours with tau > tau(r) are exactly DESC(r) minus r."""
    tr = tau[r]
    best = {r: 0}
    out = []
    heap = [(0, r)]
    nbrs, wts = graph.nbrs, graph.wts
    while heap:
        d, v = heapq.heappop(heap)
        if d > best[v]:
            continue
        out.append((v, d))
        for n, w in zip(nbrs[v], wts[v]):
            if tau[n] > tr:
                nd = d + w
                if nd < best.get(n, INF):
                    best[n] = nd
                    heapq.heappush(heap, (nd, n))
    return out


_worker_state: tuple[Graph, list[int]] | None = None


def _init_worker(graph: Graph, tau: list[int]) -> None:
    global _worker_state
    _worker_state = (graph, tau)


def _columns_chunk(roots: list[int]) -> list[tuple[int, list[tuple[int, int]]]]:
    graph, tau = _worker_state
    return [(r, _ancestor_column(graph, tau, r)) for r in roots]


def _chunks(seq, size):
    it = iter(seq)
    while chunk := list(islice(it, size)):
        yield chunk


def build_labels(graph: Graph, hierarchy: StableTreeHierarchy, threads: int = 1) -> Labelling:
    """One restricted Dijkstra per vertex r, writing column tau(r) of every label in DESC(r)."""
    lab = Labelling.empty(hierarchy)
    tau = hierarchy.tau
    off, dist = lab.offsets, lab.dist
    if threads <= 1 or graph.n < 2048:
        for r in range(graph.n):
            tr = tau[r]
            for v, d in _ancestor_column(graph, tau, r):
                dist[off[v] + tr] = d
        return lab
    with ProcessPoolExecutor(threads, initializer=_init_worker, initargs=(graph, tau)) as pool:
        for results in pool.map(_columns_chunk, _chunks(range(graph.n), 512)):
            for r, col in results:
                tr = tau[r]
                for v, d in col:
                    dist[off[v] + tr] = d
    return lab


def rebuild_reference(graph: Graph, hierarchy: StableTreeHierarchy) -> Labelling:
    """From-scratch labelling via explicit DESC(r) sets; deliberately shares no search code
    with :func:`build_labels` so it can serve as the maintenance oracle."""
    lab = Labelling.empty(hierarchy)
    for r in range(graph.n):
        desc = set(hierarchy.descendants(r))
        d = dijkstra_restricted(graph, r, desc.__contains__)
        i = hierarchy.tau[r]
        for v in desc:
            lab.set_entry(v, i, d[v])
    return lab


def query(labelling: Labelling, hierarchy: StableTreeHierarchy, s: int, t: int) -> int:
    if s == t:
        return 0
    k = hierarchy.common_label_prefix_len(s, t)
    if k <= 0:
        return INF
    off, dist = labelling.offsets, labelling.dist
    os_, ot = off[s], off[t]
    best = min(map(add, dist[os_:os_ + k], dist[ot:ot + k]))
    return INF if best >= INF else best


def query_from(
    labelling: Labelling, hierarchy: StableTreeHierarchy, s: int, padded: np.ndarray | None = None
) -> np.ndarray:
    """Vectorised ``query(s, t)`` for every t. Pass ``padded`` to reuse the padded matrix."""
    P = labelling.padded() if padded is None else padded
    width = hierarchy.tau[s] + 1
    k = hierarchy.prefix_lengths_from(s)
    sums = P[:, :width] + P[s, :width]
    sums[np.arange(width)[None, :] >= k[:, None]] = INF
    out = np.minimum(sums.min(axis=1), INF)
    out[s] = 0
    return out


def label_entry(labelling: Labelling, v: int, i: int) -> int:
    return labelling.entry(v, i)


def set_label_entry(labelling: Labelling, v: int, i: int, d: int) -> None:
    labelling.set_entry(v, i, d)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("STL_THREADS", "1")))
    except ValueError:
        return 1
