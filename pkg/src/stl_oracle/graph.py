"""Undirected weighted graph, DIMACS ingestion and the restricted-Dijkstra oracle."""
from __future__ import annotations

import gzip
import heapq
import io
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator, TextIO

# Distances are int64 on disk and in numpy views; INF + INF must still fit.
INF = (1 << 62) - 1
MAX_WEIGHT = (1 << 31) - 1


def sat_add(a: int, b: int) -> int:
    s = a + b
    return INF if s >= INF else s


class DimacsError(ValueError):
    """Malformed DIMACS input. ``lineno`` is 1-based (0 when not line-specific)."""

    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


class DimacsRangeError(DimacsError):
    pass


class DimacsDomainError(DimacsError):
    pass


class EdgeNotFound(KeyError):
    pass


class UpdateKind(str, Enum):
    DECREASE = "decrease"
    INCREASE = "increase"
    NOOP = "noop"

    @classmethod
    def of(cls, old: int, new: int) -> UpdateKind:
        if new < old:
            return cls.DECREASE
        if new > old:
            return cls.INCREASE
        return cls.NOOP


@dataclass
class UpdateEvent:
    """Set the weight of existing edge {u, v} to ``new_weight``.

    ``old_weight`` is filled in by :func:`apply_update`.
    """

    u: int
    v: int
    new_weight: int
    old_weight: int | None = None

    @property
    def kind(self) -> UpdateKind:
        if self.old_weight is None:
            raise ValueError("update has not been applied yet; kind is unknown")
        return UpdateKind.of(self.old_weight, self.new_weight)

    @property
    def key(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


class Graph:
    """Adjacency-list graph with integer weights.

    Parallel edges collapse to the minimum weight and self-loops are dropped,
    so every unordered pair maps to exactly one adjacency slot on each side.
    """

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = n
        self.nbrs: list[list[int]] = [[] for _ in range(n)]
        self.wts: list[list[int]] = [[] for _ in range(n)]
        self._slot: dict[tuple[int, int], tuple[int, int]] = {}

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]]) -> Graph:
        g = cls(n)
        for u, v, w in edges:
            g.add_edge(u, v, w)
        return g

    def add_edge(self, u: int, v: int, w: int) -> None:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError(f"edge ({u}, {v}) out of range for n={self.n}")
        if w < 0:
            raise ValueError(f"negative weight {w} on edge ({u}, {v})")
        if w > MAX_WEIGHT:
            raise ValueError(f"weight {w} exceeds {MAX_WEIGHT}")
        if u == v:
            return
        key = (u, v) if u < v else (v, u)
        slots = self._slot.get(key)
        if slots is not None:
            su, sv = slots
            if w < self.wts[key[0]][su]:
                self.wts[key[0]][su] = w
                self.wts[key[1]][sv] = w
            return
        a, b = key
        self._slot[key] = (len(self.nbrs[a]), len(self.nbrs[b]))
        self.nbrs[a].append(b)
        self.wts[a].append(w)
        self.nbrs[b].append(a)
        self.wts[b].append(w)

    @property
    def m(self) -> int:
        return len(self._slot)

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._slot

    def weight(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        try:
            su, _ = self._slot[key]
        except KeyError:
            raise EdgeNotFound(f"no edge between {u} and {v}") from None
        return self.wts[key[0]][su]

    def set_weight(self, u: int, v: int, w: int) -> int:
        if w < 0:
            raise ValueError(f"negative weight {w}")
        if w > MAX_WEIGHT:
            raise ValueError(f"weight {w} exceeds {MAX_WEIGHT}")
        key = (u, v) if u < v else (v, u)
        try:
            su, sv = self._slot[key]
        except KeyError:
            raise EdgeNotFound(f"no edge between {u} and {v}") from None
        old = self.wts[key[0]][su]
        self.wts[key[0]][su] = w
        self.wts[key[1]][sv] = w
        return old

    def neighbors(self, v: int) -> Iterator[tuple[int, int]]:
        return zip(self.nbrs[v], self.wts[v])

    def degree(self, v: int) -> int:
        return len(self.nbrs[v])

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Each undirected edge once, as (u, v, w) with u < v, in insertion order."""
        for (a, b), (sa, _) in self._slot.items():
            yield a, b, self.wts[a][sa]

    def copy(self) -> Graph:
        g = Graph(self.n)
        g.nbrs = [list(x) for x in self.nbrs]
        g.wts = [list(x) for x in self.wts]
        g._slot = dict(self._slot)
        return g

    def structure_key(self) -> tuple:
        """Hashable description of (V, E) that ignores weights."""
        return (self.n, tuple(tuple(x) for x in self.nbrs))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.nbrs == other.nbrs and self.wts == other.wts

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def apply_update(graph: Graph, update: UpdateEvent) -> int:
    """Write ``update.new_weight`` to the edge and return (and record) the old weight."""
    old = graph.set_weight(update.u, update.v, update.new_weight)
    update.old_weight = old
    return old


def parse_dimacs(stream: Iterable[str]) -> Graph:
    """Parse a DIMACS shortest-path ``.gr`` stream into an undirected :class:`Graph`.

    Arc pairs (u, v) / (v, u) are merged; parallel arcs keep the minimum weight.
    """
    g: Graph | None = None
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "p":
            if g is not None:
                raise DimacsError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] != "sp":
                raise DimacsError(f"expected 'p sp <n> <m>', got {line!r}", lineno)
            try:
                n = int(parts[2])
                int(parts[3])
            except ValueError:
                raise DimacsError(f"non-integer problem sizes in {line!r}", lineno) from None
            if n < 0:
                raise DimacsDomainError("negative vertex count", lineno)
            g = Graph(n)
        elif tag == "a":
            if g is None:
                raise DimacsError("arc line before problem line", lineno)
            if len(parts) != 4:
                raise DimacsError(f"expected 'a <u> <v> <w>', got {line!r}", lineno)
            try:
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"non-integer field in {line!r}", lineno) from None
            if not (1 <= u <= g.n and 1 <= v <= g.n):
                raise DimacsRangeError(f"vertex id out of [1, {g.n}] in {line!r}", lineno)
            if w < 0:
                raise DimacsDomainError(f"negative weight in {line!r}", lineno)
            if w > MAX_WEIGHT:
                raise DimacsDomainError(f"weight exceeds {MAX_WEIGHT} in {line!r}", lineno)
            g.add_edge(u - 1, v - 1, w)
        else:
            raise DimacsError(f"unknown line type {tag!r}", lineno)
    if g is None:
        raise DimacsError("missing problem line")
    return g


def _open_text(path: str | Path) -> TextIO:
    path = Path(path)
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="ascii")
    return open(path, encoding="ascii")


def read_dimacs(path: str | Path) -> Graph:
    with _open_text(path) as fh:
        return parse_dimacs(fh)


def write_dimacs(graph: Graph, fh: TextIO) -> None:
    fh.write(f"p sp {graph.n} {2 * graph.m}\n")
    for u, v, w in graph.edges():
        fh.write(f"a {u + 1} {v + 1} {w}\n")
        fh.write(f"a {v + 1} {u + 1} {w}\n")


def _data_lines(stream: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line[0] in "#c":
            continue
        yield lineno, line.split()


def parse_updates(stream: Iterable[str], n: int) -> list[UpdateEvent]:
    """Lines ``<u> <v> <new_weight>`` with 1-based ids."""
    return [ev for _, ev in iter_updates(stream, n)]


def iter_updates(stream: Iterable[str], n: int) -> Iterator[tuple[int, UpdateEvent]]:
    """Like :func:`parse_updates` but yields ``(lineno, event)``."""
    for lineno, parts in _data_lines(stream):
        if len(parts) != 3:
            raise DimacsError(f"expected '<u> <v> <w>', got {' '.join(parts)!r}", lineno)
        try:
            u, v, w = (int(x) for x in parts)
        except ValueError:
            raise DimacsError(f"non-integer field in {' '.join(parts)!r}", lineno) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise DimacsRangeError(f"vertex id out of [1, {n}]", lineno)
        if w < 0:
            raise DimacsDomainError("negative weight", lineno)
        if w > MAX_WEIGHT:
            raise DimacsDomainError(f"weight exceeds {MAX_WEIGHT}", lineno)
        yield lineno, UpdateEvent(u - 1, v - 1, w)


def parse_queries(stream: Iterable[str]) -> Iterator[tuple[int, int, int]]:
    """Yield (lineno, s, t) with 1-based ids as written; range checks are the caller's."""
    for lineno, parts in _data_lines(stream):
        if len(parts) != 2:
            raise DimacsError(f"expected '<s> <t>', got {' '.join(parts)!r}", lineno)
        try:
            s, t = int(parts[0]), int(parts[1])
        except ValueError:
            raise DimacsError(f"non-integer field in {' '.join(parts)!r}", lineno) from None
        yield lineno, s, t


def dijkstra_restricted(
    graph: Graph, source: int, allowed: Callable[[int], bool] | None = None
) -> list[int]:
    """Distances from ``source`` through vertices satisfying ``allowed`` only.

    Unreachable (or disallowed) vertices get INF. ``allowed=None`` means all vertices.
    """
    if allowed is not None and not allowed(source):
        raise ValueError(f"source {source} is not in the allowed set")
    dist = [INF] * graph.n
    dist[source] = 0
    heap = [(0, source)]
    nbrs, wts = graph.nbrs, graph.wts
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        d, v = pop(heap)
        if d > dist[v]:
            continue
        for n, w in zip(nbrs[v], wts[v]):
            nd = d + w
            if nd < dist[n] and (allowed is None or allowed(n)):
                dist[n] = nd
                push(heap, (nd, n))
    return dist


def oracle_distance(graph: Graph, s: int, t: int) -> int:
    if s == t:
        return 0
    return dijkstra_restricted(graph, s)[t]


def to_csr(graph: Graph, weighted: bool = True):
    """Symmetric scipy CSR matrix of the graph. Explicit zeros are kept as edges."""
    import numpy as np
    import scipy.sparse as sp

    indptr = np.zeros(graph.n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(x) for x in graph.nbrs])
    indices = np.fromiter((n for row in graph.nbrs for n in row), dtype=np.int64, count=int(indptr[-1]))
    if weighted:
        data = np.fromiter((w for row in graph.wts for w in row), dtype=np.float64, count=int(indptr[-1]))
    else:
        data = np.ones(int(indptr[-1]), dtype=np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(graph.n, graph.n))


def all_pairs_distances(graph: Graph, sources=None):
    """Bulk integer distance matrix via scipy (rows = ``sources``); INF where unreachable."""
    import numpy as np
    from scipy.sparse.csgraph import dijkstra

    d = dijkstra(to_csr(graph), directed=False, indices=sources)
    out = np.full(d.shape, INF, dtype=np.int64)
    finite = np.isfinite(d)
    out[finite] = np.rint(d[finite]).astype(np.int64)
    return out
