"""Graph + hierarchy + labelling bundle and its binary file format.

Layout (all integers little-endian)::

    "STL1"
    header      u32 version, i64 n, i64 m, f64 beta, i64 leaf_threshold, i64 seed, i64 restarts
    graph       m x (i64 u, i64 v, i64 w) in edge insertion order
    hierarchy   i64 node count, then per node
                    i64 parent, left, right, level, tau_offset, cut length,
                    ceil(level / 8) bytes of bitstring, cut length x i64 vertex
                then n x i64 node id, n x i64 rank, n x i64 tau
    labelling   (n + 1) x i64 offsets, total x i64 distances
    u32 crc32 of everything before it

Replaying the edge list in order reproduces the adjacency lists slot for slot,
so ``load(save(x))`` restores identical in-memory state.
"""
from __future__ import annotations

import io
import struct
import time
import zlib
from array import array
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .graph import Graph, UpdateEvent
from .hierarchy import StableTreeHierarchy, TreeNode, build_hierarchy
from .labelling import Labelling, build_labels, query
from .maintenance import apply_updates
from .stats import UpdateStats

MAGIC = b"STL1"
VERSION = 1
_HEADER = struct.Struct("<Iqqdqqq")
_NODE = struct.Struct("<qqqqqq")
_I64 = np.dtype("<i8")


class IndexFormatError(ValueError):
    pass


@dataclass
class STLIndex:
    graph: Graph
    hierarchy: StableTreeHierarchy
    labelling: Labelling
    restarts: int = 2
    build_seconds: float = field(default=0.0, compare=False)

    @classmethod
    def build(
        cls,
        graph: Graph,
        beta: float = 0.2,
        leaf_threshold: int = 8,
        seed: int = 0,
        restarts: int = 2,
        threads: int = 1,
    ) -> STLIndex:
        t0 = time.perf_counter()
        h = build_hierarchy(graph, beta=beta, leaf_threshold=leaf_threshold, seed=seed, restarts=restarts)
        lab = build_labels(graph, h, threads=threads)
        return cls(graph, h, lab, restarts, time.perf_counter() - t0)

    def query(self, s: int, t: int) -> int:
        return query(self.labelling, self.hierarchy, s, t)

    def update(self, events: Iterable[UpdateEvent], algo: str = "label-search", batch: bool = False) -> list[UpdateStats]:
        return apply_updates(self.graph, self.hierarchy, self.labelling, events, algo, batch)

    def summary(self) -> dict[str, object]:
        return {
            "n": self.graph.n,
            "m": self.graph.m,
            "height": self.hierarchy.height,
            "depth": self.hierarchy.depth,
            "tree_nodes": len(self.hierarchy.nodes),
            "label_entries": self.labelling.total_entries,
            "label_bytes": self.labelling.nbytes,
            "build_seconds": round(self.build_seconds, 6),
        }

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        _write(self, buf)
        body = buf.getvalue()
        return body + struct.pack("<I", zlib.crc32(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> STLIndex:
        if len(data) < len(MAGIC) + _HEADER.size + 4 or data[:4] != MAGIC:
            raise IndexFormatError("not an STL index (bad magic)")
        body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
        if zlib.crc32(body) != crc:
            raise IndexFormatError("checksum mismatch; index file is corrupt")
        return _read(memoryview(body))

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> STLIndex:
        return cls.from_bytes(Path(path).read_bytes())

    def copy(self) -> STLIndex:
        return STLIndex.from_bytes(self.to_bytes())


def is_index_file(path: str | Path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(4) == MAGIC


def _i64(values) -> bytes:
    return np.asarray(values, dtype=_I64).tobytes()


def _write(ix: STLIndex, out: BinaryIO) -> None:
    g, h, lab = ix.graph, ix.hierarchy, ix.labelling
    out.write(MAGIC)
    out.write(_HEADER.pack(VERSION, g.n, g.m, h.beta, h.leaf_threshold, h.seed, ix.restarts))
    out.write(_i64([x for e in g.edges() for x in e]))
    out.write(_i64([len(h.nodes)]))
    for nd in h.nodes:
        out.write(_NODE.pack(nd.parent, nd.left, nd.right, nd.level, nd.tau_offset, len(nd.cut)))
        out.write(nd.bits.to_bytes((nd.level + 7) // 8, "little"))
        out.write(_i64(nd.cut))
    out.write(_i64(h.node_of))
    out.write(_i64(h.rank))
    out.write(_i64(h.tau))
    out.write(_i64(lab.offsets))
    out.write(_i64(lab.dist))


class _Reader:
    def __init__(self, buf: memoryview):
        self.buf = buf
        self.pos = 0

    def take(self, size: int) -> memoryview:
        if self.pos + size > len(self.buf):
            raise IndexFormatError("truncated index file")
        out = self.buf[self.pos:self.pos + size]
        self.pos += size
        return out

    def unpack(self, st: struct.Struct) -> tuple:
        return st.unpack(self.take(st.size))

    def ints(self, count: int) -> np.ndarray:
        if count < 0:
            raise IndexFormatError("negative length field")
        return np.frombuffer(self.take(8 * count), dtype=_I64)


def _read(body: memoryview) -> STLIndex:
    r = _Reader(body)
    r.take(4)
    version, n, m, beta, leaf_threshold, seed, restarts = r.unpack(_HEADER)
    if version != VERSION:
        raise IndexFormatError(f"unsupported index version {version}")
    g = Graph(n)
    for u, v, w in r.ints(3 * m).reshape(-1, 3).tolist():
        g.add_edge(u, v, w)
    if g.m != m:
        raise IndexFormatError("edge list contains duplicate edges")
    (count,) = r.ints(1).tolist()
    nodes = []
    for nid in range(count):
        parent, left, right, level, tau_offset, ncut = r.unpack(_NODE)
        bits = int.from_bytes(r.take((level + 7) // 8), "little")
        cut = r.ints(ncut).tolist()
        nodes.append(TreeNode(nid, parent, level, bits, cut, tau_offset, left, right))
    node_of = r.ints(n).tolist()
    rank = r.ints(n).tolist()
    tau = r.ints(n).tolist()
    h = StableTreeHierarchy(nodes, node_of, tau, rank, beta, leaf_threshold, seed)
    offsets = array("q", r.ints(n + 1).astype(np.int64).tobytes())
    if offsets[0] != 0 or any(offsets[v + 1] - offsets[v] != tau[v] + 1 for v in range(n)):
        raise IndexFormatError("label offsets disagree with the hierarchy")
    dist = array("q", r.ints(offsets[-1]).astype(np.int64).tobytes())
    if r.pos != len(body):
        raise IndexFormatError("trailing bytes after labelling section")
    return STLIndex(g, h, Labelling(offsets, dist), restarts)
