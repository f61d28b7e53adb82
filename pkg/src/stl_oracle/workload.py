"""Update batches and distance-stratified query sets for benchmarking.

Distances are in weight units; ``l_min`` defaults to 1000 of them.  ``l_max``
is the largest finite distance seen from a sample of sources, and stratum i
holds pairs with distance in ``(l_min * x**(i-1), l_min * x**i]`` where
``x = (l_max / l_min) ** (1 / strata)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .graph import MAX_WEIGHT, Graph, UpdateEvent, to_csr

log = logging.getLogger(__name__)


@dataclass
class Workload:
    increase_batches: list[list[UpdateEvent]] = field(default_factory=list)
    restore_batches: list[list[UpdateEvent]] = field(default_factory=list)
    q_random: list[tuple[int, int]] = field(default_factory=list)
    strata: list[list[tuple[int, int]]] = field(default_factory=list)
    bounds: list[tuple[float, float]] = field(default_factory=list)
    l_min: float = 1000.0
    l_max: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def updates(self) -> list[UpdateEvent]:
        """All batches interleaved as applied: increase batch k, then its restore."""
        out = []
        for inc, res in zip(self.increase_batches, self.restore_batches):
            out.extend(inc)
            out.extend(res)
        return out


def sample_update_batches(
    graph: Graph, batches: int, batch_size: int, factor: float, rng: np.random.Generator
) -> tuple[list[list[UpdateEvent]], list[list[UpdateEvent]], list[str]]:
    """B batches of K distinct edges each, raised from phi to ``factor * phi``, plus restores."""
    edges = list(graph.edges())
    warnings = []
    k = batch_size
    if k > len(edges):
        warnings.append(f"batch size {k} exceeds edge count {len(edges)}; using {len(edges)}")
        k = len(edges)
    inc, res = [], []
    for _ in range(batches):
        pick = rng.choice(len(edges), size=k, replace=False) if k else []
        b_inc, b_res = [], []
        for j in sorted(int(x) for x in pick):
            u, v, w = edges[j]
            nw = min(MAX_WEIGHT, int(round(factor * w)))
            b_inc.append(UpdateEvent(u, v, nw))
            b_res.append(UpdateEvent(u, v, w))
        inc.append(b_inc)
        res.append(b_res)
    return inc, res, warnings


def estimate_l_max(graph: Graph, rng: np.random.Generator, sources: int = 64) -> float:
    src = rng.choice(graph.n, size=min(sources, graph.n), replace=False)
    d = dijkstra(to_csr(graph), directed=False, indices=src)
    finite = d[np.isfinite(d)]
    return float(finite.max()) if finite.size else 0.0


def stratum_bounds(l_min: float, l_max: float, strata: int) -> list[tuple[float, float]]:
    if l_max <= l_min:
        return [(l_min, l_min)] * strata
    x = (l_max / l_min) ** (1.0 / strata)
    return [(l_min * x ** (i - 1), l_min * x ** i) for i in range(1, strata + 1)]


def stratified_pairs(
    graph: Graph,
    bounds: list[tuple[float, float]],
    per_stratum: int,
    rng: np.random.Generator,
    budget_factor: int = 1000,
    sources_per_round: int = 16,
) -> tuple[list[list[tuple[int, int]]], list[str]]:
    """Rejection-sample pairs into strata; each stratum may draw at most
    ``budget_factor * per_stratum`` candidate pairs."""
    csr = to_csr(graph)
    n = graph.n
    out: list[list[tuple[int, int]]] = [[] for _ in bounds]
    budget = budget_factor * per_stratum
    drawn = 0
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    # every stratum sees every candidate, so one shared counter is the per-stratum draw count
    targets_per_source = max(1, min(n, 4 * per_stratum))
    while drawn < budget and any(len(s) < per_stratum for s in out) and n > 1:
        src = rng.integers(0, n, size=sources_per_round)
        rows = dijkstra(csr, directed=False, indices=src)
        for s, row in zip(src.tolist(), rows):
            take = min(targets_per_source, budget - drawn)
            if take <= 0:
                break
            t = rng.integers(0, n, size=take)
            drawn += take
            d = row[t]
            for i in range(len(bounds)):
                need = per_stratum - len(out[i])
                if need <= 0:
                    continue
                hit = t[(d > lo[i]) & (d <= hi[i]) & (t != s)]
                out[i].extend((s, int(x)) for x in hit[:need].tolist())
    warnings = []
    for i, s in enumerate(out, start=1):
        if len(s) < per_stratum:
            warnings.append(f"stratum Q_{i} holds {len(s)} of {per_stratum} pairs after {drawn} draws")
    return out, warnings


def gen_workload(
    graph: Graph,
    batches: int = 10,
    batch_size: int = 1000,
    factor: float = 2.0,
    seed: int = 0,
    query_strata: int = 10,
    per_stratum: int = 10000,
    random_queries: int = 10000,
    l_min: float = 1000.0,
) -> Workload:
    """Deterministic in ``seed``. Unfillable strata come back partial with a warning."""
    if factor < 0 or not math.isfinite(factor):
        raise ValueError("factor must be a non-negative finite number")
    rng = np.random.default_rng(seed)
    wl = Workload(l_min=l_min)
    wl.increase_batches, wl.restore_batches, warns = sample_update_batches(graph, batches, batch_size, factor, rng)
    wl.warnings.extend(warns)
    if graph.n:
        pairs = rng.integers(0, graph.n, size=(random_queries, 2))
        wl.q_random = [(int(s), int(t)) for s, t in pairs]
    if query_strata > 0 and graph.n > 1:
        wl.l_max = estimate_l_max(graph, rng)
        wl.bounds = stratum_bounds(l_min, wl.l_max, query_strata)
        wl.strata, warns = stratified_pairs(graph, wl.bounds, per_stratum, rng)
        wl.warnings.extend(warns)
    for w in wl.warnings:
        log.warning(w)
    return wl


def _write_pairs(path: Path, pairs) -> None:
    path.write_text("".join(f"{s + 1} {t + 1}\n" for s, t in pairs))


def _write_updates(path: Path, events) -> None:
    path.write_text("".join(f"{e.u + 1} {e.v + 1} {e.new_weight}\n" for e in events))


def write_workload(wl: Workload, out_dir: str | Path) -> list[Path]:
    """Write 1-based text files; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for k, (inc, res) in enumerate(zip(wl.increase_batches, wl.restore_batches), start=1):
        for tag, events in (("increase", inc), ("restore", res)):
            p = out / f"batch_{k:02d}_{tag}.txt"
            _write_updates(p, events)
            written.append(p)
    p = out / "updates.txt"
    _write_updates(p, wl.updates())
    written.append(p)
    p = out / "q_random.txt"
    _write_pairs(p, wl.q_random)
    written.append(p)
    for i, pairs in enumerate(wl.strata, start=1):
        p = out / f"q_{i:02d}.txt"
        _write_pairs(p, pairs)
        written.append(p)
    lines = [f"l_min={wl.l_min}", f"l_max={wl.l_max}"]
    lines += [f"stratum={i} lo={lo} hi={hi} pairs={len(s)}" for i, ((lo, hi), s) in enumerate(zip(wl.bounds, wl.strata), 1)]
    lines += [f"warning={w!r}" for w in wl.warnings]
    p = out / "workload.txt"
    p.write_text("\n".join(lines) + "\n")
    written.append(p)
    return written
