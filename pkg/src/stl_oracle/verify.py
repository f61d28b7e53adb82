"""Oracle checks behind ``stl verify``: static, dynamic and hierarchy modes."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import Graph, UpdateEvent, UpdateKind, apply_update, dijkstra_restricted
from .hierarchy import build_hierarchy, verify_hierarchy
from .index import STLIndex
from .label_search import ls_decrease, ls_increase
from .labelling import Labelling, query_from, rebuild_reference
from .pareto import pareto_decrease, pareto_increase


@dataclass
class VerifyReport:
    mode: str
    ok: bool = True
    checked: int = 0
    mismatches: int = 0
    detail: str = ""
    counterexample: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def fail(self, detail: str, counterexample: dict) -> VerifyReport:
        if self.ok:
            self.ok = False
            self.detail = detail
            self.counterexample = counterexample
        self.mismatches += 1
        return self

    def lines(self) -> list[str]:
        out = [f"mode={self.mode} result={'pass' if self.ok else 'fail'} checked={self.checked} mismatches={self.mismatches}"]
        if not self.ok:
            out.append(f"first_failure: {self.detail}")
        return out


def _graph_payload(graph: Graph) -> dict:
    return {"n": graph.n, "edges": [list(e) for e in graph.edges()]}


def _params(ix: STLIndex) -> dict:
    h = ix.hierarchy
    return {"beta": h.beta, "leaf_threshold": h.leaf_threshold, "partition_seed": h.seed, "restarts": ix.restarts}


def check_labels(graph: Graph, hierarchy, labelling: Labelling) -> tuple[int, int, int, int] | None:
    """First (v, i, expected, got) where the labelling differs from a fresh rebuild."""
    return rebuild_reference(graph, hierarchy).first_difference(labelling)


def verify_static(ix: STLIndex, samples: int | None = None, seed: int = 0) -> VerifyReport:
    """Label entries against a rebuild, then queries against Dijkstra.

    ``samples=None`` checks all sources; otherwise ``samples`` random sources,
    each against every target.
    """
    rep = VerifyReport("static")
    g, h, lab = ix.graph, ix.hierarchy, ix.labelling
    diff = check_labels(g, h, lab)
    rep.checked += lab.total_entries
    if diff is not None:
        v, i, want, got = diff
        rep.fail(
            f"label entry v={v} i={i} expected={want} got={got}",
            {"kind": "label", "v": v, "i": i, "expected": want, "got": got, "graph": _graph_payload(g), **_params(ix)},
        )
        return rep
    if samples is None or samples >= g.n:
        sources = list(range(g.n))
    else:
        sources = random.Random(seed).sample(range(g.n), samples)
    P = lab.padded()
    for s in sources:
        want = np.array(dijkstra_restricted(g, s), dtype=np.int64)
        got = query_from(lab, h, s, P)
        rep.checked += g.n
        bad = np.flatnonzero(want != got)
        if bad.size:
            t = int(bad[0])
            rep.mismatches += int(bad.size) - 1
            rep.fail(
                f"query s={s} t={t} expected={int(want[t])} got={int(got[t])}",
                {"kind": "query", "s": s, "t": t, "expected": int(want[t]), "got": int(got[t]),
                 "graph": _graph_payload(g), **_params(ix)},
            )
    return rep


def random_updates(graph: Graph, count: int, seed: int, factor: float = 2.0) -> list[tuple[int, int, int]]:
    """Update script mixing increase-by-factor, restore and fresh decreases.

    Returns (u, v, new_weight) triples that are valid when applied in order to ``graph``.
    """
    rng = random.Random(seed)
    g = graph.copy()
    edges = [(u, v) for u, v, _ in g.edges()]
    raised: dict[tuple[int, int], int] = {}
    out = []
    if not edges:
        return out
    while len(out) < count:
        r = rng.random()
        if raised and r < 0.4:
            key = rng.choice(sorted(raised))
            nw = raised.pop(key)
        elif r < 0.75:
            key = rng.choice(edges)
            w = g.weight(*key)
            nw = min(int(round(factor * w)), (1 << 31) - 1)
            raised.setdefault(key, w)
        else:
            key = rng.choice(edges)
            w = g.weight(*key)
            nw = rng.randint(0, w) if w else 0
        g.set_weight(key[0], key[1], nw)
        out.append((key[0], key[1], nw))
    return out


Maintainer = Callable[[Graph, object, Labelling, UpdateEvent], object]


def _ls(graph, h, lab, ev):
    return (ls_decrease if ev.kind is UpdateKind.DECREASE else ls_increase)(graph, h, lab, [ev])


def _pareto(graph, h, lab, ev):
    return (pareto_decrease if ev.kind is UpdateKind.DECREASE else pareto_increase)(graph, h, lab, ev)


FAMILIES: dict[str, Maintainer] = {"label-search": _ls, "pareto": _pareto}


def verify_dynamic(ix: STLIndex, updates: int = 500, seed: int = 0, rebuild_every: int = 1) -> VerifyReport:
    """Apply a random update script with both families on private copies and compare
    each against ``rebuild_reference`` (every ``rebuild_every`` updates) and each other."""
    rep = VerifyReport("dynamic")
    g = ix.graph.copy()
    h = ix.hierarchy
    labs = {name: ix.labelling.copy() for name in FAMILIES}
    script = random_updates(g, updates, seed)
    applied: list[list[int]] = []
    for step, (u, v, w) in enumerate(script):
        ev = UpdateEvent(u, v, w)
        apply_update(g, ev)
        applied.append([u, v, w])
        if ev.kind is UpdateKind.NOOP:
            continue
        for name, fn in FAMILIES.items():
            fn(g, h, labs[name], ev)
        rep.checked += 1
        check = step % rebuild_every == 0 or step == len(script) - 1
        ref = rebuild_reference(g, h) if check else None
        for name, lab in labs.items():
            other = ref if ref is not None else labs["label-search"]
            diff = other.first_difference(lab)
            if diff is not None:
                vv, i, want, got = diff
                rep.fail(
                    f"{name} {ev.kind.value} at step {step} on edge {ev.key}: v={vv} i={i} expected={want} got={got}",
                    {"kind": "dynamic", "algo": name, "step": step, "seed": seed, "entry": [vv, i, want, got],
                     "graph": _graph_payload(ix.graph), "updates": applied, **_params(ix)},
                )
                return rep
    return rep


def verify_hierarchy_mode(ix: STLIndex, seed: int = 0) -> VerifyReport:
    """verify_hierarchy plus structural stability: rebuilding with random weights gives the same tree."""
    rep = VerifyReport("hierarchy")
    r = verify_hierarchy(ix.graph, ix.hierarchy)
    rep.checked += 1
    if not r:
        return rep.fail(f"{r.check}: {r.detail}", {"kind": "hierarchy", "check": r.check,
                                                  "counterexample": list(r.counterexample),
                                                  "graph": _graph_payload(ix.graph), **_params(ix)})
    g2 = ix.graph.copy()
    rng = random.Random(seed)
    for u, v, _ in list(g2.edges()):
        g2.set_weight(u, v, rng.randint(0, 1000))
    h = ix.hierarchy
    h2 = build_hierarchy(g2, beta=h.beta, leaf_threshold=h.leaf_threshold, seed=h.seed, restarts=ix.restarts)
    rep.checked += 1
    if not h2.structure_equal(h):
        rep.fail("hierarchy changed after reweighting", {"kind": "stability", "graph": _graph_payload(ix.graph), **_params(ix)})
    return rep


def dump_counterexample(rep: VerifyReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(rep.counterexample, fh, indent=1)


def replay(counterexample: dict) -> VerifyReport:
    """Rebuild the index described by a dynamic counterexample and re-run its update prefix."""
    g = Graph.from_edges(counterexample["graph"]["n"], counterexample["graph"]["edges"])
    ix = STLIndex.build(g, counterexample["beta"], counterexample["leaf_threshold"],
                        counterexample["partition_seed"], counterexample["restarts"])
    rep = VerifyReport("replay")
    labs = {name: ix.labelling.copy() for name in FAMILIES}
    for step, (u, v, w) in enumerate(counterexample.get("updates", [])):
        ev = UpdateEvent(u, v, w)
        apply_update(g, ev)
        if ev.kind is UpdateKind.NOOP:
            continue
        for name, fn in FAMILIES.items():
            fn(g, ix.hierarchy, labs[name], ev)
        rep.checked += 1
    ref = rebuild_reference(g, ix.hierarchy)
    for name, lab in labs.items():
        diff = ref.first_difference(lab)
        if diff is not None:
            rep.fail(f"{name}: v={diff[0]} i={diff[1]} expected={diff[2]} got={diff[3]}", {"algo": name})
    return rep

