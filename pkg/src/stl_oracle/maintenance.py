"""Apply a stream of edge-weight updates to a graph and keep its labelling exact."""
from __future__ import annotations

from typing import Iterable, Iterator

from .graph import Graph, UpdateEvent, UpdateKind, apply_update
from .hierarchy import StableTreeHierarchy
from .label_search import ls_decrease, ls_increase
from .labelling import Labelling
from .pareto import pareto_decrease, pareto_increase
from .stats import UpdateStats

ALGORITHMS = ("label-search", "pareto")


def group_batches(events: Iterable[UpdateEvent], graph: Graph) -> Iterator[list[UpdateEvent]]:
    """Split ``events`` into runs of one kind on distinct edges.

    Classification is against the weights the graph would have after the
    preceding events, so the graph is not modified here.
    """
    pending: dict[tuple[int, int], int] = {}
    batch: list[UpdateEvent] = []
    kind = None
    for ev in events:
        key = ev.key
        old = pending[key] if key in pending else graph.weight(ev.u, ev.v)
        k = UpdateKind.of(old, ev.new_weight)
        pending[key] = ev.new_weight
        if k is UpdateKind.NOOP:
            continue
        if batch and (k is not kind or any(e.key == key for e in batch)):
            yield batch
            batch = []
        kind = k
        batch.append(ev)
    if batch:
        yield batch


def apply_updates(
    graph: Graph,
    hierarchy: StableTreeHierarchy,
    labelling: Labelling,
    events: Iterable[UpdateEvent],
    algo: str = "label-search",
    batch: bool = False,
) -> list[UpdateStats]:
    """Apply ``events`` in order; returns one stats record per maintenance call.

    With ``batch`` and label search, consecutive same-kind updates on distinct
    edges are maintained together.  Pareto search is always one update at a time.
    No-op updates change nothing and produce no record.
    """
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
    out: list[UpdateStats] = []
    if batch and algo == "label-search":
        events = list(events)
        for group in group_batches(events, graph):
            for ev in group:
                apply_update(graph, ev)
            fn = ls_decrease if group[0].kind is UpdateKind.DECREASE else ls_increase
            out.append(fn(graph, hierarchy, labelling, group))
        for ev in events:
            if ev.old_weight is None:  # dropped no-op
                ev.old_weight = ev.new_weight
        return out
    for ev in events:
        apply_update(graph, ev)
        if ev.kind is UpdateKind.NOOP:
            continue
        if algo == "pareto":
            fn = pareto_decrease if ev.kind is UpdateKind.DECREASE else pareto_increase
            out.append(fn(graph, hierarchy, labelling, ev))
        else:
            fn = ls_decrease if ev.kind is UpdateKind.DECREASE else ls_increase
            out.append(fn(graph, hierarchy, labelling, [ev]))
    return out
