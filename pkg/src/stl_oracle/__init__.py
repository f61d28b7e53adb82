"""Dynamic shortest-path distance oracle built on stable tree labelling."""
from __future__ import annotations

from .graph import INF, Graph, UpdateEvent, UpdateKind, apply_update, read_dimacs
from .hierarchy import StableTreeHierarchy, build_hierarchy, verify_hierarchy
from .index import STLIndex
from .label_search import ls_decrease, ls_increase, ls_repair
from .labelling import Labelling, build_labels, query, rebuild_reference
from .maintenance import apply_updates
from .pareto import pareto_decrease, pareto_increase, pareto_repair

__all__ = [
    "INF", "Graph", "UpdateEvent", "UpdateKind", "apply_update", "read_dimacs",
    "StableTreeHierarchy", "build_hierarchy", "verify_hierarchy",
    "STLIndex", "Labelling", "build_labels", "query", "rebuild_reference",
    "ls_decrease", "ls_increase", "ls_repair",
    "pareto_decrease", "pareto_increase", "pareto_repair", "apply_updates",
]
