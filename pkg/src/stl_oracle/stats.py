from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass
class UpdateStats:
    """Work counters for one maintenance call.

    ``label_delta`` is the number of distinct (vertex, ancestor index) pairs
    that entered a search queue; ``vertex_delta`` the number of distinct
    vertices that had at least one label entry written or marked.
    """

    algo: str
    kind: str
    updates: int = 0
    seeds: int = 0
    pops: int = 0
    pushes: int = 0
    writes: int = 0
    label_delta: int = 0
    vertex_delta: int = 0
    affected: int = 0
    interval_scan: int = 0
    repair_pops: int = 0
    seconds: float = 0.0

    def merge(self, other: UpdateStats) -> None:
        for f in fields(self):
            if f.name in ("algo", "kind"):
                continue
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def record(self, **extra) -> str:
        items = {**extra, **asdict(self)}
        return " ".join(f"{k}={_fmt(v)}" for k, v in items.items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def parse_record(line: str) -> dict[str, str]:
    return dict(item.split("=", 1) for item in line.split())
