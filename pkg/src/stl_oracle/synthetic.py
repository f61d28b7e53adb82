"""Seeded test graphs: random connected sparse graphs, grids, paths, stars, cliques."""
from __future__ import annotations

import random

from .graph import Graph


def random_connected(n: int, seed: int, max_weight: int = 100, extra: float = 0.5) -> Graph:
    """Random spanning tree plus ``extra * n`` random chords; weights uniform in [0, max_weight]."""
    rng = random.Random(seed)
    g = Graph(n)
    order = list(range(n))
    rng.shuffle(order)
    for k in range(1, n):
        g.add_edge(order[k], order[rng.randrange(k)], rng.randint(0, max_weight))
    for _ in range(int(extra * n)):
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v and not g.has_edge(u, v):
            g.add_edge(u, v, rng.randint(0, max_weight))
    return g


def random_geometric(n: int, seed: int, max_weight: int = 100, k: int = 3) -> Graph:
    """Road-like graph: points in the unit square joined to their ``k`` nearest
    neighbours, plus a spanning chain so the result is connected."""
    rng = random.Random(seed)
    pts = [(rng.random(), rng.random()) for _ in range(n)]
    g = Graph(n)
    for u in range(n):
        near = sorted(range(n), key=lambda v: (pts[u][0] - pts[v][0]) ** 2 + (pts[u][1] - pts[v][1]) ** 2)
        for v in near[1:k + 1]:
            if not g.has_edge(u, v):
                g.add_edge(u, v, rng.randint(0, max_weight))
    by_x = sorted(range(n), key=lambda v: pts[v])
    for u, v in zip(by_x, by_x[1:]):
        if not g.has_edge(u, v):
            g.add_edge(u, v, rng.randint(0, max_weight))
    return g


def grid(rows: int, cols: int, seed: int | None = None, max_weight: int = 100) -> Graph:
    """rows x cols grid; vertex (r, c) is ``r * cols + c``. Unit weights when ``seed`` is None."""
    rng = random.Random(seed)
    g = Graph(rows * cols)
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                g.add_edge(v, v + 1, 1 if seed is None else rng.randint(0, max_weight))
            if r + 1 < rows:
                g.add_edge(v, v + cols, 1 if seed is None else rng.randint(0, max_weight))
    return g


def path(n: int, weight: int = 1) -> Graph:
    return Graph.from_edges(n, ((i, i + 1, weight) for i in range(n - 1)))


def star(leaves: int, weight: int = 1) -> Graph:
    return Graph.from_edges(leaves + 1, ((0, i, weight) for i in range(1, leaves + 1)))


def complete(n: int, weight: int = 1) -> Graph:
    return Graph.from_edges(n, ((u, v, weight) for u in range(n) for v in range(u + 1, n)))
