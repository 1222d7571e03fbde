"""Erdos-Renyi interaction graphs, fixed for the duration of a round."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from infogov import seeding


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _order: tuple[tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GraphError(f"graph needs at least one node, got n={self.n}")
        canon = set()
        for i, j in self.edges:
            if i == j:
                raise GraphError(f"self-loop at {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge ({i}, {j}) out of range for n={self.n}")
            canon.add((min(i, j), max(i, j)))
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in canon:
            adj[i].append(j)
            adj[j].append(i)
        object.__setattr__(self, "edges", frozenset(canon))
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))
        object.__setattr__(self, "_order", tuple(sorted(canon)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        return cls(n, frozenset((int(i), int(j)) for i, j in edges))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def degree(self, a: int) -> int:
        return len(neighbors(self, a))

    def __len__(self) -> int:
        return len(self.edges)


def generate_er(n: int, p: float, seed: int) -> Graph:
    """Include each of the n(n-1)/2 pairs independently with probability ``p``.

    One uniform is drawn per pair in canonical (i<j, lexicographic) order.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise GraphError(f"n must be an integer >= 2, got {n!r}")
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"edge probability must lie in [0, 1], got {p!r}")
    rng = seeding.stream(seeding.GRAPH, seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def generate_connected_round_graph(n: int, p: float, seed: int, attempts: int = 100) -> Graph:
    """``generate_er`` that redraws edgeless graphs with derived seeds.

    Isolated nodes are kept; only a graph with no interactions at all is
    redrawn, since a round without interactions has no welfare.
    """
    for k in range(attempts):
        g = generate_er(n, p, seed if k == 0 else seeding.derive_seed(seeding.GRAPH, seed, k))
        if g.edges:
            return g
    raise GraphError(f"no edge formed in {attempts} draws (n={n}, p={p})")


def neighbors(g: Graph, a: int) -> list[int]:
    if not 0 <= a < g.n:
        raise GraphError(f"agent {a} out of range for n={g.n}")
    return list(g._adj[a])


def edge_list(g: Graph) -> list[tuple[int, int]]:
    return list(g._order)
