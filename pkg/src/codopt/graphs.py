"""Undirected connected graphs and Metropolis mixing weights."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

ER_RETRY_BUDGET = 100


class GraphConstructionError(RuntimeError):
    """Raised when a connected graph cannot be produced."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph on nodes 0..N-1, immutable after construction."""

    node_count: int
    edges: frozenset[tuple[int, int]]
    neighbor_lists: tuple[tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError(f"need at least one node, got {self.node_count}")
        nbrs: list[set[int]] = [set() for _ in range(self.node_count)]
        for (i, j) in self.edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise ValueError(f"edge ({i},{j}) out of range")
            nbrs[i].add(j)
            nbrs[j].add(i)
        object.__setattr__(
            self, "neighbor_lists", tuple(tuple(sorted(s)) for s in nbrs)
        )

    def degree(self, i: int) -> int:
        return len(self.neighbor_lists[i])

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.node_count, self.node_count))
        for (i, j) in self.edges:
            A[i, j] = A[j, i] = 1.0
        return A


def _edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def make_graph(kind: str, N: int, p: float = 0.5, seed: int = 0) -> Graph:
    """Build a named topology on N >= 2 nodes; the result is always connected.

    kind is one of cycle, path, star, complete, erdos_renyi. Erdos-Renyi
    draws are retried (new seed stream) until connected, up to
    ER_RETRY_BUDGET attempts.
    """
    if N < 2:
        raise ValueError(f"need N >= 2 nodes, got {N}")
    if kind == "cycle":
        edges = {_edge(i, (i + 1) % N) for i in range(N)}
    elif kind == "path":
        edges = {_edge(i, i + 1) for i in range(N - 1)}
    elif kind == "star":
        edges = {_edge(0, i) for i in range(1, N)}
    elif kind == "complete":
        edges = {_edge(i, j) for i in range(N) for j in range(i + 1, N)}
    elif kind == "erdos_renyi":
        rng = np.random.default_rng(seed)
        for _ in range(ER_RETRY_BUDGET):
            edges = {
                _edge(i, j)
                for i in range(N)
                for j in range(i + 1, N)
                if rng.random() < p
            }
            g = Graph(N, frozenset(edges))
            if is_connected(g):
                return g
        raise GraphConstructionError(
            f"no connected G({N},{p}) draw in {ER_RETRY_BUDGET} attempts"
        )
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    g = Graph(N, frozenset(edges))
    assert is_connected(g)
    return g


def is_connected(g: Graph) -> bool:
    """BFS reachability of every node from node 0."""
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in g.neighbor_lists[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == g.node_count


def _bfs_depths(g: Graph, root: int) -> np.ndarray:
    depth = np.full(g.node_count, -1, dtype=int)
    depth[root] = 0
    queue = deque([root])
    while queue:
        i = queue.popleft()
        for j in g.neighbor_lists[i]:
            if depth[j] < 0:
                depth[j] = depth[i] + 1
                queue.append(j)
    return depth


def diameter(g: Graph) -> int:
    """Longest shortest path between any two nodes."""
    best = 0
    for root in range(g.node_count):
        depth = _bfs_depths(g, root)
        if depth.min() < 0:
            raise GraphConstructionError("diameter undefined: graph disconnected")
        best = max(best, int(depth.max()))
    return best


def metropolis_weights(g: Graph) -> np.ndarray:
    """Doubly stochastic, symmetric mixing matrix via the Metropolis rule.

    W[i,j] = 1 / (1 + max(deg i, deg j)) on edges, diagonal absorbs the rest.
    """
    if not is_connected(g):
        raise GraphConstructionError("Metropolis weights need a connected graph")
    N = g.node_count
    W = np.zeros((N, N))
    for (i, j) in g.edges:
        W[i, j] = W[j, i] = 1.0 / (1.0 + max(g.degree(i), g.degree(j)))
    np.fill_diagonal(W, 1.0 - W.sum(axis=1))
    return W


def check_doubly_stochastic(W: np.ndarray, tol: float = 1e-12) -> bool:
    """Row/column sums 1, symmetric, nonnegative."""
    ones = np.ones(W.shape[0])
    return (
        np.allclose(W @ ones, ones, atol=tol)
        and np.allclose(ones @ W, ones, atol=tol)
        and np.allclose(W, W.T, atol=tol)
        and bool((W >= -tol).all())
    )
