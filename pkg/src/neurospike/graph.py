"""Network topologies and their spectral matrices.

Node indices are 1-based everywhere a user sees them (edge lists, config
files, CSV output); matrices are ordinary 0-based numpy arrays.  An edge
``(i, p)`` means node ``i`` sends to node ``p``, so ``adjacency[p-1, i-1] == 1``:
rows are receivers, columns are senders.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    directed: bool

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def senders(self, node: int) -> list[int]:
        """Nodes that transmit to ``node`` (its neighborhood)."""
        return [i for i, p in self.edges if p == node]

    def receivers(self, node: int) -> list[int]:
        return [p for i, p in self.edges if i == node]


@dataclass(frozen=True)
class SpectralData:
    adjacency: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray
    max_degree: int


def build_topology(n_nodes: int, edges: Iterable[Sequence[int]], directed: bool) -> Graph:
    """Validate an edge list and return a Graph.

    Undirected inputs list each link once in either orientation; the
    reverse edge is added here.
    """
    if int(n_nodes) != n_nodes or n_nodes < 1:
        raise GraphError(f"n_nodes must be a positive integer, got {n_nodes!r}")
    n_nodes = int(n_nodes)
    seen: set[tuple[int, int]] = set()
    out: list[tuple[int, int]] = []
    for edge in edges:
        if len(edge) != 2:
            raise GraphError(f"edge {edge!r} is not a pair")
        i, p = (int(v) for v in edge)
        for v in (i, p):
            if not 1 <= v <= n_nodes:
                raise GraphError(f"node index {v} out of range 1..{n_nodes}")
        if i == p:
            raise GraphError(f"self-loop at node {i}")
        key = (i, p) if directed else (min(i, p), max(i, p))
        if key in seen:
            raise GraphError(f"duplicate edge ({i}, {p})")
        seen.add(key)
        out.append((i, p))
        if not directed:
            out.append((p, i))
    return Graph(n_nodes=n_nodes, edges=tuple(out), directed=bool(directed))


def ring(n_nodes: int, directed: bool = True) -> Graph:
    """Ring 1->2->...->N->1."""
    return build_topology(n_nodes, [(i, i % n_nodes + 1) for i in range(1, n_nodes + 1)], directed)


def star(n_nodes: int, hub: int = 1) -> Graph:
    return build_topology(n_nodes, [(hub, p) for p in range(1, n_nodes + 1) if p != hub], False)


def spectral(g: Graph) -> SpectralData:
    n = g.n_nodes
    adj = np.zeros((n, n), dtype=np.int64)
    for i, p in g.edges:
        adj[p - 1, i - 1] = 1
    deg = np.diag(adj.sum(axis=1))
    lap = deg - adj
    max_degree = int(deg.diagonal().max()) if n else 0
    return SpectralData(adjacency=adj, degree=deg, laplacian=lap, max_degree=max_degree)


def is_connected(g: Graph) -> bool:
    """Connectivity of the underlying undirected graph (BFS from node 1)."""
    nbrs: dict[int, set[int]] = {v: set() for v in range(1, g.n_nodes + 1)}
    for i, p in g.edges:
        nbrs[i].add(p)
        nbrs[p].add(i)
    seen = {1}
    queue = deque([1])
    while queue:
        v = queue.popleft()
        for w in nbrs[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == g.n_nodes


def is_balanced(g: Graph) -> bool:
    if not g.directed:
        return True
    indeg = [0] * (g.n_nodes + 1)
    outdeg = [0] * (g.n_nodes + 1)
    for i, p in g.edges:
        outdeg[i] += 1
        indeg[p] += 1
    return indeg == outdeg
