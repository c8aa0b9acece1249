"""Randomized scenarios for property checks."""
from __future__ import annotations

import numpy as np

from .dynamics import LinearAffine
from .graph import Graph, build_topology
from .simulator import Scenario


def random_connected_graph(rng: np.random.Generator, n_nodes: int, directed: bool = False) -> Graph:
    """Random spanning tree plus extra links (undirected), or a shuffled ring (directed).

    Directed graphs come out balanced: a ring through a random node order,
    optionally overlaid with the reversed ring.
    """
    if n_nodes == 1:
        return build_topology(1, [], directed)
    order = [int(v) + 1 for v in rng.permutation(n_nodes)]
    if directed:
        edges = [(order[i], order[(i + 1) % n_nodes]) for i in range(n_nodes)]
        if n_nodes > 2 and rng.random() < 0.5:
            edges += [(p, i) for i, p in edges]
        return build_topology(n_nodes, edges, True)
    edges = set()
    for pos in range(1, n_nodes):
        parent = order[int(rng.integers(pos))]
        edges.add((min(parent, order[pos]), max(parent, order[pos])))
    for _ in range(int(rng.integers(0, n_nodes))):
        i, p = (int(v) + 1 for v in rng.choice(n_nodes, 2, replace=False))
        edges.add((min(i, p), max(i, p)))
    return build_topology(n_nodes, sorted(edges), False)


def random_linear_scenario(
    seed: int,
    max_agents: int = 8,
    k_range: tuple[float, float] = (1.0, 50.0),
    alpha_range: tuple[float, float] = (0.01, 1.0),
    t_end: float = 1.0,
    dt: float = 1e-4,
) -> Scenario:
    """Connected network of stable affine agents with random gain and amplitude.

    Each agent's matrix is a negative diagonal plus a small skew part, so all
    runs stay bounded; offsets and initial states are uniform in [-1, 1].
    """
    rng = np.random.default_rng(seed)
    N = int(rng.integers(2, max_agents + 1))
    n = int(rng.integers(1, 3))
    directed = bool(rng.random() < 0.3)
    graph = random_connected_graph(rng, N, directed)
    agents = []
    for _ in range(N):
        diag = -rng.uniform(0.2, 2.0, n)
        skew = rng.uniform(-1.0, 1.0, (n, n))
        A = np.diag(diag) + 0.5 * (skew - skew.T)
        agents.append(LinearAffine.from_arrays(A, rng.uniform(-1.0, 1.0, n)))
    k = float(rng.uniform(*k_range))
    alpha = float(np.exp(rng.uniform(np.log(alpha_range[0]), np.log(alpha_range[1]))))
    x0 = rng.uniform(-1.0, 1.0, (N, n))
    xi0 = rng.uniform(0.0, 1.0, (N, n, 2)) * (alpha / k) * 0.999
    return Scenario(graph=graph, agents=tuple(agents), k=k, alpha=alpha, t_end=t_end, dt=dt,
                    initial_states=x0, initial_potentials=xi0, name=f"random-{seed}")
