import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from neurospike.fixtures import random_connected_graph
from neurospike.graph import GraphError, build_topology, is_balanced, is_connected, ring, spectral, star


def test_directed_ring_has_five_edges():
    g = ring(5)
    assert g.directed and g.n_edges == 5


def test_undirected_star_is_symmetrized():
    g = star(4, hub=2)
    assert g.n_edges == 6
    assert sorted(g.receivers(2)) == [1, 3, 4]


def test_single_node():
    g = build_topology(1, [], False)
    assert g.n_edges == 0 and is_connected(g)
    assert spectral(g).laplacian.tolist() == [[0]]


@pytest.mark.parametrize("edges, msg", [
    ([(1, 1)], "self-loop"),
    ([(1, 5)], "out of range"),
    ([(1, 2), (1, 2)], "duplicate"),
    ([(1, 2), (2, 1)], "duplicate"),
])
def test_bad_edges_rejected(edges, msg):
    with pytest.raises(GraphError, match=msg):
        build_topology(3, edges, False)


def test_directed_reverse_pair_is_not_a_duplicate():
    assert build_topology(2, [(1, 2), (2, 1)], True).n_edges == 2


def test_star_degrees():
    sd = spectral(star(4, hub=2))
    assert sd.degree.diagonal().tolist() == [1, 3, 1, 1]
    assert sd.max_degree == 3


def test_ring_degrees_and_receiver_rows():
    sd = spectral(ring(5))
    assert sd.degree.diagonal().tolist() == [1] * 5
    # row = receiver: edge 1->2 sets a[2,1]
    assert sd.adjacency[1, 0] == 1 and sd.adjacency[0, 1] == 0


def test_empty_graph_laplacian_is_zero():
    assert not spectral(build_topology(4, [], False)).laplacian.any()


def test_connectivity_examples():
    assert is_connected(ring(5))
    assert is_connected(star(4, hub=2))
    assert not is_connected(build_topology(4, [(1, 2), (3, 4)], False))


def test_balance_examples():
    assert is_balanced(ring(5))
    assert is_balanced(star(4, hub=2))
    assert not is_balanced(build_topology(3, [(1, 2), (2, 3)], True))


@st.composite
def graphs(draw, max_nodes=16, directed=None):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, max_nodes))
    d = draw(st.booleans()) if directed is None else directed
    return random_connected_graph(np.random.default_rng(seed), n, d)


@given(graphs())
def test_laplacian_rows_sum_to_zero(g):
    assert not spectral(g).laplacian.sum(axis=1).any()


@given(graphs())
def test_balanced_laplacian_columns_sum_to_zero(g):
    assert is_balanced(g)
    assert not spectral(g).laplacian.sum(axis=0).any()


@given(graphs(directed=False))
def test_undirected_laplacian_symmetric_psd(g):
    lap = spectral(g).laplacian
    assert (lap == lap.T).all()
    assert np.linalg.eigvalsh(lap.astype(float)).min() > -1e-9


def _zero_multiplicity(lap) -> int:
    """Exact multiplicity of the root 0 of the characteristic polynomial."""
    coeffs = sympy.Matrix(lap.tolist()).charpoly().all_coeffs()[::-1]
    return next(i for i, c in enumerate(coeffs) if c != 0)


@settings(max_examples=25)
@given(graphs(max_nodes=16, directed=False))
def test_connected_graph_has_simple_zero_eigenvalue(g):
    lap = spectral(g).laplacian
    assert _zero_multiplicity(lap) == 1
    if g.n_nodes > 1:
        assert np.linalg.eigvalsh(lap.astype(float))[1] > 1e-9


@settings(max_examples=20)
@given(st.integers(2, 8), st.integers(2, 8))
def test_two_components_give_double_zero(n1, n2):
    edges = [(i, i + 1) for i in range(1, n1)] + [(n1 + i, n1 + i + 1) for i in range(1, n2)]
    g = build_topology(n1 + n2, edges, False)
    assert not is_connected(g)
    assert _zero_multiplicity(spectral(g).laplacian) == 2
