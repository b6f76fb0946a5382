import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from np2l.graph import Graph, SignedGraph, canonical_pairs, gcn_normalized

from conftest import random_graph


def test_canonical_pairs_symmetrises_and_dedups():
    e = canonical_pairs([(1, 0), (0, 1), (2, 2), (2, 1)], 3)
    assert e.tolist() == [[0, 1], [1, 2]]


def test_graph_rejects_bad_edges():
    with pytest.raises(ValueError):
        Graph(3, np.array([[1, 0]]))
    with pytest.raises(ValueError):
        Graph.from_pairs(3, [(0, 3)])


def test_adjacency_symmetric_no_self_loops(rng):
    g = random_graph(40, 0.1, rng)
    a = g.to_dense()
    assert np.array_equal(a, a.T)
    assert np.all(np.diag(a) == 0)
    assert a.sum() == g.num_directed_edges


def test_normalized_adjacency_two_node():
    g = Graph.from_pairs(2, [(0, 1)])
    assert np.allclose(g.normalized_adjacency.to_dense(), 0.5)


def test_normalized_adjacency_symmetric_and_row_sums(rng):
    g = random_graph(30, 0.15, rng)
    a = g.normalized_adjacency.to_dense()
    assert np.array_equal(a, a.T)
    # A_hat @ 1 two ways: sparse product and dense formula
    deg = g.degrees + 1.0
    dense = np.diag(deg ** -0.5) @ (g.to_dense() + np.eye(30)) @ np.diag(deg ** -0.5)
    assert np.allclose(g.normalized_adjacency.matmul(np.ones((30, 1)))[:, 0], dense.sum(1), atol=1e-14)


def test_isolated_node_normalisation():
    a = gcn_normalized(1, np.zeros((0, 2), np.int64)).to_dense()
    assert a.tolist() == [[1.0]]


def test_mean_adjacency_isolated_rows_zero():
    g = Graph.from_pairs(4, [(0, 1), (0, 2)])
    m = g.mean_adjacency.to_dense()
    assert np.allclose(m[0], [0, 0.5, 0.5, 0])
    assert np.all(m[3] == 0)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 30), seed=st.integers(0, 10**6))
def test_has_edges_matches_dense(n, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(n, 0.3, rng)
    pairs = rng.integers(0, n, (20, 2))
    assert np.array_equal(g.has_edges(pairs), g.to_dense()[pairs[:, 0], pairs[:, 1]] > 0)


def test_unsigned_signed_graph_has_no_negatives():
    g = Graph.from_pairs(3, [(0, 1), (1, 2), (0, 2)])
    s = SignedGraph.unsigned(g)
    assert s.num_neg_edges == 0
    assert np.array_equal(s.signed_dense(), g.to_dense())
    assert np.all(s.neg_matmul(np.ones((3, 2))) == 0)
