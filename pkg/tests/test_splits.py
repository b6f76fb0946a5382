import itertools

import numpy as np
import pytest

from np2l.graph import Graph, pair_keys
from np2l.splits import NodeSplitStrategy, edge_split_sizes, split_edges, split_nodes

from conftest import random_graph


def ring(n):
    return Graph.from_pairs(n, [(i, (i + 1) % n) for i in range(n)])


def test_edge_split_fractions():
    assert edge_split_sizes(300, 0.8) == (240, 40, 20)
    for e, alpha in itertools.product([10, 11, 57, 1000, 5278], [0.5, 0.8, 0.85]):
        assert sum(edge_split_sizes(e, alpha)) == e


def test_ring_split_counts_and_disjointness():
    g = ring(10)
    s = split_edges(g, 0.8, seed=0)
    assert (len(s.train_edges), len(s.val_edges), len(s.test_edges)) == (8, 1, 1)
    assert (len(s.val_neg), len(s.test_neg)) == (1, 1)
    parts = [pair_keys(p, 10) for p in (s.train_edges, s.val_edges, s.test_edges)]
    for a, b in itertools.combinations(parts, 2):
        assert not set(a) & set(b)
    assert set(np.concatenate(parts)) == set(g.edge_keys)


def test_negatives_are_true_non_edges(rng):
    g = random_graph(60, 0.1, rng)
    s = split_edges(g, 0.8, seed=3)
    neg = np.concatenate([s.val_neg, s.test_neg])
    assert not g.has_edges(neg).any()
    assert np.all(neg[:, 0] != neg[:, 1])
    keys = pair_keys(neg, g.n)
    assert len(np.unique(keys)) == len(keys)


def test_large_graph_negative_sampling_path(rng):
    n = 1500
    g = Graph.from_pairs(n, rng.integers(0, n, (3000, 2)))
    s = split_edges(g, 0.8, seed=1)
    assert not g.has_edges(s.test_neg).any()
    assert len(np.unique(pair_keys(np.concatenate([s.val_neg, s.test_neg]), n))) == len(s.val_neg) + len(s.test_neg)


def test_edge_split_determinism(rng):
    g = random_graph(80, 0.1, rng)
    a, b, c = split_edges(g, 0.8, 5), split_edges(g, 0.8, 5), split_edges(g, 0.8, 6)
    assert np.array_equal(a.test_edges, b.test_edges) and np.array_equal(a.val_neg, b.val_neg)
    assert not np.array_equal(a.test_edges, c.test_edges)


def test_train_graph_holds_only_train_edges(rng):
    g = random_graph(50, 0.15, rng)
    s = split_edges(g, 0.8, 0)
    assert s.train_graph.num_edges == len(s.train_edges)
    assert not s.train_graph.has_edges(s.test_edges).any()


def test_edge_split_errors():
    with pytest.raises(ValueError):
        split_edges(ring(20), 1.0)
    with pytest.raises(ValueError):
        split_edges(ring(5), 0.8)


def test_node_split_per_class():
    y = np.array([0] * 5 + [1] * 5)
    s = split_nodes(y, 1, seed=0)
    for c in (0, 1):
        cls = y == c
        assert (s.train_mask[cls].sum(), s.val_mask[cls].sum(), s.test_mask[cls].sum()) == (3, 1, 1)


def test_node_split_random():
    y = np.arange(100) % 4
    s = split_nodes(y, NodeSplitStrategy.RANDOM_622, seed=2)
    assert (s.train_mask.sum(), s.val_mask.sum(), s.test_mask.sum()) == (60, 20, 20)


def test_node_split_balanced_train(rng):
    y = rng.choice(7, size=700, p=[.3, .2, .15, .1, .1, .1, .05])
    s = split_nodes(y, 2, seed=0)
    counts = np.bincount(y[s.train_mask], minlength=7)
    assert len(set(counts)) == 1
    assert counts[0] == 6 * np.bincount(y).min() // 10
    assert abs(s.val_mask.sum() - s.test_mask.sum()) <= 1


@pytest.mark.parametrize("strategy", [1, 2, 3])
def test_node_masks_partition(strategy, rng):
    y = rng.integers(0, 5, 200)
    s = split_nodes(y, strategy, seed=1)
    total = s.train_mask.astype(int) + s.val_mask + s.test_mask
    assert np.all(total == 1)
    again = split_nodes(y, strategy, seed=1)
    assert np.array_equal(s.train_mask, again.train_mask)


def test_node_split_small_class():
    y = np.array([0] * 10 + [1] * 3)
    with pytest.raises(ValueError):
        split_nodes(y, 1)
    split_nodes(y, 3)
