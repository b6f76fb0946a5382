"""Edge- and node-level train/validation/test splits."""
import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from np2l.graph import Graph, pair_keys


@dataclass(frozen=True, eq=False)
class EdgeSplit:
    n: int
    train_edges: np.ndarray
    val_edges: np.ndarray
    test_edges: np.ndarray
    val_neg: np.ndarray
    test_neg: np.ndarray
    alpha: float

    @cached_property
    def train_graph(self):
        return Graph.from_pairs(self.n, self.train_edges)

    def heldout_keys(self):
        return np.concatenate([pair_keys(self.val_edges, self.n), pair_keys(self.test_edges, self.n)])


class NodeSplitStrategy(enum.IntEnum):
    PER_CLASS_622 = 1
    BALANCED_TRAIN_ONLY = 2
    RANDOM_622 = 3


@dataclass(frozen=True, eq=False)
class NodeSplit:
    strategy: NodeSplitStrategy
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray

    @property
    def train_idx(self):
        return np.flatnonzero(self.train_mask)

    @property
    def val_idx(self):
        return np.flatnonzero(self.val_mask)

    @property
    def test_idx(self):
        return np.flatnonzero(self.test_mask)


def _round_half_up(x):
    return int(np.floor(x + 0.5))


def edge_split_sizes(num_edges, alpha):
    n_train = _round_half_up(alpha * num_edges)
    n_val = _round_half_up(2.0 * (1.0 - alpha) / 3.0 * num_edges)
    return n_train, n_val, num_edges - n_train - n_val


def sample_non_edges(graph, count, rng, exclude_keys=None):
    """Sample ``count`` distinct unordered non-edges (no self-loops), without replacement."""
    n = graph.n
    total = n * (n - 1) // 2 - graph.num_edges
    if count > total:
        raise ValueError(f"cannot sample {count} non-edges; only {total} exist")
    banned = graph.edge_keys
    if exclude_keys is not None and len(exclude_keys):
        banned = np.union1d(banned, exclude_keys)
    if n <= 1000:
        iu, ju = np.triu_indices(n, k=1)
        keys = iu.astype(np.int64) * n + ju
        keys = keys[~np.isin(keys, banned)]
        if count > keys.size:
            raise ValueError(f"cannot sample {count} non-edges")
        chosen = keys[rng.choice(keys.size, size=count, replace=False)]
    else:
        chosen = np.zeros(0, np.int64)
        while chosen.size < count:
            batch = rng.integers(0, n, size=(2 * (count - chosen.size) + 64, 2))
            batch = batch[batch[:, 0] != batch[:, 1]]
            k = pair_keys(batch, n)
            k = k[~np.isin(k, banned)]
            merged = np.concatenate([chosen, k])
            _, first = np.unique(merged, return_index=True)
            chosen = merged[np.sort(first)]
        chosen = chosen[:count]
    return np.stack([chosen // n, chosen % n], axis=1)


def split_edges(graph, alpha=0.8, seed=0):
    """Split edges into alpha : 2(1-alpha)/3 : (1-alpha)/3 and sample matching negatives.

    Validation and test negatives are fixed here, drawn without replacement
    from the non-edges of the full graph.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if graph.num_edges < 10:
        raise ValueError("need at least 10 edges to split")
    n_train, n_val, n_test = edge_split_sizes(graph.num_edges, alpha)
    if min(n_train, n_val, n_test) < 1:
        raise ValueError("graph too small to populate train/val/test edge sets")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(graph.num_edges)
    e = graph.edges
    train = e[np.sort(perm[:n_train])]
    val = e[np.sort(perm[n_train:n_train + n_val])]
    test = e[np.sort(perm[n_train + n_val:])]
    neg = sample_non_edges(graph, n_val + n_test, rng)
    return EdgeSplit(graph.n, train, val, test, neg[:n_val], neg[n_val:], float(alpha))


def split_nodes(y, strategy, seed=0, num_classes=None, min_class_size=5):
    strategy = NodeSplitStrategy(int(strategy))
    y = np.asarray(y, dtype=np.int64)
    n = y.shape[0]
    num_classes = int(y.max()) + 1 if num_classes is None else int(num_classes)
    counts = np.bincount(y, minlength=num_classes)
    if strategy != NodeSplitStrategy.RANDOM_622 and counts.min() < min_class_size:
        bad = int(np.argmin(counts))
        raise ValueError(f"class {bad} has {counts[bad]} members; split {int(strategy)} needs >= {min_class_size}")
    rng = np.random.default_rng(seed)
    train = np.zeros(n, bool)
    val = np.zeros(n, bool)
    test = np.zeros(n, bool)

    if strategy == NodeSplitStrategy.RANDOM_622:
        perm = rng.permutation(n)
        n_tr, n_va = 6 * n // 10, 2 * n // 10
        train[perm[:n_tr]] = True
        val[perm[n_tr:n_tr + n_va]] = True
        test[perm[n_tr + n_va:]] = True
    elif strategy == NodeSplitStrategy.PER_CLASS_622:
        for c in range(num_classes):
            idx = rng.permutation(np.flatnonzero(y == c))
            n_tr, n_va = 6 * idx.size // 10, 2 * idx.size // 10
            train[idx[:n_tr]] = True
            val[idx[n_tr:n_tr + n_va]] = True
            test[idx[n_tr + n_va:]] = True
    else:
        per_class = 6 * int(counts.min()) // 10
        for c in range(num_classes):
            idx = rng.permutation(np.flatnonzero(y == c))
            train[idx[:per_class]] = True
        rest = rng.permutation(np.flatnonzero(~train))
        half = rest.size // 2
        val[rest[:half]] = True
        test[rest[half:]] = True
    return NodeSplit(strategy, train, val, test)
