"""Undirected graphs and signed graphs.

Edges are stored once per unordered pair as rows ``(i, j)`` with ``i < j``,
sorted lexicographically. Adjacency matrices are symmetric CSR.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from np2l.autograd.sparse import SparseMatrix


def canonical_pairs(pairs, n=None):
    """Symmetrize, drop self-loops and duplicates; return sorted (E, 2) with i < j."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if n is not None and pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        raise ValueError(f"edge endpoint out of range for n={n}")
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keep = lo != hi
    lo, hi = lo[keep], hi[keep]
    if n is None:
        n = int(hi.max()) + 1 if hi.size else 0
    keys = np.unique(lo * n + hi)
    return np.stack([keys // n, keys % n], axis=1) if keys.size else np.zeros((0, 2), np.int64)


def pair_keys(pairs, n):
    """Order-insensitive int64 key for each pair."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.minimum(pairs[:, 0], pairs[:, 1]) * n + np.maximum(pairs[:, 0], pairs[:, 1])


def symmetric_csr(n, pairs, values=None):
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    vals = np.ones(len(pairs)) if values is None else np.asarray(values, dtype=np.float64)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    return SparseMatrix.from_coo(rows, cols, np.concatenate([vals, vals]), (n, n))


def gcn_normalized(n, pairs):
    """``D^-1/2 (A + I) D^-1/2`` with D the degree of ``A + I``."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    deg = np.bincount(pairs.ravel(), minlength=n).astype(np.float64) + 1.0
    dinv = 1.0 / np.sqrt(deg)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1], np.arange(n)])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0], np.arange(n)])
    return SparseMatrix.from_coo(rows, cols, dinv[rows] * dinv[cols], (n, n))


def mean_adjacency(n, pairs):
    """Row-normalised adjacency ``D^-1 A``; rows of isolated nodes are zero."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    deg = np.bincount(pairs.ravel(), minlength=n).astype(np.float64)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    return SparseMatrix.from_coo(rows, cols, 1.0 / deg[rows], (n, n))


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if np.any(e[:, 0] >= e[:, 1]):
                raise ValueError("edges must be canonical (i < j); use Graph.from_pairs")
            k = e[:, 0] * self.n + e[:, 1]
            if np.any(np.diff(k) <= 0):
                raise ValueError("edges must be sorted and unique; use Graph.from_pairs")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_pairs(cls, n, pairs):
        return cls(int(n), canonical_pairs(pairs, n))

    @property
    def num_edges(self):
        return int(self.edges.shape[0])

    @property
    def num_directed_edges(self):
        return 2 * self.num_edges

    @cached_property
    def edge_keys(self):
        return self.edges[:, 0] * self.n + self.edges[:, 1]

    @cached_property
    def degrees(self):
        return np.bincount(self.edges.ravel(), minlength=self.n)

    @cached_property
    def adjacency(self):
        return symmetric_csr(self.n, self.edges)

    @cached_property
    def normalized_adjacency(self):
        return gcn_normalized(self.n, self.edges)

    @cached_property
    def mean_adjacency(self):
        return mean_adjacency(self.n, self.edges)

    def has_edges(self, pairs):
        keys = pair_keys(pairs, self.n)
        if not self.num_edges:
            return np.zeros(len(keys), bool)
        pos = np.minimum(np.searchsorted(self.edge_keys, keys), self.num_edges - 1)
        return self.edge_keys[pos] == keys

    def neighbors(self, v):
        a = self.adjacency
        return a.indices[a.indptr[v]:a.indptr[v + 1]]

    def to_dense(self):
        return self.adjacency.to_dense()

    def with_edges(self, pairs):
        return Graph.from_pairs(self.n, pairs)

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and np.array_equal(self.edges, other.edges)

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


@dataclass(frozen=True, eq=False)
class SignedGraph:
    """Graph with disjoint positive and negative edge sets.

    The negative set is kept compressed: ``relation`` marks every pair whose
    partial-label masks are disjoint, and two exclusion layers carve out
    pairs of that set which are not negative edges:

    * ``dropped`` - explicit pairs (originally positive edges that were
      removed rather than turned negative);
    * ``groups`` - a per-node group id (``-1`` for none); any related pair
      whose endpoints share a group id >= 0 is excluded.

    ``dropped`` never contains a pair already covered by ``groups``, so the
    three parts combine by plain subtraction.
    """

    n: int
    positive: Graph
    relation: object = None
    dropped: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), np.int64))
    groups: np.ndarray = None

    def __post_init__(self):
        if self.positive.n != self.n:
            raise ValueError("positive graph size mismatch")
        d = canonical_pairs(self.dropped, self.n) if len(self.dropped) else np.zeros((0, 2), np.int64)
        d.setflags(write=False)
        object.__setattr__(self, "dropped", d)
        if self.relation is not None and self.relation.n != self.n:
            raise ValueError("negative relation size mismatch")

    @classmethod
    def unsigned(cls, graph):
        return cls(graph.n, graph)

    @property
    def pos_edges(self):
        return self.positive.edges

    @cached_property
    def _dropped_csr(self):
        return symmetric_csr(self.n, self.dropped)

    def neg_matmul(self, h):
        """Exact ``A_neg @ h`` without materialising the negative edge set."""
        h = np.asarray(h, dtype=np.float64)
        if h.ndim == 1:
            return self.neg_matmul(h[:, None])[:, 0]
        if self.relation is None:
            return np.zeros((self.n, h.shape[1]))
        out = self.relation.incompatible_sum(h)
        if self.groups is not None:
            out = out - self.relation.grouped_incompatible_sum(self.groups, h)
        if self.dropped.shape[0]:
            out = out - self._dropped_csr.matmul(h)
        return out

    @cached_property
    def neg_degree(self):
        return np.rint(self.neg_matmul(np.ones(self.n))).astype(np.int64)

    @property
    def num_neg_edges(self):
        return int(self.neg_degree.sum() // 2)

    def is_negative(self, i, j):
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        if self.relation is None:
            return np.zeros(np.broadcast(i, j).shape, bool)
        out = self.relation.lookup(i, j).astype(bool)
        if self.groups is not None:
            gi, gj = self.groups[i], self.groups[j]
            out &= ~((gi >= 0) & (gi == gj))
        if self.dropped.shape[0]:
            keys = np.minimum(i, j) * self.n + np.maximum(i, j)
            dk = self.dropped[:, 0] * self.n + self.dropped[:, 1]
            out &= ~np.isin(keys, dk)
        return out

    def neg_neighbors(self, v):
        """Materialise the negative neighbourhood of one node."""
        if self.relation is None:
            return np.zeros(0, np.int64)
        cand = self.relation.incompatible_nodes(v)
        return cand[self.is_negative(np.full(cand.shape, v), cand)]

    def neg_edges(self):
        """All negative pairs (i < j). Quadratic in the worst case; for tests and small graphs."""
        out = []
        for v in range(self.n):
            nb = self.neg_neighbors(v)
            nb = nb[nb > v]
            out.append(np.stack([np.full(nb.shape, v), nb], axis=1))
        return np.concatenate(out) if out else np.zeros((0, 2), np.int64)

    def signed_dense(self):
        a = self.positive.to_dense()
        if self.relation is not None:
            i, j = np.meshgrid(np.arange(self.n), np.arange(self.n), indexing="ij")
            a = a - self.is_negative(i, j)
        return a

    def __repr__(self):
        return f"SignedGraph(n={self.n}, pos={self.positive.num_edges}, neg={self.num_neg_edges})"
