"""Negative pseudo partial label extraction.

Pipeline: node embeddings -> k-means -> per-node top-``o`` cluster masks ->
"no shared cluster" relation between nodes -> signed graph. The relation is
kept as bit masks so nothing n-by-n is ever built.
"""
import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from np2l import kernels
from np2l.graph import Graph, SignedGraph

log = logging.getLogger(__name__)

MAX_CLUSTERS = 62


# k-means ----------------------------------------------------------------------

def squared_distances(z, centers, chunk=4096):
    """Exact ``||z_i - c_j||^2`` computed by differences (never negative)."""
    z = np.asarray(z, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    out = np.empty((z.shape[0], centers.shape[0]))
    for s in range(0, z.shape[0], chunk):
        diff = z[s:s + chunk, None, :] - centers[None, :, :]
        out[s:s + chunk] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


@dataclass(frozen=True, eq=False)
class ClusterModel:
    centers: np.ndarray
    assignment: np.ndarray
    inertia: float
    history: tuple
    n_iter: int

    @property
    def k(self):
        return self.centers.shape[0]

    def distances(self, z):
        return squared_distances(z, self.centers)


def _kmeans_pp(z, k, rng):
    n = z.shape[0]
    centers = [int(rng.integers(n))]
    d2 = squared_distances(z, z[centers[-1]][None])[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            free = np.setdiff1d(np.arange(n), centers)
            nxt = int(rng.choice(free))
        centers.append(nxt)
        d2 = np.minimum(d2, squared_distances(z, z[nxt][None])[:, 0])
    return z[centers].copy()


def _update_centers(z, assign, d_assigned, k):
    sums = kernels.segment_sum(assign, z, k)
    counts = np.bincount(assign, minlength=k)
    centers = np.empty_like(sums)
    filled = counts > 0
    centers[filled] = sums[filled] / counts[filled, None]
    if not filled.all():
        # empty cluster: reseed at the point farthest from its own centre
        far = d_assigned.copy()
        for j in np.flatnonzero(~filled):
            p = int(np.argmax(far))
            centers[j] = z[p]
            far[p] = -1.0
    return centers


def _lloyd(z, init, max_iter, tol):
    centers = init
    d = squared_distances(z, centers)
    assign = np.argmin(d, axis=1)
    d_assigned = d[np.arange(z.shape[0]), assign]
    inertia = float(d_assigned.sum())
    history = [inertia]
    it = 0
    for it in range(1, max_iter + 1):
        new_centers = _update_centers(z, assign, d_assigned, centers.shape[0])
        d = squared_distances(z, new_centers)
        new_assign = np.argmin(d, axis=1)
        new_d = d[np.arange(z.shape[0]), new_assign]
        new_inertia = float(new_d.sum())
        if new_inertia > inertia:
            # only rounding can do this once converged; keep the better state
            break
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum()))
        centers, assign, d_assigned, inertia = new_centers, new_assign, new_d, new_inertia
        history.append(inertia)
        if shift < tol:
            break
    return ClusterModel(centers, assign, inertia, tuple(history), it)


def kmeans(z, k, seed=0, max_iter=300, tol=1e-8, n_init=10):
    """Lloyd's algorithm with k-means++ seeding; best of ``n_init`` restarts."""
    z = np.asarray(z, dtype=np.float64)
    n = z.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, n_init)):
        model = _lloyd(z, _kmeans_pp(z, k, rng), max_iter, tol)
        if best is None or model.inertia < best.inertia:
            best = model
    return best


# partial labels ---------------------------------------------------------------

def partial_labels(d, o):
    """Binary (n, k) matrix marking each row's ``o`` nearest clusters; ties go to the lower index."""
    d = np.asarray(d, dtype=np.float64)
    k = d.shape[1]
    if not 1 <= o <= k:
        raise ValueError(f"o must be in [1, {k}], got {o}")
    order = np.argsort(d, axis=1, kind="stable")[:, :o]
    p = np.zeros(d.shape, dtype=np.int8)
    np.put_along_axis(p, order, 1, axis=1)
    return p


def masks_from_partial_labels(p):
    p = np.asarray(p)
    k = p.shape[1]
    if k > MAX_CLUSTERS:
        raise ValueError(f"at most {MAX_CLUSTERS} clusters are supported, got {k}")
    weights = np.left_shift(np.int64(1), np.arange(k, dtype=np.int64))
    return (p.astype(np.int64) * weights).sum(axis=1)


class NegativeRelation:
    """``N_ij = 1`` iff nodes i and j share no partial label.

    Nodes are grouped by their label mask. ``incompatible[a, b]`` says whether
    mask groups ``a`` and ``b`` are disjoint, so N is a union of complete
    bipartite blocks between mask groups.
    """

    def __init__(self, masks, k):
        self.masks = np.asarray(masks, dtype=np.int64)
        self.k = int(k)
        self.mask_values, self.mask_ids = np.unique(self.masks, return_inverse=True)
        self.mask_ids = self.mask_ids.astype(np.int64)
        self.counts = np.bincount(self.mask_ids, minlength=self.mask_values.size)
        self.incompatible = (self.mask_values[:, None] & self.mask_values[None, :]) == 0
        self._inc_f = self.incompatible.astype(np.float64)

    @classmethod
    def from_partial_labels(cls, p):
        p = np.asarray(p)
        return cls(masks_from_partial_labels(p), p.shape[1])

    @property
    def n(self):
        return int(self.masks.shape[0])

    @property
    def num_groups(self):
        return int(self.mask_values.size)

    @property
    def incompatible_pairs(self):
        """Disjoint mask pairs ``(a, b)`` with ``a < b`` as mask values."""
        a, b = np.nonzero(np.triu(self.incompatible, 1))
        return np.stack([self.mask_values[a], self.mask_values[b]], axis=1)

    def lookup(self, i, j):
        return ((self.masks[i] & self.masks[j]) == 0).astype(np.int8)

    def to_dense(self):
        return ((self.masks[:, None] & self.masks[None, :]) == 0).astype(np.int8)

    def incompatible_nodes(self, v):
        return np.flatnonzero(self.incompatible[self.mask_ids[v]][self.mask_ids])

    def incompatible_sum(self, h):
        """``N @ h`` via per-group sums."""
        h = np.asarray(h, dtype=np.float64)
        group_sums = kernels.segment_sum(self.mask_ids, h, self.num_groups)
        return (self._inc_f @ group_sums)[self.mask_ids]

    def grouped_incompatible_sum(self, groups, h):
        """``N_g @ h`` where N_g keeps only pairs with equal group id >= 0."""
        h = np.asarray(h, dtype=np.float64)
        groups = np.asarray(groups, dtype=np.int64)
        out = np.zeros_like(h)
        member = groups >= 0
        if not member.any():
            return out
        ng = int(groups[member].max()) + 1
        m = self.num_groups
        keys = groups[member] * m + self.mask_ids[member]
        sums = kernels.segment_sum(keys, h[member], ng * m).reshape(ng, m, -1)
        agg = np.einsum("ab,gbd->gad", self._inc_f, sums)
        out[member] = agg[groups[member], self.mask_ids[member]]
        return out

    def to_json(self):
        return {
            "k": self.k,
            "mask_values": self.mask_values.tolist(),
            "mask_of_node": self.mask_ids.tolist(),
            "incompatible_pairs": self.incompatible_pairs.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        values = np.asarray(obj["mask_values"], dtype=np.int64)
        return cls(values[np.asarray(obj["mask_of_node"], dtype=np.int64)], obj["k"])


def negative_relation(p):
    return NegativeRelation.from_partial_labels(p)


def build_signed_graph(graph, relation):
    """Edges inside the relation are dropped; related non-edges become negative edges."""
    if relation.n != graph.n:
        raise ValueError(f"relation covers {relation.n} nodes, graph has {graph.n}")
    e = graph.edges
    hit = relation.lookup(e[:, 0], e[:, 1]).astype(bool) if len(e) else np.zeros(0, bool)
    positive = Graph(graph.n, e[~hit])
    return SignedGraph(graph.n, positive, relation, e[hit])


# recall -----------------------------------------------------------------------

class RecallMode(str, enum.Enum):
    GROUND_TRUTH_PAIRS = "ground_truth_pairs"
    PREDICTED_PAIRS = "predicted_pairs"


@dataclass(frozen=True)
class RecallReport:
    recall: float
    o: int
    k: int
    mode: RecallMode
    hits: int
    denominator: int


def recall_score(p, y, mode=RecallMode.GROUND_TRUTH_PAIRS):
    """Share of same-class ordered pairs (diagonal included) that share a partial label.

    With ``PREDICTED_PAIRS`` the denominator is instead the number of pairs
    that share a partial label.
    """
    mode = RecallMode(mode)
    p = np.asarray(p)
    y = np.asarray(y, dtype=np.int64)
    if p.shape[0] != y.shape[0]:
        raise ValueError("P and y cover different node counts")
    rel = NegativeRelation.from_partial_labels(p)
    compatible = (~rel.incompatible).astype(np.int64)
    num_classes = int(y.max()) + 1
    table = np.zeros((num_classes, rel.num_groups), dtype=np.int64)
    np.add.at(table, (y, rel.mask_ids), 1)
    hits = int(np.einsum("ca,ab,cb->", table, compatible, table))
    if mode is RecallMode.GROUND_TRUTH_PAIRS:
        denom = int((np.bincount(y) ** 2).sum())
    else:
        denom = int(rel.counts @ compatible @ rel.counts)
    o_vals = np.unique(p.sum(axis=1))
    o = int(o_vals[0]) if o_vals.size == 1 else -1
    return RecallReport(hits / denom if denom else 0.0, o, p.shape[1], mode, hits, denom)


def recall_curve(d, y, mode=RecallMode.GROUND_TRUTH_PAIRS):
    return [recall_score(partial_labels(d, o), y, mode) for o in range(1, d.shape[1] + 1)]


# full pipeline ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NP2EResult:
    signed: SignedGraph
    embedding: np.ndarray
    clusters: ClusterModel
    distances: np.ndarray
    partial: np.ndarray
    relation: NegativeRelation
    recall: RecallReport = None
    curve: list = field(default_factory=list)
    val_auc: float = float("nan")


def run_np2e(graph, x, k, o, encoder_config=None, labels=None, seed=0, embedding=None):
    """Embed, cluster, extract partial labels and build the signed graph.

    ``labels`` are only used for the recall diagnostics. Pass ``embedding``
    to skip the embedding step.
    """
    from np2l.encoders import EmbeddingConfig, train_embedding

    if not 1 <= o <= k:
        raise ValueError(f"o must be in [1, k={k}], got {o}")
    val_auc = float("nan")
    if embedding is None:
        cfg = encoder_config or EmbeddingConfig()
        trained = train_embedding(graph, x, cfg, seed=seed)
        embedding, val_auc = trained.embedding, trained.val_auc
    clusters = kmeans(embedding, k, seed=seed)
    d = clusters.distances(embedding)
    p = partial_labels(d, o)
    rel = negative_relation(p)
    signed = build_signed_graph(graph, rel)
    report, curve = None, []
    if labels is not None:
        report = recall_score(p, labels)
        curve = recall_curve(d, labels)
        log.info("NP2E o=%d k=%d recall=%.4f negative edges=%d", o, k, report.recall, signed.num_neg_edges)
    return NP2EResult(signed, embedding, clusters, d, p, rel, report, curve, val_auc)
