"""GCN and GNCN encoders with graph auto-encoder (GAE / VGAE) heads."""
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from np2l import autograd as ag
from np2l.autograd import SparseMatrix, Tensor
from np2l.metrics import eval_auc_ap

log = logging.getLogger(__name__)

DEFAULT_SCALE = 1.8


def rng_streams(seed):
    """Independent generators per purpose so adding a parameter never shifts sampling."""
    names = ("init", "extra_init", "sample", "noise", "np2e")
    seqs = np.random.SeedSequence(int(seed)).spawn(len(names))
    return {name: np.random.default_rng(s) for name, s in zip(names, seqs)}


def glorot(rng, fan_in, fan_out, name=None):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-bound, bound, size=(fan_in, fan_out)), requires_grad=True, name=name)


def feature_input(x, max_density=0.25):
    """Wrap a feature matrix as a constant; sparse bag-of-words goes to CSR."""
    if isinstance(x, (Tensor, SparseMatrix)):
        return x
    x = np.asarray(x, dtype=np.float64)
    if np.count_nonzero(x) <= max_density * x.size:
        return SparseMatrix.from_dense(x)
    return Tensor(x)


def linear(h, w):
    if isinstance(h, SparseMatrix):
        return ag.spmm(h, w)
    return ag.matmul(h, w)


def input_dim(x):
    return x.shape[1]


class Module:
    """Ordered collection of named parameters and sub-modules."""

    def named_parameters(self, prefix=""):
        out = []
        for key, val in vars(self).items():
            if isinstance(val, Tensor) and val.requires_grad:
                out.append((prefix + key, val))
            elif isinstance(val, Module):
                out.extend(val.named_parameters(prefix + key + "."))
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        out.extend(item.named_parameters(f"{prefix}{key}.{i}."))
        return out

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def state_dict(self):
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        for name, p in self.named_parameters():
            if state[name].shape != p.data.shape:
                raise ValueError(f"shape mismatch for {name}")
            p.data = np.array(state[name], dtype=np.float64)


def save_checkpoint(module, path):
    """Flat named-tensor file: one record per parameter with row-major values."""
    records = [{"name": name, "shape": list(p.shape), "values": p.data.ravel().tolist()}
               for name, p in module.named_parameters()]
    Path(path).write_text(json.dumps({"tensors": records}))


def load_checkpoint(module, path):
    records = json.loads(Path(path).read_text())["tensors"]
    module.load_state_dict({r["name"]: np.asarray(r["values"]).reshape(r["shape"]) for r in records})


# layers ------------------------------------------------------------------------

class GcnLayer(Module):
    """``act(A_hat @ H @ W)`` with no bias."""

    def __init__(self, in_dim, out_dim, rng, activation="relu", adjacency=None):
        self.W = glorot(rng, in_dim, out_dim, "W")
        self.activation = activation
        self.adjacency = adjacency

    def forward(self, h, adj=None):
        adj = self.adjacency if adj is None else adj
        if adj is None:
            raise ValueError("GcnLayer needs a normalised adjacency")
        out = ag.spmm(adj, linear(h, self.W))
        return ag.relu(out) if self.activation == "relu" else out


def gcn_forward(layer, h, adj=None):
    return layer.forward(h, adj)


def gncn_propagate(z, adj, scale=DEFAULT_SCALE):
    """Rescale rows to norm ``scale`` then propagate once with ``D^-1/2 (A+I) D^-1/2``."""
    return ag.spmm(adj, ag.row_normalize(ag.as_tensor(z), scale))


class GncnLayer(Module):
    """Linear map, row normalisation to norm ``s``, one normalised propagation step."""

    def __init__(self, in_dim, out_dim, rng, scale=DEFAULT_SCALE, normalize=True):
        self.W = glorot(rng, in_dim, out_dim, "W")
        self.scale = float(scale)
        self.normalize = normalize

    def forward(self, h, adj):
        z = linear(h, self.W)
        if self.normalize:
            return gncn_propagate(z, adj, self.scale)
        return ag.spmm(adj, z)


def gncn_forward(layer, z, adj):
    """Apply only the normalise-and-propagate part of ``layer`` to ``z``."""
    if hasattr(adj, "normalized_adjacency"):
        adj = adj.normalized_adjacency
    return gncn_propagate(z, adj, layer.scale)


# encoders ------------------------------------------------------------------------
# ``forward(x, adj)`` returns (mu, logvar); logvar is None for non-variational encoders.

class GCNEncoder(Module):
    def __init__(self, in_dim, hidden, out_dim, rng, variational=False):
        self.conv1 = GcnLayer(in_dim, hidden, rng, "relu")
        self.conv_mu = GcnLayer(hidden, out_dim, rng, None)
        self.conv_logvar = GcnLayer(hidden, out_dim, rng, None) if variational else None
        self.out_dim = out_dim

    def forward(self, x, adj):
        h = self.conv1.forward(x, adj)
        mu = self.conv_mu.forward(h, adj)
        logvar = self.conv_logvar.forward(h, adj) if self.conv_logvar is not None else None
        return mu, logvar

    def encode(self, x, views):
        return self.forward(x, views.pos_norm)


class GNCNEncoder(Module):
    """The mean head is normalised before propagation; the log-variance head is not."""

    def __init__(self, in_dim, hidden, out_dim, rng, variational=False, scale=DEFAULT_SCALE):
        del hidden  # single linear map followed by propagation
        self.mu_layer = GncnLayer(in_dim, out_dim, rng, scale)
        self.logvar_layer = GncnLayer(in_dim, out_dim, rng, scale, normalize=False) if variational else None
        self.out_dim = out_dim

    def forward(self, x, adj):
        mu = self.mu_layer.forward(x, adj)
        logvar = self.logvar_layer.forward(x, adj) if self.logvar_layer is not None else None
        return mu, logvar

    def encode(self, x, views):
        return self.forward(x, views.pos_norm)


# auto-encoders ---------------------------------------------------------------------

class GaeModel(Module):
    """Encoder plus inner-product decoder ``sigmoid(z_i . z_j)``."""

    variational = False

    def __init__(self, encoder):
        self.encoder = encoder

    def embed(self, x, views, eps=None):
        mu, _ = self.encoder.encode(x, views)
        return mu, mu, None

    def mean_embedding(self, x, views):
        return self.encoder.encode(x, views)[0].data

    def loss(self, x, views, pos, neg, eps=None, loss="bce", dense_target=None):
        z, mu, logvar = self.embed(x, views, eps)
        return reconstruction_loss(z, pos, neg, loss, dense_target)


class VgaeModel(GaeModel):
    variational = True

    def embed(self, x, views, eps=None):
        mu, logvar = self.encoder.encode(x, views)
        if logvar is None:
            raise ValueError("VGAE needs an encoder built with variational=True")
        if eps is None:
            return mu, mu, logvar
        return ag.gaussian_sample(mu, logvar, eps), mu, logvar

    def loss(self, x, views, pos, neg, eps=None, loss="bce", dense_target=None):
        z, mu, logvar = self.embed(x, views, eps)
        rec = reconstruction_loss(z, pos, neg, loss, dense_target)
        return rec + kl_term(mu, logvar)


def kl_term(mu, logvar):
    """KL(q || N(0, I)) summed over nodes and dims, weighted 1/n^2 like the reconstruction mean."""
    n = mu.shape[0]
    return ag.kl_standard_normal(mu, logvar, scale=1.0 / (n * n))


def reconstruction_loss(z, pos, neg, loss="bce", dense_target=None):
    """Mean BCE (or squared error) between targets and ``sigmoid(z z^T)``.

    With ``dense_target`` (an n x n 0/1 array) every entry is used; otherwise
    only the given positive and negative pairs.
    """
    fn = ag.bce_with_logits if loss == "bce" else ag.squared_error
    if dense_target is not None:
        logits = ag.matmul(z, ag.transpose(z))
        return fn(logits, dense_target)
    pos = np.asarray(pos, dtype=np.int64).reshape(-1, 2)
    neg = np.asarray(neg, dtype=np.int64).reshape(-1, 2)
    pairs = np.concatenate([pos, neg])
    targets = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    logits = ag.pair_dot(z, pairs[:, 0], pairs[:, 1])
    return fn(logits, targets)


def gae_loss(model, x, views, pos, neg, dense_target=None, loss="bce"):
    return model.loss(x, views, pos, neg, None, loss, dense_target)


def vgae_loss(model, x, views, pos, neg, eps, dense_target=None, loss="bce"):
    return model.loss(x, views, pos, neg, eps, loss, dense_target)


def score_pairs(z, pairs):
    from np2l.kernels import pair_dot
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    logits = pair_dot(z, pairs[:, 0], pairs[:, 1])
    return 1.0 / (1.0 + np.exp(-logits))


def link_metrics(z, pos, neg):
    scores = np.concatenate([score_pairs(z, pos), score_pairs(z, neg)])
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    return eval_auc_ap(scores, labels)


def sample_negative_pairs(n, count, forbidden_keys, rng):
    """Uniform random pairs (i != j) avoiding ``forbidden_keys`` (sorted, i < j encoding)."""
    out = np.zeros((0, 2), np.int64)
    while len(out) < count:
        cand = rng.integers(0, n, size=(count - len(out) + 16, 2))
        cand = cand[cand[:, 0] != cand[:, 1]]
        keys = np.minimum(cand[:, 0], cand[:, 1]) * n + np.maximum(cand[:, 0], cand[:, 1])
        cand = cand[~np.isin(keys, forbidden_keys)]
        out = np.concatenate([out, cand])
    return out[:count]


# training ------------------------------------------------------------------------

@dataclass
class EmbeddingConfig:
    model: str = "gcn"
    head: str = "gae"
    hidden: int = 128
    out_dim: int = 128
    epochs: int = 200
    lr: float = 0.01
    weight_decay: float = 0.0
    dense_loss: bool = False
    loss: str = "bce"
    scale: float = DEFAULT_SCALE


@dataclass
class TrainedEmbedding:
    embedding: np.ndarray
    model: GaeModel
    losses: list
    val_auc: float = float("nan")
    val_ap: float = float("nan")


class PlainViews:
    """Adjacency views of an unsigned graph."""

    def __init__(self, graph):
        self.graph = graph
        self.pos_norm = graph.normalized_adjacency


def train_embedding(graph, x, cfg=None, seed=0, val_pos=None, val_neg=None):
    """Unsupervised link-reconstruction training; returns the noise-free embedding."""
    cfg = cfg or EmbeddingConfig()
    streams = rng_streams(seed)
    xin = feature_input(x)
    from np2l.models import build_autoencoder

    if cfg.model not in ("gcn", "gncn"):
        raise ValueError(f"embedding encoder must be gcn or gncn, got {cfg.model!r}")
    model = build_autoencoder(cfg.model, cfg.head, input_dim(xin), cfg.hidden, cfg.out_dim, streams, scale=cfg.scale)
    views = PlainViews(graph)
    opt = ag.Adam(model.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    dense = graph.to_dense() if cfg.dense_loss else None
    pos = graph.edges
    losses = []
    for epoch in range(cfg.epochs):
        opt.zero_grad()
        neg = None if dense is not None else sample_negative_pairs(graph.n, len(pos), graph.edge_keys, streams["sample"])
        eps = streams["noise"].standard_normal((graph.n, cfg.out_dim)) if model.variational else None
        try:
            loss = model.loss(xin, views, pos, neg, eps, cfg.loss, dense)
        except ag.NonFiniteError as err:
            raise ag.NonFiniteError(f"embedding training diverged at epoch {epoch}: {err}") from err
        loss.backward()
        opt.step()
        losses.append(loss.item())
    z = model.mean_embedding(xin, views)
    out = TrainedEmbedding(z, model, losses)
    if val_pos is not None and val_neg is not None and len(val_pos) and len(val_neg):
        out.val_auc, out.val_ap = link_metrics(z, val_pos, val_neg)
    return out
