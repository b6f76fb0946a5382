"""Message passing over signed graphs: the SGCN layer and two-stream gating."""
import copy
from functools import cached_property

import numpy as np

from np2l import autograd as ag
from np2l.encoders import Module, glorot, linear


class NegativeOperator:
    """Constant operator ``D^-p A_neg D^-q`` applied through the compressed relation.

    ``mode="mean"`` gives ``D^-1 A_neg`` (mean over negative neighbours),
    ``mode="sym"`` gives ``D^-1/2 A_neg D^-1/2``. Nodes without negative
    neighbours get zero rows. No self-loops are added, so an empty negative
    edge set yields the zero operator.
    """

    def __init__(self, signed, mode="mean"):
        if mode not in ("mean", "sym"):
            raise ValueError(f"unknown mode {mode!r}")
        self.signed = signed
        self.mode = mode
        deg = signed.neg_degree.astype(np.float64)
        nz = deg > 0
        if mode == "mean":
            self.left = np.where(nz, 1.0 / np.where(nz, deg, 1.0), 0.0)
            self.right = np.ones_like(deg)
        else:
            self.left = np.where(nz, 1.0 / np.sqrt(np.where(nz, deg, 1.0)), 0.0)
            self.right = self.left
        self.shape = (signed.n, signed.n)

    def matmul(self, h):
        return self.left[:, None] * self.signed.neg_matmul(self.right[:, None] * h)

    def rmatmul(self, g):
        # A_neg is symmetric, so the transpose swaps the diagonal scalings
        return self.right[:, None] * self.signed.neg_matmul(self.left[:, None] * g)

    def to_dense(self):
        return self.matmul(np.eye(self.shape[0]))


def negative_aggregation_over_cliques(signed, h):
    """Mean of ``h`` over each node's negative neighbours (zero when there are none)."""
    return NegativeOperator(signed, "mean").matmul(np.asarray(h, dtype=np.float64))


class SignedViews:
    """Adjacency views of a signed graph shared by all encoders."""

    def __init__(self, signed):
        self.signed = signed

    @property
    def graph(self):
        return self.signed.positive

    @property
    def pos_norm(self):
        return self.signed.positive.normalized_adjacency

    @property
    def pos_mean(self):
        return self.signed.positive.mean_adjacency

    @cached_property
    def neg_mean(self):
        return NegativeOperator(self.signed, "mean")

    @cached_property
    def neg_norm(self):
        return NegativeOperator(self.signed, "sym")


# SGCN ----------------------------------------------------------------------------

class SgcnLayer(Module):
    """One signed layer with crossed streams.

    positive state: ``W_pos [mean_{N+} Z_pos, mean_{N-} Z_neg, Z_pos]``
    negative state: ``W_neg [mean_{N+} Z_neg, mean_{N-} Z_pos, Z_neg]``

    The block product is split as three row slices of W, and each mean is
    taken after the slice product (aggregation is linear).
    """

    def __init__(self, in_dim, out_dim, rng, activation="relu"):
        self.W_pos = glorot(rng, 3 * in_dim, out_dim, "W_pos")
        self.W_neg = glorot(rng, 3 * in_dim, out_dim, "W_neg")
        self.in_dim = in_dim
        self.activation = activation

    def _blocks(self, w):
        d = self.in_dim
        return ag.row_slice(w, 0, d), ag.row_slice(w, d, 2 * d), ag.row_slice(w, 2 * d, 3 * d)

    def forward(self, z_pos, z_neg, pos_mean, neg_mean):
        p1, p2, p3 = self._blocks(self.W_pos)
        n1, n2, n3 = self._blocks(self.W_neg)
        new_pos = ag.spmm(pos_mean, linear(z_pos, p1)) + ag.spmm(neg_mean, linear(z_neg, p2)) + linear(z_pos, p3)
        new_neg = ag.spmm(pos_mean, linear(z_neg, n1)) + ag.spmm(neg_mean, linear(z_pos, n2)) + linear(z_neg, n3)
        if self.activation == "relu":
            new_pos, new_neg = ag.relu(new_pos), ag.relu(new_neg)
        return new_pos, new_neg


def sgcn_forward(layers, views, x):
    """Run stacked SGCN layers from ``Z_pos = Z_neg = X``; returns ``[Z_pos, Z_neg]``."""
    z_pos = z_neg = x
    for layer in layers:
        z_pos, z_neg = layer.forward(z_pos, z_neg, views.pos_mean, views.neg_mean)
    return ag.concat([z_pos, z_neg], axis=1)


class SGCNEncoder(Module):
    """Two SGCN layers; each stream has half the requested width so the output is ``out_dim`` wide."""

    def __init__(self, in_dim, hidden, out_dim, rng, variational=False):
        if hidden % 2 or out_dim % 2:
            raise ValueError("SGCN widths must be even (two concatenated streams)")
        self.layer1 = SgcnLayer(in_dim, hidden // 2, rng, "relu")
        self.layer_mu = SgcnLayer(hidden // 2, out_dim // 2, rng, None)
        self.layer_logvar = SgcnLayer(hidden // 2, out_dim // 2, rng, None) if variational else None
        self.out_dim = out_dim

    def forward(self, x, views):
        pos, neg = self.layer1.forward(x, x, views.pos_mean, views.neg_mean)
        mu = ag.concat(list(self.layer_mu.forward(pos, neg, views.pos_mean, views.neg_mean)), axis=1)
        logvar = None
        if self.layer_logvar is not None:
            logvar = ag.concat(list(self.layer_logvar.forward(pos, neg, views.pos_mean, views.neg_mean)), axis=1)
        return mu, logvar

    def encode(self, x, views):
        return self.forward(x, views)


# two-stream gating -------------------------------------------------------------------

GATE_MODES = ("learned", "closed", "open")


class TwoStreamEncoder(Module):
    """``Z = (1 - a) f(X, A_pos) + a f(X, A_neg)`` with ``a = sigmoid(f(X, A_neg) W_att)`` per node.

    ``base`` is any encoder with ``forward(x, adj) -> (mu, logvar)``. The
    negative stream reuses its weights unless ``shared=False``. For
    variational bases the gate computed from the negative-stream mean is
    applied to both mean and log-variance. ``gate="closed"`` returns the
    positive stream unchanged and ``gate="open"`` the negative one.
    """

    def __init__(self, base, rng, gate="learned", shared=True):
        if gate not in GATE_MODES:
            raise ValueError(f"gate must be one of {GATE_MODES}")
        self.base = base
        self.neg_base = None if shared else copy.deepcopy(base)
        if self.neg_base is not None:
            _reinit(self.neg_base, rng)
        self.W_att = glorot(rng, base.out_dim, 1, "W_att")
        self.gate = gate
        self.out_dim = base.out_dim

    def _neg(self, x, adj):
        return (self.neg_base or self.base).forward(x, adj)

    def gate_values(self, x, views):
        mu_neg, _ = self._neg(x, views.neg_norm)
        return ag.sigmoid(ag.matmul(mu_neg, self.W_att))

    def forward(self, x, views):
        if self.gate == "closed":
            return self.base.forward(x, views.pos_norm)
        if self.gate == "open":
            return self._neg(x, views.neg_norm)
        mu_p, lv_p = self.base.forward(x, views.pos_norm)
        mu_n, lv_n = self._neg(x, views.neg_norm)
        a = ag.sigmoid(ag.matmul(mu_n, self.W_att))
        keep = 1.0 - a
        mu = keep * mu_p + a * mu_n
        logvar = None if lv_p is None else keep * lv_p + a * lv_n
        return mu, logvar

    def encode(self, x, views):
        return self.forward(x, views)


def two_stream_forward(model, x, views):
    return model.forward(x, views)[0]


def _reinit(module, rng):
    for _, p in module.named_parameters():
        fan_in, fan_out = p.shape
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        p.data = rng.uniform(-bound, bound, size=p.shape)
        p.grad = None


def as_signed_views(obj):
    from np2l.graph import Graph, SignedGraph

    if isinstance(obj, SignedViews):
        return obj
    if isinstance(obj, SignedGraph):
        return SignedViews(obj)
    if isinstance(obj, Graph):
        return SignedViews(SignedGraph.unsigned(obj))
    raise TypeError(f"cannot build adjacency views from {type(obj).__name__}")

