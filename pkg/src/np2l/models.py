"""Model factory: encoder family x head, for both tasks."""
from np2l import autograd as ag
from np2l.encoders import (
    DEFAULT_SCALE, GaeModel, GCNEncoder, GNCNEncoder, Module, VgaeModel, glorot,
)
from np2l.signed import SGCNEncoder, TwoStreamEncoder

MODELS = ("gcn", "sgcn", "gncn", "sgncn")
HEADS = ("gae", "vgae")
SIGNED_MODELS = ("sgcn", "sgncn")


def build_encoder(model, in_dim, hidden, out_dim, streams, variational=False,
                  scale=DEFAULT_SCALE, gate="learned", shared=True):
    """All encoders expose ``encode(x, views) -> (mu, logvar)``.

    Base weights come from the ``init`` stream and anything a signed variant
    adds (the gate) from ``extra_init``, so a closed-gate model starts from
    exactly the same weights as its unsigned base.
    """
    rng = streams["init"]
    if model == "gcn":
        return GCNEncoder(in_dim, hidden, out_dim, rng, variational)
    if model == "gncn":
        return GNCNEncoder(in_dim, hidden, out_dim, rng, variational, scale)
    if model == "sgcn":
        return SGCNEncoder(in_dim, hidden, out_dim, rng, variational)
    if model == "sgncn":
        base = GNCNEncoder(in_dim, hidden, out_dim, rng, variational, scale)
        return TwoStreamEncoder(base, streams["extra_init"], gate=gate, shared=shared)
    raise ValueError(f"unknown model {model!r}; choose from {MODELS}")


def build_autoencoder(model, head, in_dim, hidden, out_dim, streams, **kw):
    if head not in HEADS:
        raise ValueError(f"unknown head {head!r}; choose from {HEADS}")
    enc = build_encoder(model, in_dim, hidden, out_dim, streams, variational=head == "vgae", **kw)
    return VgaeModel(enc) if head == "vgae" else GaeModel(enc)


class NodeClassifier(Module):
    """Encoder producing class logits.

    GCN, GNCN and the two-stream SGNCN map straight to ``num_classes``, so a
    closed-gate SGNCN is the GNCN classifier. SGCN produces a ``hidden``-wide
    representation (two concatenated streams) followed by ReLU and a linear
    read-out.
    """

    def __init__(self, model, in_dim, hidden, num_classes, streams, **kw):
        self.model = model
        if model != "sgcn":
            self.encoder = build_encoder(model, in_dim, hidden, num_classes, streams, **kw)
            self.readout = None
        else:
            self.encoder = build_encoder(model, in_dim, hidden, hidden, streams, **kw)
            self.readout = glorot(streams["extra_init"], hidden, num_classes, "readout")

    def logits(self, x, views):
        z, _ = self.encoder.encode(x, views)
        if self.readout is None:
            return z
        return ag.matmul(ag.relu(z), self.readout)
