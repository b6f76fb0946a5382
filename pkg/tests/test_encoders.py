import numpy as np
import pytest

from np2l import autograd as ag
from np2l.autograd import Tensor
from np2l.encoders import (
    EmbeddingConfig, GaeModel, GCNEncoder, GcnLayer, GncnLayer, GNCNEncoder, PlainViews, VgaeModel,
    gcn_forward, gncn_forward, kl_term, link_metrics, load_checkpoint, reconstruction_loss, rng_streams,
    save_checkpoint, train_embedding,
)
from np2l.graph import Graph

from conftest import numeric_grad_check, random_graph


def test_gcn_isolated_node():
    rng = np.random.default_rng(0)
    layer = GcnLayer(3, 2, rng, "relu")
    g = Graph(1, np.zeros((0, 2), np.int64))
    x = rng.standard_normal((1, 3))
    out = gcn_forward(layer, x, g.normalized_adjacency)
    assert np.allclose(out.data, np.maximum(x @ layer.W.data, 0))


def test_gcn_two_node_average():
    layer = GcnLayer(2, 2, np.random.default_rng(0), None)
    layer.W.data = np.eye(2)
    g = Graph.from_pairs(2, [(0, 1)])
    x = np.array([[1.0, 2.0], [3.0, 6.0]])
    out = gcn_forward(layer, x, g.normalized_adjacency).data
    assert np.allclose(out, [[2.0, 4.0], [2.0, 4.0]])


def test_gcn_zero_features():
    layer = GcnLayer(4, 3, np.random.default_rng(0), "relu")
    g = Graph.from_pairs(3, [(0, 1)])
    assert np.all(gcn_forward(layer, np.zeros((3, 4)), g.normalized_adjacency).data == 0)


def test_gncn_isolated_node():
    layer = GncnLayer(2, 2, np.random.default_rng(0), scale=1.8)
    g = Graph(1, np.zeros((0, 2), np.int64))
    z = np.array([[1.2, 1.6]])  # norm 2
    assert np.allclose(gncn_forward(layer, z, g).data, 0.9 * z)


def test_gncn_three_node_path():
    layer = GncnLayer(2, 2, np.random.default_rng(0), scale=1.0)
    g = Graph.from_pairs(3, [(0, 1), (1, 2)])
    z = np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
    out = gncn_forward(layer, z, g).data
    # degrees 1, 2, 1 -> d+1 = 2, 3, 2
    mid = z[1] / 3 + z[0] / np.sqrt(6) + z[2] / np.sqrt(6)
    end0 = z[0] / 2 + z[1] / np.sqrt(6)
    assert np.allclose(out[1], mid) and np.allclose(out[0], end0)


def test_gncn_regular_graph_equal_rows():
    layer = GncnLayer(2, 2, np.random.default_rng(0), scale=1.8)
    g = Graph.from_pairs(5, [(i, (i + 1) % 5) for i in range(5)])
    out = gncn_forward(layer, np.tile([[0.3, -0.7]], (5, 1)), g).data
    assert np.allclose(out, out[0])


def test_gncn_prepropagation_norms(rng):
    z = Tensor(rng.standard_normal((20, 5)))
    z.data[3] = 0.0
    norms = np.linalg.norm(ag.row_normalize(z, 1.8).data, axis=1)
    assert np.allclose(np.delete(norms, 3), 1.8, atol=1e-6)
    assert norms[3] == 0


def test_gae_loss_zero_embedding():
    z = Tensor(np.zeros((4, 3)), requires_grad=True)
    loss = reconstruction_loss(z, [(0, 1)], [(2, 3)])
    assert loss.item() == pytest.approx(np.log(2))


def test_gae_loss_saturated():
    g = Graph.from_pairs(4, [(0, 1), (2, 3)])
    z = Tensor(40.0 * np.array([[1.0], [1.0], [-1.0], [-1.0]]), requires_grad=True)
    # z_i . z_i > 0, so the diagonal target is 1
    target = g.to_dense() + np.eye(4)
    assert reconstruction_loss(z, None, None, dense_target=target).item() < 1e-12


def test_dense_loss_matches_direct_formula(rng):
    g = random_graph(5, 0.5, rng)
    z = Tensor(rng.standard_normal((5, 3)))
    a = g.to_dense()
    s = 1 / (1 + np.exp(-(z.data @ z.data.T)))
    direct = -np.mean(a * np.log(s) + (1 - a) * np.log(1 - s))
    assert reconstruction_loss(z, None, None, dense_target=a).item() == pytest.approx(direct, rel=1e-12)
    # the sampled estimator over every ordered pair equals the dense form
    pairs = np.array([(i, j) for i in range(5) for j in range(5)])
    pos, neg = pairs[a[pairs[:, 0], pairs[:, 1]] > 0], pairs[a[pairs[:, 0], pairs[:, 1]] == 0]
    assert reconstruction_loss(z, pos, neg).item() == pytest.approx(direct, rel=1e-12)


def test_mse_loss_option(rng):
    z = Tensor(rng.standard_normal((5, 2)))
    a = random_graph(5, 0.5, rng).to_dense()
    s = 1 / (1 + np.exp(-(z.data @ z.data.T)))
    assert reconstruction_loss(z, None, None, "mse", a).item() == pytest.approx(np.mean((a - s) ** 2))


def test_kl_standard_normal_is_zero():
    mu, lv = Tensor(np.zeros((3, 2))), Tensor(np.zeros((3, 2)))
    assert kl_term(mu, lv).item() == 0.0


def test_kl_one_unit_closed_form():
    # KL(N(1, 1) || N(0, 1)) = 1/2
    assert kl_term(Tensor(np.ones((1, 1))), Tensor(np.zeros((1, 1)))).item() == pytest.approx(0.5)


def test_kl_nonnegative(rng):
    for _ in range(20):
        mu, lv = Tensor(rng.standard_normal((4, 3))), Tensor(rng.standard_normal((4, 3)))
        assert kl_term(mu, lv).item() >= 0


def _toy(rng, n=12):
    g = random_graph(n, 0.3, rng)
    return g, rng.standard_normal((n, 5)), PlainViews(g)


@pytest.mark.parametrize("cls,variational", [(GCNEncoder, False), (GCNEncoder, True),
                                             (GNCNEncoder, False), (GNCNEncoder, True)])
def test_autoencoder_gradcheck(cls, variational):
    rng = np.random.default_rng(11)
    g, x, views = _toy(rng)
    enc = cls(5, 6, 4, rng, variational)
    model = VgaeModel(enc) if variational else GaeModel(enc)
    eps = rng.standard_normal((g.n, 4)) if variational else None
    neg = np.array([(0, 5), (1, 7), (2, 9), (3, 4)])
    loss = lambda: model.loss(Tensor(x), views, g.edges, neg, eps)  # noqa: E731
    assert numeric_grad_check(loss, model.parameters(), rng) <= 1e-4


def test_vgae_zero_noise_deterministic(rng):
    g, x, views = _toy(rng)
    model = VgaeModel(GCNEncoder(5, 6, 4, rng, True))
    eps = np.zeros((g.n, 4))
    a = model.loss(Tensor(x), views, g.edges, [(0, 1)], eps).item()
    b = model.loss(Tensor(x), views, g.edges, [(0, 1)], eps).item()
    assert a == b


def test_gcn_encoder_permutation_equivariance():
    rng = np.random.default_rng(3)
    g, x, _ = _toy(rng, 10)
    perm = rng.permutation(10)
    inv = np.argsort(perm)
    gp = Graph.from_pairs(10, inv[g.edges])
    enc = GCNEncoder(5, 8, 4, np.random.default_rng(0))
    z = enc.forward(Tensor(x), g.normalized_adjacency)[0].data
    # node v of the permuted graph is node perm[v] of the original
    zp = enc.forward(Tensor(x[perm]), gp.normalized_adjacency)[0].data
    assert np.allclose(zp, z[perm], atol=1e-12)


def test_zero_epochs_is_initial_forward(rng):
    g, x, views = _toy(rng)
    cfg = EmbeddingConfig(hidden=8, out_dim=8, epochs=0)
    t = train_embedding(g, x, cfg, seed=4)
    fresh = GaeModel(GCNEncoder(5, 8, 8, rng_streams(4)["init"]))
    assert np.array_equal(t.embedding, fresh.mean_embedding(Tensor(x), views))


def test_two_cliques_separable():
    e = [(i, j) for c in (0, 4) for i in range(c, c + 4) for j in range(i + 1, c + 4)]
    g = Graph.from_pairs(8, e)
    t = train_embedding(g, np.eye(8), EmbeddingConfig(hidden=16, out_dim=16), seed=0)
    inter = np.array([(i, j) for i in range(4) for j in range(4, 8)])
    auc, _ = link_metrics(t.embedding, np.array(e), inter)
    assert auc == 1.0
    # a linear separator between the cliques exists: the difference of their means
    w = t.embedding[:4].mean(0) - t.embedding[4:].mean(0)
    proj = t.embedding @ w
    assert proj[:4].min() > proj[4:].max()


def test_train_embedding_deterministic(rng):
    g, x, _ = _toy(rng)
    cfg = EmbeddingConfig(head="vgae", hidden=8, out_dim=8, epochs=15)
    assert np.array_equal(train_embedding(g, x, cfg, 2).embedding, train_embedding(g, x, cfg, 2).embedding)


def test_diverging_training_reports(rng):
    g, x, _ = _toy(rng)
    x[2, 1] = np.inf
    with pytest.raises(ag.NonFiniteError, match="epoch 0"):
        train_embedding(g, x, EmbeddingConfig(hidden=8, out_dim=8, epochs=5), 0)


def test_checkpoint_roundtrip(tmp_path, rng):
    enc = GCNEncoder(5, 6, 4, rng, True)
    save_checkpoint(enc, tmp_path / "w.json")
    other = GCNEncoder(5, 6, 4, np.random.default_rng(99), True)
    load_checkpoint(other, tmp_path / "w.json")
    for (na, a), (nb, b) in zip(enc.named_parameters(), other.named_parameters()):
        assert na == nb and np.array_equal(a.data, b.data)
