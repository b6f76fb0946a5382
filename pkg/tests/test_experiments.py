import csv
import json
import logging

import numpy as np
import pytest

from np2l.datasets import Dataset, make_csbm
from np2l.experiments import (
    ExperimentConfig, LeakageError, check_no_leakage, edge_quality_report, record_json, run_grid,
    run_link_prediction, run_node_classification, save_results, sgcn_plus_filter,
)
from np2l.graph import Graph, SignedGraph
from np2l.np2e import NegativeRelation
from np2l.splits import split_edges

from conftest import dense_negative, random_signed


def _quality_oracle(signed, y, train):
    a = dense_negative(signed)
    i, j = np.nonzero(np.triu(a, 1))
    total = len(i)
    wrong = int(np.sum(y[i] == y[j]))
    bridging = int(np.sum(train[i] != train[j]))
    train_wrong = int(np.sum((y[i] == y[j]) & train[i] & train[j]))
    return total, wrong, bridging, train_wrong


@pytest.mark.parametrize("seed", range(8))
def test_edge_quality_matches_dense(seed):
    rng = np.random.default_rng(seed)
    _, s = random_signed(150, 5, 2, rng, p=0.05)
    y = rng.integers(0, 4, 150)
    train = rng.random(150) < 0.6
    q = edge_quality_report(s, y, train)
    assert (q.num_negative, q.wrong, q.bridging, q.train_wrong) == _quality_oracle(s, y, train)
    assert 0 <= q.wrong_ratio <= 1 and 0 <= q.bridging_ratio <= 1


def test_edge_quality_simple_cases():
    rel = NegativeRelation(np.array([1, 1, 2, 2]), 2)
    s = SignedGraph(4, Graph(4, np.zeros((0, 2), np.int64)), rel)
    q = edge_quality_report(s, np.array([0, 0, 1, 1]), np.ones(4, bool))
    assert q.wrong_ratio == 0.0 and q.bridging_ratio == 0.0 and q.num_negative == 4


def test_edge_quality_empty_warns(caplog):
    s = SignedGraph.unsigned(Graph.from_pairs(3, [(0, 1)]))
    with caplog.at_level(logging.WARNING):
        q = edge_quality_report(s, np.array([0, 1, 0]), np.ones(3, bool))
    assert q.wrong_ratio == 0 and q.bridging_ratio == 0
    assert "no negative edges" in caplog.text


def test_sgcn_plus_rule():
    rel = NegativeRelation(np.array([1, 2, 1]), 2)
    # pairs (0,1) and (1,2) are negative
    s = SignedGraph(3, Graph.from_pairs(3, [(0, 2)]), rel)
    assert s.neg_edges().tolist() == [[0, 1], [1, 2]]
    f = sgcn_plus_filter(s, np.array([0, 0, 1]), np.array([True, True, False]))
    assert f.neg_edges().tolist() == [[1, 2]]
    same = sgcn_plus_filter(s, np.array([0, 1, 2]), np.ones(3, bool))
    assert np.array_equal(same.neg_edges(), s.neg_edges())


@pytest.mark.parametrize("seed", range(5))
def test_sgcn_plus_monotone(seed):
    rng = np.random.default_rng(seed)
    _, s = random_signed(100, 4, 1, rng, p=0.1)
    y = rng.integers(0, 3, 100)
    train = rng.random(100) < 0.6
    f = sgcn_plus_filter(s, y, train)
    before = {tuple(e) for e in s.neg_edges().tolist()}
    after = {tuple(e) for e in f.neg_edges().tolist()}
    assert after <= before
    assert f.positive == s.positive
    assert edge_quality_report(f, y, train).train_wrong == 0


def test_leakage_check_fires(rng):
    g = Graph.from_pairs(30, rng.integers(0, 30, (80, 2)))
    split = split_edges(g, 0.8, 0)
    check_no_leakage(split, SignedGraph.unsigned(split.train_graph), split.train_edges)
    with pytest.raises(LeakageError):
        check_no_leakage(split, SignedGraph.unsigned(g), split.train_edges)
    with pytest.raises(LeakageError):
        check_no_leakage(split, SignedGraph.unsigned(split.train_graph), g.edges)


def _two_cliques(size=8):
    e = [(i, j) for c in (0, size) for i in range(c, c + size) for j in range(i + 1, c + size)]
    n = 2 * size
    return Dataset("cliques", Graph.from_pairs(n, e), np.eye(n), np.repeat([0, 1], size), 2)


def test_link_prediction_two_cliques():
    cfg = ExperimentConfig("cliques", hidden=16, out_dim=16, epochs=100, lr=0.01, weight_decay=0.0)
    rec = run_link_prediction(cfg, _two_cliques())
    assert rec.auc == 1.0


@pytest.mark.parametrize("model", ["gcn", "sgcn", "gncn", "sgncn"])
def test_single_class_node_accuracy(model):
    ds = make_csbm(n=60, num_classes=1, seed=0)
    cfg = ExperimentConfig("one", task="node", model=model, o=1, epochs=5, embed_epochs=3, num_seeds=2,
                           hidden=8, out_dim=8)
    rec = run_node_classification(cfg, ds)
    assert rec.accuracy == 1.0 and rec.accuracy_std == 0.0


@pytest.fixture(scope="module")
def small():
    return make_csbm(n=80, num_classes=3, num_features=24, seed=5)


def test_json_record_deterministic(small):
    cfg = ExperimentConfig("csbm", model="sgcn", head="vgae", o=1, epochs=10, embed_epochs=5, hidden=8, out_dim=8)
    a = record_json(cfg.resolved(3), run_link_prediction(cfg, small))
    b = record_json(cfg.resolved(3), run_link_prediction(cfg, small))
    assert a == b
    assert "wall_time" not in a


def test_node_record_has_diagnostics(small):
    cfg = ExperimentConfig("csbm", task="node", model="sgcn", o=1, epochs=5, embed_epochs=5, num_seeds=2,
                           hidden=8, out_dim=8, sgcn_plus=True)
    rec = run_node_classification(cfg, small)
    assert 0 <= rec.wrong_negative_ratio <= 1 and 0 <= rec.bridging_ratio <= 1
    assert all(r["train_wrong_ratio"] == 0 for r in rec.per_seed)
    assert len(rec.per_seed[0]["recall_curve"]) == 3


def test_closed_gate_degenerates_to_base(small):
    base = ExperimentConfig("csbm", model="gncn", epochs=15, lr=0.1, weight_decay=1e-3, hidden=8, out_dim=8)
    signed = ExperimentConfig("csbm", model="sgncn", o=3, gate="closed", epochs=15, embed_epochs=5, lr=0.1,
                              weight_decay=1e-3, hidden=8, out_dim=8)
    a, b = run_link_prediction(base, small), run_link_prediction(signed, small)
    assert (a.auc, a.ap) == (b.auc, b.ap)
    assert [r["best_epoch"] for r in a.per_seed] == [r["best_epoch"] for r in b.per_seed]


def test_grid_cardinality_and_selection(small):
    cfg = ExperimentConfig("csbm", task="node", epochs=2, num_seeds=1, hidden=8, out_dim=8)
    res = run_grid(cfg, small)
    assert len(res.cells) == 40
    best = max(r.val_metric for _, r in res.cells)
    assert res.best.val_metric == best


def test_single_cell_grid_equals_plain_run(small):
    cfg = ExperimentConfig("csbm", epochs=5, hidden=8, out_dim=8)
    res = run_grid(cfg, small, lrs=[0.05], wds=[1e-3])
    plain = run_link_prediction(ExperimentConfig("csbm", epochs=5, hidden=8, out_dim=8, lr=0.05,
                                                 weight_decay=1e-3), small)
    assert res.best.to_json() == plain.to_json()


def test_grid_workers_match_serial(small):
    cfg = ExperimentConfig("csbm", epochs=3, hidden=8, out_dim=8)
    a = run_grid(cfg, small, lrs=[0.01, 0.1], wds=[0.0], workers=2)
    b = run_grid(cfg, small, lrs=[0.01, 0.1], wds=[0.0], workers=1)
    assert [r.to_json() for _, r in a.cells] == [r.to_json() for _, r in b.cells]


def test_save_results(tmp_path, small):
    cfg = ExperimentConfig("csbm", task="node", model="sgcn", o=1, epochs=3, embed_epochs=3, num_seeds=2,
                           hidden=8, out_dim=8).resolved(3)
    rec = run_node_classification(cfg, small)
    path = save_results(tmp_path, cfg, rec)
    payload = json.loads(path.read_text())
    assert payload["run_id"] == cfg.run_id() and payload["config"]["o"] == 1
    rows = list(csv.DictReader(open(tmp_path / "summary.csv")))
    assert rows[0]["run_id"] == cfg.run_id() and rows[0]["seeds"] == "0 1"
    curve = list(csv.DictReader(open(tmp_path / "recall_curve.csv")))
    assert len(curve) == 2 * 3 and curve[-1]["o"] == "3"
    assert len(list(csv.DictReader(open(tmp_path / "edge_quality.csv")))) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("x", task="graph")
    with pytest.raises(ValueError):
        ExperimentConfig("x", layers=3)
    cfg = ExperimentConfig("cora", model="sgcn").resolved(7)
    assert (cfg.o, cfg.k, cfg.lr, cfg.weight_decay, cfg.epochs) == (3, 7, 0.01, 0.5, 400)
