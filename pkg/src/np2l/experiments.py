"""Link prediction and node classification runs, diagnostics, grids and result files."""
import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from np2l import autograd as ag
from np2l import hparams
from np2l.datasets import load_dataset
from np2l.encoders import (
    EmbeddingConfig, feature_input, input_dim, link_metrics, rng_streams, sample_negative_pairs,
)
from np2l.graph import SignedGraph, pair_keys
from np2l.metrics import accuracy
from np2l.models import SIGNED_MODELS, NodeClassifier, build_autoencoder
from np2l.np2e import run_np2e
from np2l.signed import SignedViews
from np2l.splits import split_edges, split_nodes

log = logging.getLogger(__name__)

DEFAULT_DATA_DIR = "data"


class LeakageError(AssertionError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    task: str = "link"
    model: str = "gcn"
    head: str = "gae"
    o: int = None
    k: int = None
    lr: float = None
    weight_decay: float = None
    hidden: int = 128
    out_dim: int = 128
    layers: int = 2
    epochs: int = None
    seed: int = 0
    num_seeds: int = 1
    split: int = 3
    alpha: float = 0.8
    sgcn_plus: bool = False
    dense_loss: bool = False
    loss: str = "bce"
    scale: float = 1.8
    gate: str = "learned"
    shared: bool = True
    embed_model: str = "gcn"
    embed_epochs: int = 200
    embed_lr: float = 0.01
    embed_wd: float = 0.0
    data_dir: str = DEFAULT_DATA_DIR

    def __post_init__(self):
        if self.task not in ("link", "node"):
            raise ValueError(f"task must be link or node, got {self.task!r}")
        if self.layers != 2:
            raise ValueError("only 2-layer encoders are implemented")
        if self.loss not in ("bce", "mse"):
            raise ValueError(f"loss must be bce or mse, got {self.loss!r}")

    @property
    def signed(self):
        return self.model in SIGNED_MODELS

    @property
    def seeds(self):
        return list(range(self.seed, self.seed + self.num_seeds))

    def resolved(self, num_classes):
        """Fill unset o / k / lr / wd / epochs from the published defaults."""
        k = self.k or num_classes
        o, lr, wd = hparams.lookup(self.task, self.dataset, self.model, self.head, self.split, k)
        epochs = self.epochs
        if epochs is None:
            epochs = hparams.LINK_EPOCHS if self.task == "link" else hparams.NODE_EPOCHS
        return replace(
            self, k=k, epochs=epochs,
            o=self.o if self.o is not None else (o if self.signed else None),
            lr=self.lr if self.lr is not None else lr,
            weight_decay=self.weight_decay if self.weight_decay is not None else wd,
        )

    def embedding_config(self):
        head = self.head if self.task == "link" else "gae"
        return EmbeddingConfig(model=self.embed_model, head=head, hidden=self.hidden, out_dim=self.out_dim,
                               epochs=self.embed_epochs, lr=self.embed_lr, weight_decay=self.embed_wd,
                               dense_loss=self.dense_loss, loss=self.loss, scale=self.scale)

    def run_id(self):
        payload = {k: v for k, v in asdict(self).items() if k != "data_dir"}
        digest = hashlib.sha1(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:10]
        head = self.head if self.task == "link" else "none"
        return f"{self.task}-{self.dataset}-{head}-{self.model}-{digest}"


@dataclass
class MetricsRecord:
    task: str
    seeds: list
    auc: float = None
    ap: float = None
    auc_std: float = None
    ap_std: float = None
    accuracy: float = None
    accuracy_std: float = None
    val_metric: float = None
    per_seed: list = field(default_factory=list)
    wrong_negative_ratio: float = None
    bridging_ratio: float = None
    num_negative_edges: float = None
    recall: float = None
    wall_time: float = None

    def to_json(self):
        """Everything except wall time, so repeated runs serialise identically."""
        d = asdict(self)
        d.pop("wall_time")
        return d


# diagnostics -------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeQuality:
    num_negative: int
    wrong: int
    bridging: int
    train_wrong: int
    wrong_ratio: float
    bridging_ratio: float
    train_wrong_ratio: float


def _pair_count(signed, a, b):
    """Number of negative (i, j) entries with weights a_i b_j summed over ordered pairs."""
    return float(np.sum(a * signed.neg_matmul(b)))


def edge_quality_report(signed, y, train_mask):
    """Wrong (same-label) and bridging (one endpoint in train) shares of negative edges.

    Counts come from products with the compressed negative operator, so no
    edge list is materialised.
    """
    y = np.asarray(y, dtype=np.int64)
    t = np.asarray(train_mask, dtype=np.float64)
    onehot = np.zeros((signed.n, int(y.max()) + 1))
    onehot[np.arange(signed.n), y] = 1.0
    total = signed.num_neg_edges
    wrong = int(np.rint(_pair_count(signed, onehot, onehot) / 2))
    bridging = int(np.rint(_pair_count(signed, t, 1.0 - t)))
    ty = onehot * t[:, None]
    train_wrong = int(np.rint(_pair_count(signed, ty, ty) / 2))
    if total == 0:
        log.warning("no negative edges: edge-quality ratios reported as 0")
        return EdgeQuality(0, 0, 0, 0, 0.0, 0.0, 0.0)
    return EdgeQuality(total, wrong, bridging, train_wrong, wrong / total, bridging / total, train_wrong / total)


def sgcn_plus_filter(signed, y, train_mask):
    """Drop negative edges whose endpoints are both training nodes of the same class."""
    y = np.asarray(y, dtype=np.int64)
    train_mask = np.asarray(train_mask, dtype=bool)
    groups = np.where(train_mask, y, -1)
    if signed.groups is not None:
        prev = np.asarray(signed.groups)
        if np.any((prev >= 0) & (prev != groups)):
            raise ValueError("signed graph already carries a different group exclusion")
    d = signed.dropped
    covered = (groups[d[:, 0]] >= 0) & (groups[d[:, 0]] == groups[d[:, 1]]) if len(d) else np.zeros(0, bool)
    return SignedGraph(signed.n, signed.positive, signed.relation, d[~covered], groups)


def check_no_leakage(split, signed, targets):
    """Held-out positives must not reach the positive view or the reconstruction targets."""
    held = split.heldout_keys()
    if np.isin(signed.positive.edge_keys, held).any():
        raise LeakageError("a validation/test edge is a positive edge of the training view")
    if np.isin(pair_keys(targets, split.n), held).any():
        raise LeakageError("a validation/test edge is a reconstruction target")


# link prediction -----------------------------------------------------------------

def _load(cfg, data):
    return data if data is not None else load_dataset(cfg.data_dir, cfg.dataset)


def _link_seed(cfg, data, seed):
    graph, x, y = data
    split = split_edges(graph, cfg.alpha, seed)
    train = split.train_graph
    streams = rng_streams(seed)
    diag = {"seed": seed}
    if cfg.signed:
        res = run_np2e(train, x, cfg.k, cfg.o, cfg.embedding_config(), labels=y, seed=seed)
        signed = res.signed
        diag["recall_curve"] = [r.recall for r in res.curve]
        diag["recall"] = res.recall.recall
    else:
        signed = SignedGraph.unsigned(train)
    targets = train.edges
    check_no_leakage(split, signed, targets)

    xin = feature_input(x)
    model = build_autoencoder(cfg.model, cfg.head, input_dim(xin), cfg.hidden, cfg.out_dim, streams,
                              scale=cfg.scale, gate=cfg.gate, shared=cfg.shared)
    views = SignedViews(signed)
    opt = ag.Adam(model.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    dense = train.to_dense() if cfg.dense_loss else None
    best_val, best_state, best_epoch = -np.inf, model.state_dict(), -1
    for epoch in range(cfg.epochs):
        opt.zero_grad()
        neg = None if dense is not None else sample_negative_pairs(train.n, len(targets), train.edge_keys,
                                                                    streams["sample"])
        eps = streams["noise"].standard_normal((train.n, cfg.out_dim)) if model.variational else None
        loss = model.loss(xin, views, targets, neg, eps, cfg.loss, dense)
        loss.backward()
        opt.step()
        val_auc, _ = link_metrics(model.mean_embedding(xin, views), split.val_edges, split.val_neg)
        if val_auc > best_val:
            best_val, best_state, best_epoch = val_auc, model.state_dict(), epoch
    model.load_state_dict(best_state)
    z = model.mean_embedding(xin, views)
    auc, ap = link_metrics(z, split.test_edges, split.test_neg)
    diag.update(auc=auc, ap=ap, val_auc=float(best_val), best_epoch=best_epoch,
                num_negative_edges=signed.num_neg_edges)
    return diag


def run_link_prediction(cfg, data=None):
    data = _load(cfg, data)
    cfg = cfg.resolved(data.num_classes)
    t0 = time.perf_counter()
    runs = [_link_seed(cfg, data, s) for s in cfg.seeds]
    auc = np.array([r["auc"] for r in runs])
    ap = np.array([r["ap"] for r in runs])
    rec = MetricsRecord(
        task="link", seeds=cfg.seeds, auc=float(auc.mean()), ap=float(ap.mean()),
        auc_std=float(auc.std()), ap_std=float(ap.std()),
        val_metric=float(np.mean([r["val_auc"] for r in runs])), per_seed=runs,
        num_negative_edges=float(np.mean([r["num_negative_edges"] for r in runs])),
    )
    if cfg.signed:
        rec.recall = float(np.mean([r["recall"] for r in runs]))
    rec.wall_time = time.perf_counter() - t0
    return rec


# node classification -------------------------------------------------------------

def _node_seed(cfg, data, seed):
    graph, x, y = data
    split = split_nodes(y, cfg.split, seed, num_classes=data.num_classes)
    streams = rng_streams(seed)
    diag = {"seed": seed}
    if cfg.signed:
        # structure is transductive; labels are never used to build the relation
        res = run_np2e(graph, x, cfg.k, cfg.o, cfg.embedding_config(), labels=y, seed=seed)
        signed = res.signed
        diag["recall_curve"] = [r.recall for r in res.curve]
        diag["recall"] = res.recall.recall
        if cfg.sgcn_plus:
            signed = sgcn_plus_filter(signed, y, split.train_mask)
        q = edge_quality_report(signed, y, split.train_mask)
        diag.update(wrong_ratio=q.wrong_ratio, bridging_ratio=q.bridging_ratio,
                    train_wrong_ratio=q.train_wrong_ratio, num_negative_edges=q.num_negative)
    else:
        signed = SignedGraph.unsigned(graph)

    xin = feature_input(x)
    model = NodeClassifier(cfg.model, input_dim(xin), cfg.hidden, data.num_classes, streams,
                           scale=cfg.scale, gate=cfg.gate, shared=cfg.shared)
    views = SignedViews(signed)
    opt = ag.Adam(model.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    train_idx, val_idx, test_idx = split.train_idx, split.val_idx, split.test_idx
    best_val, best_state, best_epoch = -np.inf, model.state_dict(), -1
    for epoch in range(cfg.epochs):
        opt.zero_grad()
        logits = model.logits(xin, views)
        loss = ag.softmax_cross_entropy(logits, y, train_idx)
        loss.backward()
        opt.step()
        pred = np.argmax(model.logits(xin, views).data, axis=1)
        val_acc = accuracy(pred[val_idx], y[val_idx])
        if val_acc > best_val:
            best_val, best_state, best_epoch = val_acc, model.state_dict(), epoch
    model.load_state_dict(best_state)
    pred = np.argmax(model.logits(xin, views).data, axis=1)
    diag.update(accuracy=accuracy(pred[test_idx], y[test_idx]), val_accuracy=float(best_val),
                best_epoch=best_epoch)
    return diag


def run_node_classification(cfg, data=None):
    data = _load(cfg, data)
    cfg = cfg.resolved(data.num_classes)
    t0 = time.perf_counter()
    runs = [_node_seed(cfg, data, s) for s in cfg.seeds]
    acc = np.array([r["accuracy"] for r in runs])
    rec = MetricsRecord(
        task="node", seeds=cfg.seeds, accuracy=float(acc.mean()), accuracy_std=float(acc.std()),
        val_metric=float(np.mean([r["val_accuracy"] for r in runs])), per_seed=runs,
    )
    if cfg.signed:
        rec.wrong_negative_ratio = float(np.mean([r["wrong_ratio"] for r in runs]))
        rec.bridging_ratio = float(np.mean([r["bridging_ratio"] for r in runs]))
        rec.num_negative_edges = float(np.mean([r["num_negative_edges"] for r in runs]))
        rec.recall = float(np.mean([r["recall"] for r in runs]))
    rec.wall_time = time.perf_counter() - t0
    return rec


def run_experiment(cfg, data=None):
    if cfg.task == "link":
        return run_link_prediction(cfg, data)
    return run_node_classification(cfg, data)


# grid ------------------------------------------------------------------------------

@dataclass
class GridResult:
    best_config: ExperimentConfig
    best: MetricsRecord
    cells: list


def _grid_cell(args):
    cfg, data = args
    return run_experiment(cfg, data)


def run_grid(cfg, data=None, lrs=hparams.LR_GRID, wds=hparams.WD_GRID, workers=1, out_dir=None):
    """Run every (lr, wd) cell and pick the one with the best validation metric."""
    data = _load(cfg, data)
    cells = [replace(cfg, lr=float(lr), weight_decay=float(wd)) for lr in lrs for wd in wds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_grid_cell, [(c, data) for c in cells]))
    else:
        records = [run_experiment(c, data) for c in cells]
    best_i = 0
    for i, rec in enumerate(records):
        # strict comparison: ties keep the earlier cell
        if rec.val_metric > records[best_i].val_metric:
            best_i = i
    if out_dir is not None:
        for c, rec in zip(cells, records):
            save_results(out_dir, c.resolved(data.num_classes), rec)
    return GridResult(cells[best_i], records[best_i], list(zip(cells, records)))


# persistence ---------------------------------------------------------------------

SUMMARY_FIELDS = ("run_id", "task", "dataset", "model", "head", "o", "k", "lr", "weight_decay", "split",
                  "sgcn_plus", "seeds", "auc", "auc_std", "ap", "ap_std", "accuracy", "accuracy_std",
                  "val_metric", "wrong_negative_ratio", "bridging_ratio", "recall", "wall_time")


def record_json(cfg, rec):
    payload = {"run_id": cfg.run_id(), "config": asdict(cfg), "metrics": rec.to_json()}
    payload["config"].pop("data_dir")
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _append_csv(path, fields, rows):
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(fields)
        w.writerows(rows)


def save_results(out_dir, cfg, rec):
    """Write ``<run-id>.json`` and append to the summary, recall-curve and edge-quality tables."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run_id = cfg.run_id()
    path = out / f"{run_id}.json"
    path.write_text(record_json(cfg, rec))
    c, m = asdict(cfg), asdict(rec)
    row = [run_id] + [c.get(f, m.get(f)) if f in c else m.get(f) for f in SUMMARY_FIELDS[1:]]
    row[SUMMARY_FIELDS.index("seeds")] = " ".join(map(str, cfg.seeds))
    _append_csv(out / "summary.csv", SUMMARY_FIELDS, [row])
    curves = [(run_id, r["seed"], o + 1, v) for r in rec.per_seed for o, v in enumerate(r.get("recall_curve", []))]
    if curves:
        _append_csv(out / "recall_curve.csv", ("run_id", "seed", "o", "recall"), curves)
    quality = [(run_id, r["seed"], r["wrong_ratio"], r["bridging_ratio"], r["train_wrong_ratio"],
                r["num_negative_edges"]) for r in rec.per_seed if "wrong_ratio" in r]
    if quality:
        _append_csv(out / "edge_quality.csv",
                    ("run_id", "seed", "wrong_ratio", "bridging_ratio", "train_wrong_ratio", "num_negative_edges"),
                    quality)
    return path
