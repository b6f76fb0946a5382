"""On-disk dataset format, converters from common raw layouts, and a synthetic generator.

A dataset directory holds::

    edges.tsv      two 0-based integer columns, one edge per line
    features.csv   n rows of m comma-separated reals
    labels.txt     n integers
    manifest.json  {"name", "n", "m", "num_classes"} (+ optional "num_edges")

Directed inputs are symmetrised on load; self-loops and duplicates are dropped.
"""
import json
import logging
import pickle
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from np2l.graph import Graph, canonical_pairs

log = logging.getLogger(__name__)

# (nodes, directed edge entries, features, classes) as published for the benchmarks.
KNOWN_STATS = {
    "photo": (7650, 238162, 745, 8),
    "computers": (13752, 491722, 767, 10),
    "cs": (18333, 163788, 6805, 10),
    "actor": (7600, 30019, 932, 5),
    "cora": (2708, 10556, 1433, 7),
    "citeseer": (3327, 9104, 3703, 6),
    "chameleon": (2277, 36101, 2325, 5),
    "squirrel": (5201, 217073, 2089, 5),
    "cornell": (183, 298, 1703, 5),
    "texas": (183, 325, 1703, 5),
    "wisconsin": (251, 515, 1703, 5),
}

FILES = ("edges.tsv", "features.csv", "labels.txt", "manifest.json")


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __iter__(self):
        return iter((self.graph, self.features, self.labels))


def resolve_dir(path, name=None):
    path = Path(path)
    if name is not None and (path / name / "manifest.json").exists():
        return path / name
    if name is not None and (path / name.lower() / "manifest.json").exists():
        return path / name.lower()
    return path


def load_dataset(path, name=None):
    """Load ``<path>/<name>/`` (or ``path`` itself) and validate it against its manifest."""
    root = resolve_dir(path, name)
    missing = [f for f in FILES if not (root / f).exists()]
    if missing:
        raise FileNotFoundError(f"dataset at {root} is missing {', '.join(missing)}")
    manifest = json.loads((root / "manifest.json").read_text())
    n, m, c = int(manifest["n"]), int(manifest["m"]), int(manifest["num_classes"])
    if name is not None and manifest.get("name", name).lower() != name.lower():
        raise ValueError(f"manifest names dataset {manifest.get('name')!r}, expected {name!r}")

    raw = np.loadtxt(root / "edges.tsv", dtype=np.int64, ndmin=2)
    raw = raw.reshape(-1, 2) if raw.size else np.zeros((0, 2), np.int64)
    if raw.size and (raw.min() < 0 or raw.max() >= n):
        raise ValueError(f"edge index out of range for n={n}")
    graph = Graph(n, canonical_pairs(raw, n))

    x = np.loadtxt(root / "features.csv", delimiter=",", dtype=np.float64, ndmin=2)
    if x.shape != (n, m):
        raise ValueError(f"features have shape {x.shape}, manifest says {(n, m)}")
    if not np.all(np.isfinite(x)):
        raise ValueError("features contain non-finite values")

    y = np.loadtxt(root / "labels.txt", dtype=np.int64, ndmin=1)
    if y.shape != (n,):
        raise ValueError(f"expected {n} labels, got {y.shape[0]}")
    if y.min() < 0 or y.max() >= c:
        raise ValueError(f"class id out of range [0, {c})")

    if "num_edges" in manifest and int(manifest["num_edges"]) != graph.num_edges:
        raise ValueError(f"manifest says {manifest['num_edges']} edges, loaded {graph.num_edges}")
    ds_name = manifest.get("name", name or root.name)
    _check_known(ds_name, graph, m, c)
    return Dataset(ds_name, graph, x, y, c)


def _check_known(name, graph, m, c):
    stats = KNOWN_STATS.get(str(name).lower())
    if stats is None:
        return
    n0, e0, m0, c0 = stats
    got = (graph.n, graph.num_directed_edges, m, c)
    if got != stats:
        log.warning("%s statistics %s differ from the published %s", name, got, (n0, e0, m0, c0))


def save_dataset(path, name, graph, features, labels, num_classes=None):
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    num_classes = int(labels.max()) + 1 if num_classes is None else int(num_classes)
    np.savetxt(root / "edges.tsv", graph.edges, fmt="%d", delimiter="\t")
    np.savetxt(root / "features.csv", features, fmt="%.17g", delimiter=",")
    np.savetxt(root / "labels.txt", labels, fmt="%d")
    manifest = {"name": name, "n": graph.n, "m": int(features.shape[1]),
                "num_classes": num_classes, "num_edges": graph.num_edges}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return root


# converters -------------------------------------------------------------------

def convert_planetoid(raw_dir, name, out_dir):
    """Convert the ``ind.<name>.*`` pickles of the Planetoid release.

    Only run this on files from a source you trust: they are pickles.
    """
    raw_dir = Path(raw_dir)
    parts = {}
    for key in ("x", "y", "tx", "ty", "allx", "ally", "graph"):
        with open(raw_dir / f"ind.{name}.{key}", "rb") as fh:
            parts[key] = pickle.load(fh, encoding="latin1")
    test_idx = np.loadtxt(raw_dir / f"ind.{name}.test.index", dtype=np.int64, ndmin=1)
    test_sorted = np.sort(test_idx)
    tx, ty = sp.csr_matrix(parts["tx"]), np.asarray(parts["ty"])
    if name.lower() == "citeseer":
        # isolated test nodes are missing from tx/ty; pad them with zero rows
        full = np.arange(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = sp.lil_matrix((full.size, tx.shape[1]))
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        ty_ext = np.zeros((full.size, ty.shape[1]))
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        tx, ty, test_sorted = sp.csr_matrix(tx_ext), ty_ext, full
    feats = sp.vstack([sp.csr_matrix(parts["allx"]), tx]).tolil()
    feats[test_idx, :] = feats[test_sorted, :]
    onehot = np.vstack([np.asarray(parts["ally"]), ty])
    onehot[test_idx, :] = onehot[test_sorted, :]
    labels = onehot.argmax(axis=1)
    n = feats.shape[0]
    pairs = [(int(u), int(v)) for u, nbrs in parts["graph"].items() for v in nbrs if int(v) < n and int(u) < n]
    graph = Graph.from_pairs(n, pairs)
    return save_dataset(out_dir, name.lower(), graph, feats.toarray(), labels, onehot.shape[1])


def convert_geom_gcn(raw_dir, name, out_dir):
    """Convert ``out1_node_feature_label.txt`` / ``out1_graph_edges.txt`` (WebKB, Wikipedia, Actor)."""
    raw_dir = Path(raw_dir)
    rows = {}
    with open(raw_dir / "out1_node_feature_label.txt") as fh:
        next(fh)
        for line in fh:
            nid, feat, lab = line.rstrip("\n").split("\t")
            rows[int(nid)] = ([float(v) for v in feat.split(",")], int(lab))
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise ValueError("node ids must be 0..n-1")
    if name.lower() == "actor":
        # Actor stores sparse feature indices, not a dense vector
        m = 1 + max(int(v) for f, _ in rows.values() for v in f)
        x = np.zeros((n, m))
        for i, (f, _) in rows.items():
            x[i, [int(v) for v in f]] = 1.0
    else:
        x = np.array([rows[i][0] for i in range(n)])
    y = np.array([rows[i][1] for i in range(n)], dtype=np.int64)
    edges = np.loadtxt(raw_dir / "out1_graph_edges.txt", dtype=np.int64, skiprows=1, ndmin=2)
    graph = Graph.from_pairs(n, edges)
    return save_dataset(out_dir, name.lower(), graph, x, y)


# synthetic data -----------------------------------------------------------------

def make_csbm(n=300, num_classes=5, avg_degree=4.0, homophily=0.8, num_features=64,
              feature_signal=1.0, seed=0, name="csbm"):
    """Contextual stochastic block model with sparse non-negative features.

    ``homophily`` is the expected fraction of edges joining same-class nodes;
    low values give heterophilic graphs like the WebKB sets. Features are
    bag-of-words like: each class owns a block of ``num_features // num_classes``
    columns that fire more often for its members.
    """
    rng = np.random.default_rng(seed)
    # every class gets at least one member
    y = rng.permutation(np.concatenate([np.arange(num_classes), rng.integers(0, num_classes, n - num_classes)]))
    m_edges = int(round(avg_degree * n / 2))
    same = m_edges if num_classes == 1 else int(round(homophily * m_edges))
    pairs = []
    by_class = [np.flatnonzero(y == c) for c in range(num_classes)]
    if same and max(c.size for c in by_class) < 2:
        raise ValueError("no class has two members; lower num_classes or raise n")
    while len(pairs) < same:
        c = rng.integers(num_classes)
        if by_class[c].size < 2:
            continue
        a, b = rng.choice(by_class[c], 2, replace=False)
        pairs.append((a, b))
    while len(pairs) < m_edges:
        a, b = rng.integers(0, n, size=2)
        if y[a] != y[b]:
            pairs.append((a, b))
    graph = Graph.from_pairs(n, pairs)

    block = max(1, num_features // num_classes)
    base = 0.05
    prob = np.full((n, num_features), base)
    for c in range(num_classes):
        cols = slice(c * block, min((c + 1) * block, num_features))
        prob[y == c, cols] = min(0.95, base + 0.25 * feature_signal)
    x = (rng.random((n, num_features)) < prob).astype(np.float64)
    return Dataset(name, graph, x, y, num_classes)
