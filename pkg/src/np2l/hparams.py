"""Published per-dataset defaults (learning rate, weight decay, partial-label count)."""
import math

LR_GRID = (0.001, 0.01, 0.05, 0.1, 0.5)
WD_GRID = (0.0, 1e-4, 1e-3, 1e-2, 5e-2, 1e-1, 5e-1, 1.0)

LINK_EPOCHS = 400
NODE_EPOCHS = 200

_LINK_DATASETS = ("photo", "computers", "cs", "cora", "citeseer", "chameleon", "squirrel")


def _rows(values):
    return dict(zip(_LINK_DATASETS, values))


# (head, model) -> dataset -> (o, lr, wd); o is None for unsigned models
LINK = {
    ("gae", "gcn"): _rows([(None, .01, 5e-1), (None, .01, 5e-1), (None, .01, 1e-4), (None, .01, 5e-1),
                          (None, .01, 1e-3), (None, .01, 5e-1), (None, .01, 5e-1)]),
    ("gae", "sgcn"): _rows([(4, .01, 5e-1), (5, .01, 5e-1), (7, .01, 1e-3), (3, .01, 5e-1),
                           (2, .01, 1e-3), (2, .01, 5e-1), (2, .01, 5e-1)]),
    ("vgae", "gcn"): _rows([(None, .01, 1e-4), (None, .01, 5e-1), (None, .01, 1e-4), (None, .01, 5e-1),
                           (None, .01, 1e-4), (None, .01, 5e-1), (None, .01, 5e-1)]),
    ("vgae", "sgcn"): _rows([(4, .01, 1e-4), (5, .01, 5e-1), (7, .01, 5e-1), (3, .01, 5e-1),
                            (2, .01, 1e-4), (2, .01, 5e-1), (2, .01, 5e-1)]),
    ("gae", "gncn"): _rows([(None, .1, 1e-3), (None, .1, 1e-3), (None, .1, 1e-2), (None, .1, 1e-3),
                           (None, .1, 1e-3), (None, .1, 5e-1), (None, .1, 1e-3)]),
    ("gae", "sgncn"): _rows([(4, .1, 1e-3), (5, .1, 1e-3), (7, .1, 1e-2), (3, .1, 5e-1),
                            (2, .1, 1e-3), (2, .1, 5e-1), (2, .1, 5e-1)]),
    ("vgae", "gncn"): _rows([(None, .1, 1e-3), (None, .1, 1e-4), (None, .1, 1e-4), (None, .1, 5e-1),
                            (None, .1, 1e-3), (None, .1, 1e-4), (None, .1, 1e-4)]),
    ("vgae", "sgncn"): {"photo": (4, .1, 1e-3), "computers": (5, .1, 1e-4), "cora": (3, .1, 1e-4),
                        "citeseer": (2, .1, 1e-3), "chameleon": (2, .1, 1e-4), "squirrel": (2, .1, 5e-1)},
}

# model -> dataset -> split -> (o, lr, wd)
NODE = {
    "gcn": {
        "photo": {1: (None, .01, 0.0), 2: (None, .001, 0.0), 3: (None, .001, 0.0)},
        "computers": {1: (None, .001, 0.0), 2: (None, .001, 0.0), 3: (None, .001, 0.0)},
        "cs": {1: (None, .001, 1e-3), 2: (None, .01, 1e-3), 3: (None, .01, 1e-3)},
        "actor": {1: (None, .001, 1e-2), 2: (None, .001, 1e-2), 3: (None, .01, 1e-2)},
        "chameleon": {1: (None, .05, 0.0), 2: (None, .001, 5e-2), 3: (None, .05, 0.0)},
        "squirrel": {1: (None, .01, 1e-3), 2: (None, .001, 1e-3), 3: (None, .001, 1e-3)},
        "cornell": {1: (None, .01, 5e-2), 2: (None, .05, 5e-2), 3: (None, .01, 1e-2)},
        "texas": {1: (None, .05, 5e-2), 2: (None, .01, 5e-2), 3: (None, .05, 5e-2)},
        "wisconsin": {1: (None, .05, 5e-2), 2: (None, .01, 5e-2), 3: (None, .001, 5e-2)},
    },
    "sgcn": {
        "photo": {1: (4, .001, 1e-2), 2: (4, .001, 1e-2), 3: (4, .001, 1e-2)},
        "computers": {1: (5, .001, 1e-2), 2: (5, .001, 1e-2), 3: (5, .001, 1e-2)},
        "cs": {1: (6, .001, 1e-3), 2: (6, .001, 1e-3), 3: (6, .01, 1e-3)},
        "actor": {1: (2, .01, 1e-2), 2: (2, .001, 1e-3), 3: (2, .1, 1e-2)},
        "chameleon": {1: (2, .001, 0.0), 2: (2, .001, 0.0), 3: (2, .001, 0.0)},
        "squirrel": {1: (2, .01, 1e-3), 2: (2, .01, 1e-3), 3: (2, .01, 1e-3)},
        "cornell": {1: (2, .05, 5e-2), 2: (2, .1, 1e-2), 3: (2, .01, 1e-2)},
        "texas": {1: (2, .01, 1e-2), 2: (2, .01, 1e-2), 3: (2, .01, 1e-3)},
        "wisconsin": {1: (2, .01, 1e-3), 2: (2, .01, 5e-2), 3: (2, .01, 5e-2)},
    },
}

FALLBACK_LR = 0.01
FALLBACK_WD = 0.0


def default_o(k):
    return max(1, math.ceil(k / 3))


def lookup(task, dataset, model, head="gae", split=3, k=None):
    """Return ``(o, lr, wd)`` defaults; unknown combinations fall back to generic values."""
    name = str(dataset).lower()
    if task == "link":
        row = LINK.get((head, model), {}).get(name)
    else:
        base = "sgcn" if model in ("sgcn", "sgncn") else "gcn"
        row = NODE.get(base, {}).get(name, {}).get(int(split))
    signed = model in ("sgcn", "sgncn")
    if row is None:
        o = default_o(k) if (signed and k) else None
        return o, FALLBACK_LR, FALLBACK_WD
    o, lr, wd = row
    if signed and o is None and k:
        o = default_o(k)
    return o, lr, wd
