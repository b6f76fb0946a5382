import numpy as np


def _check(scores, labels):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel().astype(bool)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    if labels.all() or not labels.any():
        raise ValueError("AUC/AP need both positive and negative labels")
    return scores, labels


def roc_auc(scores, labels):
    """P(random positive outscores random negative), ties counted as 1/2."""
    scores, labels = _check(scores, labels)
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    ranks = np.empty(s.size)
    # average rank over tie blocks
    starts = np.r_[0, np.flatnonzero(np.diff(s)) + 1]
    ends = np.r_[starts[1:], s.size]
    for a, b in zip(starts, ends):
        ranks[a:b] = 0.5 * (a + b - 1) + 1.0
    r = np.empty_like(ranks)
    r[order] = ranks
    n_pos = labels.sum()
    n_neg = labels.size - n_pos
    return float((r[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def average_precision(scores, labels):
    """Step-wise area under precision-recall: sum over thresholds of (R_t - R_{t-1}) P_t."""
    scores, labels = _check(scores, labels)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order].astype(np.float64)
    tp = np.cumsum(y)
    fp = np.cumsum(1.0 - y)
    # one point per distinct threshold: the last index of each tie block
    last = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tp, fp = tp[last], fp[last]
    precision = tp / (tp + fp)
    recall = tp / tp[-1]
    prev = np.r_[0.0, recall[:-1]]
    return float(np.sum((recall - prev) * precision))


def eval_auc_ap(scores, labels):
    return roc_auc(scores, labels), average_precision(scores, labels)


def accuracy(pred, labels):
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    return float((pred == labels).mean()) if labels.size else float("nan")
