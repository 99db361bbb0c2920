"""External clustering-quality metrics: purity, NMI, ARI.

All three are computed from a shared contingency table. Predicted label 0 is
the outlier sentinel; by default it participates as one more predicted
cluster (over-flagging costs score), or it can be excluded entirely with
``exclude_outliers=True``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyLabels, LengthMismatch


@dataclass
class ContingencyTable:
    counts: np.ndarray  # rows: predicted clusters, cols: true classes
    pred_values: list
    true_values: list

    @property
    def n(self):
        return int(self.counts.sum())

    @property
    def pred_sizes(self):
        return self.counts.sum(axis=1)

    @property
    def true_sizes(self):
        return self.counts.sum(axis=0)


def _filter_outliers(truth, pred):
    keep = [p != 0 for p in pred]
    return [t for t, k in zip(truth, keep) if k], [p for p, k in zip(pred, keep) if k]


def contingency(truth, pred, exclude_outliers=False):
    truth = list(truth)
    pred = list(pred)
    if len(truth) != len(pred):
        raise LengthMismatch(f"{len(truth)} true labels vs {len(pred)} predicted")
    if exclude_outliers:
        truth, pred = _filter_outliers(truth, pred)
    if not truth:
        raise EmptyLabels("no labels to score")
    true_values = sorted(set(truth))
    pred_values = sorted(set(pred))
    t_index = {v: i for i, v in enumerate(true_values)}
    p_index = {v: i for i, v in enumerate(pred_values)}
    counts = np.zeros((len(pred_values), len(true_values)), dtype=np.int64)
    for t, p in zip(truth, pred):
        counts[p_index[p], t_index[t]] += 1
    return ContingencyTable(counts=counts, pred_values=pred_values, true_values=true_values)


def purity(table):
    return float(table.counts.max(axis=1).sum()) / table.n


def nmi(table):
    """Mutual information over the geometric mean of the marginal entropies
    (natural log, 0 log 0 = 0). Degenerate marginals: 1 when the labelings
    are structurally identical, 0 otherwise."""
    n = table.n
    a = table.pred_sizes / n
    b = table.true_sizes / n
    h_pred = float(-(a[a > 0] * np.log(a[a > 0])).sum())
    h_true = float(-(b[b > 0] * np.log(b[b > 0])).sum())
    if h_pred == 0.0 and h_true == 0.0:
        return 1.0
    if h_pred == 0.0 or h_true == 0.0:
        return 0.0
    p = table.counts / n
    mask = p > 0
    outer = np.outer(a, b)
    mi = float((p[mask] * np.log(p[mask] / outer[mask])).sum())
    return mi / float(np.sqrt(h_pred * h_true))


def _pairs(x):
    return int(x) * (int(x) - 1) // 2


def ari(truth, pred, exclude_outliers=False):
    """Pair-counting adjusted Rand index via the contingency table; 1.0 for
    identical partitions including the degenerate single-cluster case.

    The ratio is formed from exact integer numerator and denominator, so
    rational results (1, -1/2, ...) come out exact in floating point.
    """
    table = contingency(truth, pred, exclude_outliers=exclude_outliers)
    n = table.n
    sum_ij = sum(_pairs(v) for v in table.counts.ravel().tolist())
    sum_a = sum(_pairs(v) for v in table.pred_sizes.tolist())
    sum_b = sum(_pairs(v) for v in table.true_sizes.tolist())
    total = _pairs(n)
    if total == 0:
        return 1.0
    numerator = 2 * (sum_ij * total - sum_a * sum_b)
    denominator = (sum_a + sum_b) * total - 2 * sum_a * sum_b
    if denominator == 0:
        return 1.0
    return numerator / denominator


def scores(truth, pred, exclude_outliers=False):
    """purity/ari/nmi in one dict; the shape every reporting path uses."""
    table = contingency(truth, pred, exclude_outliers=exclude_outliers)
    return {
        "purity": purity(table),
        "ari": ari(truth, pred, exclude_outliers=exclude_outliers),
        "nmi": nmi(table),
    }
