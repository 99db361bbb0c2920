"""Independent reference implementations the tests check against.

Everything here is deliberately written the dumb way (full scans, explicit
pair loops, textbook formulas) and shares no code with the package.
"""

import math
from collections import Counter

import numpy as np


def scan_knn(coords, ids, q, k, exclude_id=None):
    """k nearest by full scan, (distance, id) order, optional self-exclusion."""
    d = np.sqrt(((coords - q) ** 2).sum(axis=1))
    order = np.lexsort((ids, d))
    out = [
        (int(ids[i]), float(d[i]))
        for i in order
        if exclude_id is None or int(ids[i]) != exclude_id
    ]
    return out[:k]


def scan_range(coords, ids, center, r):
    d = np.sqrt(((coords - center) ** 2).sum(axis=1))
    return {int(i) for i in ids[d <= r]}


def mutual_knn_sets(coords, ids, k):
    """Tightest-neighbor sets by the definition: j in knn(i) and i in knn(j)."""
    knn = {
        int(ids[i]): {pid for pid, _ in scan_knn(coords, ids, coords[i], k, int(ids[i]))}
        for i in range(len(ids))
    }
    return {
        i: {j for j in knn[i] if i in knn[j]} for i in knn
    }


def bfs_component(adj, start):
    seen = {start}
    frontier = [start]
    while frontier:
        x = frontier.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def all_components(adj):
    comps = []
    seen = set()
    for x in sorted(adj):
        if x not in seen:
            comp = bfs_component(adj, x)
            seen |= comp
            comps.append(comp)
    return comps


def pair_counting_ari(truth, pred):
    """Adjusted Rand from explicit pair agreement counts."""
    n = len(truth)
    same_both = same_t = same_p = 0
    for i in range(n):
        for j in range(i + 1, n):
            st = truth[i] == truth[j]
            sp = pred[i] == pred[j]
            same_t += st
            same_p += sp
            same_both += st and sp
    total = n * (n - 1) // 2
    if total == 0:
        return 1.0
    expected = same_t * same_p / total
    maximum = (same_t + same_p) / 2
    if maximum == expected:
        return 1.0
    return (same_both - expected) / (maximum - expected)


def pair_counting_ari_fast(truth, pred):
    """Same pair-agreement ARI, with the n^2 pair comparisons vectorized."""
    t = np.asarray(truth).reshape(-1, 1)
    p = np.asarray(pred).reshape(-1, 1)
    upper = np.triu_indices(len(truth), k=1)
    same_t = (t == t.T)[upper]
    same_p = (p == p.T)[upper]
    same_both = int((same_t & same_p).sum())
    same_t = int(same_t.sum())
    same_p = int(same_p.sum())
    total = len(truth) * (len(truth) - 1) // 2
    if total == 0:
        return 1.0
    expected = same_t * same_p / total
    maximum = (same_t + same_p) / 2
    if maximum == expected:
        return 1.0
    return (same_both - expected) / (maximum - expected)


def entropy_nmi(truth, pred):
    """NMI from the identity MI = H(T) + H(P) - H(T, P), all in nats."""

    def entropy(labels):
        n = len(labels)
        return -sum(c / n * math.log(c / n) for c in Counter(labels).values())

    h_t = entropy(truth)
    h_p = entropy(pred)
    if h_t == 0.0 and h_p == 0.0:
        return 1.0
    if h_t == 0.0 or h_p == 0.0:
        return 0.0
    h_joint = entropy(list(zip(truth, pred)))
    return (h_t + h_p - h_joint) / math.sqrt(h_t * h_p)


def count_purity(truth, pred):
    """Purity by direct majority count per predicted cluster."""
    groups = {}
    for t, p in zip(truth, pred):
        groups.setdefault(p, []).append(t)
    return sum(Counter(g).most_common(1)[0][1] for g in groups.values()) / len(truth)
