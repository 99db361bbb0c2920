"""Mutual k-nearest-neighbor ("tightest neighbor") machinery.

A point y is a tightest neighbor of x at level k when each lies in the
other's k-nearest-neighbor list (self-exclusive, ties ordered by id). The
symmetric graph of these pairs drives everything here: closures, their
minimal invariant fixpoints, the TNOF outlier score, the ktnc clustering
algorithm built from both, and the separability checkers used to validate
clustering results on threshold-divisible datasets.

Level 0 is the degenerate self-only case: every mutual set is empty and the
graph has no edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    AllScoresInfinite,
    KTooLarge,
    NonpositiveThreshold,
    NotAdd,
    OutlierPoint,
    SubsetNotContained,
    UnknownId,
)

ADD = "ADD"
CD = "CD"


def pairwise_distances(coords, block=None):
    """Dense Euclidean distance matrix, computed blockwise to bound memory."""
    coords = np.asarray(coords, dtype=np.float64)
    n = len(coords)
    if block is None:
        block = max(1, (1 << 22) // max(1, n))
    out = np.empty((n, n), dtype=np.float64)
    for s in range(0, n, block):
        e = min(n, s + block)
        diff = coords[s:e, None, :] - coords[None, :, :]
        out[s:e] = np.sqrt((diff * diff).sum(axis=-1))
    return out


def neighbor_ranks(ps, dists=None):
    """ranks[i, j] = position (1-based) of point j in i's (distance, id) order.

    Self gets rank n so it never falls inside any k-NN list with k < n.
    """
    n = len(ps)
    if dists is None:
        dists = pairwise_distances(ps.coords)
    ranks = np.empty((n, n), dtype=np.int64)
    keyed = dists.copy()
    np.fill_diagonal(keyed, np.inf)
    arange = np.arange(1, n + 1)
    for i in range(n):
        order = np.lexsort((ps.ids, keyed[i]))
        ranks[i, order] = arange
    return ranks


def _mutual_mask(ps, k, ranks):
    n = len(ps)
    if not 0 <= k < n:
        raise KTooLarge(f"k={k} needs 0 <= k < {n}")
    near = ranks <= k
    return near & near.T


def tightest_neighbors(ps, k, *, _ranks=None):
    """Per-id mutual k-NN sets. k = 0 gives every point an empty set (self only)."""
    ranks = neighbor_ranks(ps) if _ranks is None else _ranks
    mutual = _mutual_mask(ps, k, ranks)
    ids = ps.ids
    return {
        int(ids[i]): set(ids[np.flatnonzero(mutual[i])].tolist()) for i in range(len(ps))
    }


@dataclass
class TnGraph:
    k: int
    ids: tuple
    adj: dict
    weights: dict = field(repr=False)

    def neighbors(self, point_id):
        try:
            return self.adj[int(point_id)]
        except KeyError:
            raise UnknownId(f"no point with id {point_id}") from None

    def weight(self, i, j):
        return self.weights[(i, j) if i < j else (j, i)]

    def edges(self):
        return set(self.weights)


def tn_graph(ps, k, *, _ranks=None, _dists=None):
    """The symmetric tightest-neighbor graph at level k, edges weighted by distance."""
    dists = pairwise_distances(ps.coords) if _dists is None else _dists
    ranks = neighbor_ranks(ps, dists) if _ranks is None else _ranks
    mutual = _mutual_mask(ps, k, ranks)
    ids = ps.ids
    adj = {int(i): set() for i in ids}
    weights = {}
    for a, b in zip(*np.nonzero(np.triu(mutual, 1))):
        ia, ib = int(ids[a]), int(ids[b])
        lo, hi = (ia, ib) if ia < ib else (ib, ia)
        adj[ia].add(ib)
        adj[ib].add(ia)
        weights[(lo, hi)] = float(dists[a, b])
    return TnGraph(k=k, ids=tuple(int(i) for i in ids), adj=adj, weights=weights)


def closure(graph, members, s):
    """s-fold closure: repeatedly union the set with its members' mutual sets."""
    if s < 1:
        raise ValueError("s must be >= 1")
    current = set(int(m) for m in members)
    for m in current:
        if m not in graph.adj:
            raise UnknownId(f"no point with id {m}")
    for _ in range(s):
        grown = set(current)
        for m in current:
            grown |= graph.adj[m]
        if grown == current:
            break
        current = grown
    return current


def closure_fixpoint(graph, members):
    """Iterate the closure until it stops growing."""
    current = set(int(m) for m in members)
    for m in current:
        if m not in graph.adj:
            raise UnknownId(f"no point with id {m}")
    while True:
        grown = set(current)
        for m in current:
            grown |= graph.adj[m]
        if grown == current:
            return current
        current = grown


def mtncis(graph, point_id):
    """Minimal closure-invariant set containing the point: its connected component."""
    pid = int(point_id)
    if pid not in graph.adj:
        raise UnknownId(f"no point with id {pid}")
    return closure_fixpoint(graph, {pid})


@dataclass
class TnofReport:
    scores: dict
    theta: Optional[float] = None
    alpha: Optional[float] = None


def tnof_scores(ps, k, *, _ranks=None, _dists=None):
    """Outlier factor per point: sum of mutual-neighbor distances over the
    squared mutual-neighbor count; +inf when the mutual set is empty."""
    if k < 1:
        raise ValueError("k must be >= 1")
    dists = pairwise_distances(ps.coords) if _dists is None else _dists
    ranks = neighbor_ranks(ps, dists) if _ranks is None else _ranks
    mutual = _mutual_mask(ps, k, ranks)
    counts = mutual.sum(axis=1)
    sums = (dists * mutual).sum(axis=1)
    scores = {}
    for pos, pid in enumerate(ps.ids.tolist()):
        c = int(counts[pos])
        scores[pid] = float(sums[pos]) / (c * c) if c else np.inf
    return TnofReport(scores=scores)


def detect_outliers(report, alpha=1.0):
    """Threshold the report at population mean + alpha * population std of the
    finite scores; infinite scores are outliers unconditionally."""
    finite = np.array([s for s in report.scores.values() if np.isfinite(s)])
    if len(finite) == 0:
        raise AllScoresInfinite("every point is isolated")
    theta = float(finite.mean() + alpha * finite.std())
    report.theta = theta
    report.alpha = alpha
    return {i for i, s in report.scores.items() if s > theta or not np.isfinite(s)}


@dataclass
class Clustering:
    clusters: list
    outliers: set

    @property
    def K(self):
        return len(self.clusters)

    def label_of(self, point_id):
        """1-based cluster label, or 0 for outliers/unknown points."""
        for idx, members in enumerate(self.clusters, start=1):
            if point_id in members:
                return idx
        return 0


def _components(adj, members):
    """Connected components of the induced subgraph, ordered by smallest id."""
    seen = set()
    comps = []
    for start in sorted(members):
        if start in seen:
            continue
        comp = set()
        frontier = [start]
        while frontier:
            x = frontier.pop()
            if x in comp:
                continue
            comp.add(x)
            frontier.extend(n for n in adj[x] if n in members and n not in comp)
        seen |= comp
        comps.append(comp)
    return comps


def cluster_adjacency(adj, weight_of, alpha=1.0):
    """The ktnc pipeline over a prebuilt symmetric adjacency: score every node,
    drop outliers (edges incident to them included), emit the remaining
    connected components ordered by smallest member id."""
    scores = {}
    for i, nbrs in adj.items():
        if nbrs:
            scores[i] = sum(weight_of(i, j) for j in nbrs) / (len(nbrs) ** 2)
        else:
            scores[i] = np.inf
    report = TnofReport(scores=scores)
    try:
        outliers = detect_outliers(report, alpha)
    except AllScoresInfinite:
        return Clustering(clusters=[], outliers=set(adj))
    keep = set(adj) - outliers
    return Clustering(clusters=_components(adj, keep), outliers=outliers)


def ktnc(ps, k, alpha=1.0, *, _ranks=None, _dists=None):
    """Cluster a point set: TNOF outliers removed first, then each remaining
    connected component of the level-k mutual graph becomes one cluster."""
    if len(ps) < 1:
        raise ValueError("point set is empty")
    if not 1 <= k < len(ps):
        raise KTooLarge(f"k={k} needs 1 <= k < {len(ps)}")
    graph = tn_graph(ps, k, _ranks=_ranks, _dists=_dists)
    return cluster_adjacency(graph.adj, graph.weight, alpha)


@dataclass
class SeparabilityReport:
    threshold_d: float
    kind: Optional[str]
    components: list


def separability_class(ps, d):
    """Classify the threshold graph at distance d: ADD when it splits into
    >= 2 components that are all cliques under d, CD when it merely splits,
    None when it stays connected."""
    d = float(d)
    if not d > 0:
        raise NonpositiveThreshold(f"threshold must be positive, got {d}")
    dists = pairwise_distances(ps.coords)
    within = dists <= d
    np.fill_diagonal(within, False)
    ids = ps.ids
    adj = {
        int(ids[i]): set(ids[np.flatnonzero(within[i])].tolist()) for i in range(len(ps))
    }
    comps = _components(adj, set(adj))
    if len(comps) < 2:
        return SeparabilityReport(threshold_d=d, kind=None, components=comps)
    pos = {int(i): p for p, i in enumerate(ids)}
    for comp in comps:
        rows = [pos[m] for m in comp]
        if len(rows) > 1 and dists[np.ix_(rows, rows)].max() > d:
            return SeparabilityReport(threshold_d=d, kind=CD, components=comps)
    return SeparabilityReport(threshold_d=d, kind=ADD, components=comps)


def verify_theorem2(ps, report):
    """On an ADD report, check that within each component of size m every
    member's mutual set at level m-1 is exactly the rest of the component."""
    if report.kind != ADD:
        raise NotAdd("theorem applies to ADD reports only")
    ranks = neighbor_ranks(ps)
    by_size = {}
    for comp in report.components:
        by_size.setdefault(len(comp), []).append(comp)
    for size, comps in by_size.items():
        tn = tightest_neighbors(ps, size - 1, _ranks=ranks)
        for comp in comps:
            for x in comp:
                if tn[x] != comp - {x}:
                    return False
    return True


def is_prototype_point(ps, clustering, point_id):
    """True when the point is strictly closer to all of its own cluster than
    to any point of any other cluster (singleton own-distance counts as 0)."""
    pid = int(point_id)
    own = None
    for members in clustering.clusters:
        if pid in members:
            own = members
            break
    if own is None:
        if pid in clustering.outliers:
            raise OutlierPoint(f"point {pid} was classified as an outlier")
        raise UnknownId(f"point {pid} is not in the clustering")
    x = ps.coords_of(pid)

    def dist_to(member):
        return float(np.sqrt(((ps.coords_of(member) - x) ** 2).sum()))

    own_max = max((dist_to(m) for m in own if m != pid), default=0.0)
    other_min = np.inf
    for members in clustering.clusters:
        if members is own:
            continue
        for m in members:
            other_min = min(other_min, dist_to(m))
    return own_max < other_min


def verify_skeleton_set(ps, k, subsets, clustering):
    """True when the closure of each subset regenerates its full cluster."""
    if len(subsets) != clustering.K:
        raise ValueError(
            f"{len(subsets)} subsets for {clustering.K} clusters"
        )
    for subset, members in zip(subsets, clustering.clusters):
        if not set(subset) <= set(members):
            raise SubsetNotContained(f"subset {sorted(subset)} escapes its cluster")
    graph = tn_graph(ps, k)
    return all(
        closure_fixpoint(graph, subset) == set(members)
        for subset, members in zip(subsets, clustering.clusters)
    )


def smallest_recovering_k(ps, components, alpha=6.0, k_max=None):
    """Sweep k upward and return the smallest level at which ktnc reproduces
    the given partition exactly with no outliers, or None if no level does."""
    target = {frozenset(c) for c in components}
    dists = pairwise_distances(ps.coords)
    ranks = neighbor_ranks(ps, dists)
    limit = len(ps) - 1 if k_max is None else min(k_max, len(ps) - 1)
    for k in range(1, limit + 1):
        result = ktnc(ps, k, alpha, _ranks=ranks, _dists=dists)
        if not result.outliers and {frozenset(c) for c in result.clusters} == target:
            return k
    return None
