"""Shared-nearest-neighbor counts and the adaptive micro-cluster radius.

The radius rule: look at the seed's tk nearest neighbors, keep those sharing
at least mk of the seed's neighbor list, and take the distance to the
farthest keeper, capped at r_max. A seed with no keeper (or only co-located
keepers) yields no radius and cannot found a micro-cluster this step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import KTooLarge, SamePoint
from .spatial_index import Neighbor


@dataclass(frozen=True)
class SnnParams:
    tk: int
    mk: int
    r_max: float

    def __post_init__(self):
        if self.tk < 1:
            raise ValueError("tk must be >= 1")
        if not 0 <= self.mk <= self.tk:
            raise ValueError("mk must satisfy 0 <= mk <= tk")
        if not (np.isfinite(self.r_max) and self.r_max > 0):
            raise ValueError("r_max must be finite and positive")


def brute_knn(ps):
    """Exact (distance, id)-ordered neighbor lookup over the whole set."""

    def knn(point_id, k):
        pos = ps.position(point_id)
        d = np.sqrt(((ps.coords - ps.coords[pos]) ** 2).sum(axis=1))
        d[pos] = np.inf
        order = np.lexsort((ps.ids, d))[: min(k, len(ps) - 1)]
        return [Neighbor(int(ps.ids[o]), float(d[o])) for o in order]

    return knn


def snn_count(ps, i, j, tk, knn=None):
    """Size of the intersection of the two points' tk-NN lists (self-exclusive)."""
    i, j = int(i), int(j)
    if i == j:
        raise SamePoint(f"snn_count needs two distinct points, got {i} twice")
    if tk >= len(ps):
        raise KTooLarge(f"tk={tk} needs tk < {len(ps)}")
    knn = knn or brute_knn(ps)
    ps.position(i)
    ps.position(j)
    set_i = {n.id for n in knn(i, tk)}
    set_j = {n.id for n in knn(j, tk)}
    return len(set_i & set_j)


def adaptive_radius(ps, seed, params, knn=None):
    """Radius for a candidate micro-cluster around the seed, or None.

    knn may be any (point_id, k) -> [Neighbor] lookup; the default is the
    exact brute-force one. The stream engine passes an index-backed, cached
    lookup here, which for the LSH backend makes the gate approximate.
    """
    seed = int(seed)
    ps.position(seed)
    knn = knn or brute_knn(ps)
    neighbors = knn(seed, params.tk)
    if not neighbors:
        return None
    seed_set = {n.id for n in neighbors}
    best = 0.0
    for nb in neighbors:
        shared = len(seed_set & {n.id for n in knn(nb.id, params.tk)})
        if shared >= params.mk and nb.dist > best:
            best = nb.dist
    if best <= 0.0:
        return None
    return min(params.r_max, best)
