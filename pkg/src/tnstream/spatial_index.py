"""Exact (KD-tree, Ball-tree) and approximate (signed-random-projection LSH)
neighbor search over a fixed PointSet.

All backends answer the same three queries:

* ``knn_query(index, q, k)``   -> list of Neighbor(id, dist), ascending (dist, id)
* ``range_query(index, c, r)`` -> set of ids with true distance <= r
* indexes are immutable after build; rebuilding with the same inputs (and, for
  LSH, the same seed) is bit-identical.

Exact backends agree with a brute-force scan including tie order: neighbor
lists are ordered by (distance, id) and the query point itself is excluded
when the query is given as an id. The LSH backend only ever reports points
that collide with the query in at least one hash table, and every reported
point is verified against its true distance, so range results are a sound
subset of the exact answer.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DimensionMismatch, EmptyPointSet
from .points import PointSet

KD_TREE = "kd_tree"
BALL_TREE = "ball_tree"
LSH = "lsh"

DEFAULT_LEAF_SIZE = 32


class Neighbor(NamedTuple):
    id: int
    dist: float


@dataclass(frozen=True)
class LshParams:
    num_hyperplanes: int
    num_tables: int
    seed: int

    def __post_init__(self):
        if self.num_hyperplanes < 1:
            raise ValueError("num_hyperplanes must be >= 1")
        if self.num_tables < 1:
            raise ValueError("num_tables must be >= 1")


@dataclass(frozen=True)
class IndexBackend:
    kind: str
    lsh_params: Optional[LshParams] = None

    def __post_init__(self):
        if self.kind not in (KD_TREE, BALL_TREE, LSH):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if (self.kind == LSH) != (self.lsh_params is not None):
            raise ValueError("lsh_params must be given exactly when kind is 'lsh'")

    @classmethod
    def kd_tree(cls):
        return cls(KD_TREE)

    @classmethod
    def ball_tree(cls):
        return cls(BALL_TREE)

    @classmethod
    def lsh(cls, num_hyperplanes, num_tables=1, seed=0):
        return cls(LSH, LshParams(num_hyperplanes, num_tables, seed))


def srp_signature(x, hyperplanes):
    """Signed-random-projection bits for one point: bit j is 1 iff w_j . x >= 0."""
    x = np.asarray(x, dtype=np.float64)
    hyperplanes = np.asarray(hyperplanes, dtype=np.float64)
    if hyperplanes.ndim != 2 or x.ndim != 1 or hyperplanes.shape[1] != x.shape[0]:
        raise DimensionMismatch(
            f"hyperplanes {hyperplanes.shape} incompatible with point of dim {x.shape}"
        )
    return (hyperplanes @ x >= 0.0).astype(np.uint8)


def _as_query_coords(index, q):
    """Resolve a query given as id-or-coords; returns (coords, exclude_id)."""
    if np.isscalar(q) and not isinstance(q, (float, np.floating)):
        pid = int(q)
        return index.ps.coords_of(pid), pid
    coords = np.asarray(q, dtype=np.float64).reshape(-1)
    if coords.shape[0] != index.ps.dim:
        raise DimensionMismatch(f"query has {coords.shape[0]} coords, index dim is {index.ps.dim}")
    return coords, None


class _Node:
    __slots__ = ("axis", "value", "center", "radius", "left", "right", "lo", "hi")

    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi
        self.axis = -1
        self.value = 0.0
        self.center = None
        self.radius = 0.0
        self.left = None
        self.right = None


class _TreeIndex:
    """Shared machinery for the two exact tree backends.

    Points are laid out in a permutation array so every subtree owns a
    contiguous slice [lo, hi). Splits cut the widest-spread axis at the
    median, ordering ties by point id so builds are deterministic.
    """

    def __init__(self, ps, leaf_size):
        self.ps = ps
        self.leaf_size = max(1, int(leaf_size))
        self._perm = np.arange(len(ps))
        self._root = self._build(0, len(ps))

    def _build(self, lo, hi):
        node = _Node(lo, hi)
        seg = self._perm[lo:hi]
        pts = self.ps.coords[seg]
        self._annotate(node, pts)
        if hi - lo <= self.leaf_size:
            return node
        spreads = pts.max(axis=0) - pts.min(axis=0)
        axis = int(np.argmax(spreads))
        if spreads[axis] == 0.0:
            return node  # all points coincide; splitting cannot help
        order = np.lexsort((self.ps.ids[seg], pts[:, axis]))
        self._perm[lo:hi] = seg[order]
        mid = lo + (hi - lo) // 2
        node.axis = axis
        node.value = float(self.ps.coords[self._perm[mid], axis])
        node.left = self._build(lo, mid)
        node.right = self._build(mid, hi)
        return node

    def _annotate(self, node, pts):
        pass

    def _leaf_ids_dists(self, node, q):
        seg = self._perm[node.lo:node.hi]
        d = np.sqrt(((self.ps.coords[seg] - q) ** 2).sum(axis=1))
        return self.ps.ids[seg], d

    def knn(self, q, k, exclude_id=None):
        if k < 1:
            raise ValueError("k must be >= 1")
        heap = []  # entries (-dist, -id): heap[0] is the current worst keeper
        self._knn_visit(self._root, q, k, exclude_id, heap)
        return [Neighbor(int(-i), float(-d)) for d, i in sorted(heap, reverse=True)]

    def _knn_scan_leaf(self, node, q, k, exclude_id, heap):
        ids, dists = self._leaf_ids_dists(node, q)
        for pid, dist in zip(ids.tolist(), dists.tolist()):
            if pid == exclude_id:
                continue
            if len(heap) < k:
                heapq.heappush(heap, (-dist, -pid))
            elif (dist, pid) < (-heap[0][0], -heap[0][1]):
                heapq.heapreplace(heap, (-dist, -pid))

    def _worst(self, heap, k):
        return -heap[0][0] if len(heap) == k else np.inf

    def range(self, center, r):
        out = []
        self._range_visit(self._root, center, r, out)
        return set(out)

    def _range_scan_leaf(self, node, q, r, out):
        ids, dists = self._leaf_ids_dists(node, q)
        out.extend(ids[dists <= r].tolist())


class KdTreeIndex(_TreeIndex):
    kind = KD_TREE

    def _knn_visit(self, node, q, k, exclude_id, heap):
        if node.axis < 0:
            self._knn_scan_leaf(node, q, k, exclude_id, heap)
            return
        diff = q[node.axis] - node.value
        near, far = (node.left, node.right) if diff <= 0 else (node.right, node.left)
        self._knn_visit(near, q, k, exclude_id, heap)
        # the far side can still hold an id-tiebreak winner at exactly worst dist
        if abs(diff) <= self._worst(heap, k):
            self._knn_visit(far, q, k, exclude_id, heap)

    def _range_visit(self, node, q, r, out):
        if node.axis < 0:
            self._range_scan_leaf(node, q, r, out)
            return
        diff = q[node.axis] - node.value
        near, far = (node.left, node.right) if diff <= 0 else (node.right, node.left)
        self._range_visit(near, q, r, out)
        if abs(diff) <= r:
            self._range_visit(far, q, r, out)


class BallTreeIndex(_TreeIndex):
    kind = BALL_TREE

    def _annotate(self, node, pts):
        node.center = pts.mean(axis=0)
        node.radius = float(np.sqrt(((pts - node.center) ** 2).sum(axis=1)).max())

    def _bound(self, node, q):
        return max(0.0, float(np.sqrt(((q - node.center) ** 2).sum())) - node.radius)

    def knn(self, q, k, exclude_id=None):
        if k < 1:
            raise ValueError("k must be >= 1")
        heap = []
        self._knn_visit(self._root, q, k, exclude_id, heap, self._bound(self._root, q))
        return [Neighbor(int(-i), float(-d)) for d, i in sorted(heap, reverse=True)]

    def _knn_visit(self, node, q, k, exclude_id, heap, bound):
        if bound > self._worst(heap, k):
            return
        if node.axis < 0:
            self._knn_scan_leaf(node, q, k, exclude_id, heap)
            return
        lb = self._bound(node.left, q)
        rb = self._bound(node.right, q)
        order = ((lb, node.left), (rb, node.right)) if lb <= rb else ((rb, node.right), (lb, node.left))
        for child_bound, child in order:
            if child_bound <= self._worst(heap, k):
                self._knn_visit(child, q, k, exclude_id, heap, child_bound)

    def _range_visit(self, node, q, r, out):
        dist = float(np.sqrt(((q - node.center) ** 2).sum()))
        if dist - node.radius > r:
            return
        if dist + node.radius < r:  # strict: boundary members get the exact test
            out.extend(self.ps.ids[self._perm[node.lo:node.hi]].tolist())
            return
        if node.axis < 0:
            self._range_scan_leaf(node, q, r, out)
            return
        self._range_visit(node.left, q, r, out)
        self._range_visit(node.right, q, r, out)


class LshIndex:
    """Multi-table signed-random-projection index.

    Each table hashes with its own seeded standard-normal hyperplanes; a
    candidate is any point sharing a bucket with the query in at least one
    table. Candidates are re-ranked (knn) or filtered (range) by true
    Euclidean distance, so no unverified point is ever reported.
    """

    kind = LSH

    def __init__(self, ps, params):
        self.ps = ps
        self.params = params
        rng = np.random.default_rng(params.seed)
        self.hyperplanes = rng.standard_normal(
            (params.num_tables, params.num_hyperplanes, ps.dim)
        )
        self._tables = []
        for t in range(params.num_tables):
            keys = self._keys(ps.coords, t)
            buckets = {}
            for pos, key in enumerate(keys):
                buckets.setdefault(key, []).append(pos)
            self._tables.append({k: np.asarray(v) for k, v in buckets.items()})

    def _keys(self, coords, table):
        bits = (coords @ self.hyperplanes[table].T) >= 0.0
        packed = np.packbits(bits, axis=1)
        return [row.tobytes() for row in packed]

    def _candidates(self, q, exclude_id):
        pos_lists = []
        for t in range(self.params.num_tables):
            key = self._keys(q.reshape(1, -1), t)[0]
            hit = self._tables[t].get(key)
            if hit is not None:
                pos_lists.append(hit)
        if not pos_lists:
            return np.empty(0, dtype=np.int64)
        pos = np.unique(np.concatenate(pos_lists))
        if exclude_id is not None:
            pos = pos[self.ps.ids[pos] != exclude_id]
        return pos

    def knn(self, q, k, exclude_id=None):
        if k < 1:
            raise ValueError("k must be >= 1")
        pos = self._candidates(q, exclude_id)
        if len(pos) == 0:
            return []
        dists = np.sqrt(((self.ps.coords[pos] - q) ** 2).sum(axis=1))
        ids = self.ps.ids[pos]
        order = np.lexsort((ids, dists))[:k]
        return [Neighbor(int(ids[j]), float(dists[j])) for j in order]

    def range(self, center, r):
        pos = self._candidates(center, None)
        if len(pos) == 0:
            return set()
        dists = np.sqrt(((self.ps.coords[pos] - center) ** 2).sum(axis=1))
        return set(self.ps.ids[pos[dists <= r]].tolist())


def build_index(ps, backend, leaf_size=DEFAULT_LEAF_SIZE):
    """Build an immutable index over a PointSet for the requested backend."""
    if not isinstance(ps, PointSet):
        raise TypeError("build_index takes a PointSet")
    if len(ps) == 0:  # PointSet already forbids this; kept for belt and braces
        raise EmptyPointSet("cannot index an empty point set")
    if backend.kind == KD_TREE:
        return KdTreeIndex(ps, leaf_size)
    if backend.kind == BALL_TREE:
        return BallTreeIndex(ps, leaf_size)
    return LshIndex(ps, backend.lsh_params)


def knn_query(index, q, k):
    """k nearest neighbors of q (an id in the set, or raw coordinates).

    Exact backends return the true k nearest with (distance, id) tie order;
    fewer entries come back when the set is too small. The LSH backend
    returns at most k verified bucket candidates.
    """
    coords, exclude = _as_query_coords(index, q)
    return index.knn(coords, int(k), exclude)


def range_query(index, center, r):
    """All ids within true distance r of center (inclusive); LSH -> subset."""
    r = float(r)
    if not np.isfinite(r) or r < 0:
        raise ValueError("range radius must be finite and >= 0")
    coords = np.asarray(center, dtype=np.float64).reshape(-1)
    if coords.shape[0] != index.ps.dim:
        raise DimensionMismatch(
            f"center has {coords.shape[0]} coords, index dim is {index.ps.dim}"
        )
    return index.range(coords, r)
