"""The fully online clustering loop.

Every arrival runs the same pipeline over the sliding window:

    evict_expired -> define_mcs -> add_to_mcs -> define_macros
    -> add_mc_to_macro -> update_mcs -> update_macros
    -> kill_mcs -> kill_macros

Micro-clusters (MCs) are balls with an adaptive, creation-time-fixed radius
holding at least ``min_pts`` live points; macro-clusters group at least
``n_micro`` MCs whose centers are mutually tight AND within summed radii of
each other. MC-level neighbor search uses the configured backend (exact or
LSH); the macro stage always works on exact pairwise distances between the
few MC centers, so the approximate backend never touches the mutual-graph
step.

Ties anywhere resolve toward the smaller id, and ids are never reused, so a
replayed stream reproduces byte-identical snapshots.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DimensionMismatch, OutOfOrderArrival
from .points import PointSet
from .snn_radius import SnnParams, adaptive_radius
from .spatial_index import IndexBackend, build_index, knn_query, range_query
from . import tn_graph as tng


@dataclass(frozen=True)
class StreamConfig:
    window: int                # W: live points kept
    min_pts: int               # N: minimum points per micro-cluster
    n_micro: int               # minimum micro-clusters per macro-cluster
    r_max: float               # micro-cluster radius cap
    k: int                     # tightest-neighbor level over MC centers
    tk: int                    # neighborhood size for the SNN radius
    mk: int                    # shared-count gate for the SNN radius
    alpha: float = 1.0         # TNOF threshold factor at the macro stage
    backend: IndexBackend = field(default_factory=IndexBackend.kd_tree)
    stride: int = 1            # arrivals per pipeline pass; 1 is the reference semantics

    def __post_init__(self):
        if not self.window >= self.min_pts >= 2:
            raise ConfigError("need window >= min_pts >= 2")
        if self.n_micro < 1:
            raise ConfigError("n_micro must be >= 1")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        SnnParams(self.tk, self.mk, self.r_max)  # validates tk/mk/r_max

    @property
    def snn_params(self):
        return SnnParams(self.tk, self.mk, self.r_max)


@dataclass
class StreamPoint:
    id: int
    arrival_index: int
    coords: np.ndarray
    mc_id: Optional[int] = None
    true_label: Optional[int] = None


@dataclass(frozen=True)
class StreamSnapshot:
    """An immutable, internally consistent view of the engine at one step.

    Unassigned points and unattached (gray) MCs carry 0 in the mc/macro
    slots, matching the serialized form.
    """

    step: int
    points: tuple   # (id, mc, macro) per live point, arrival order
    mcs: tuple      # (id, center tuple, radius, count, macro), ascending id
    macros: tuple   # (id, sorted mc id tuple), ascending id
    outlier_mc_ids: tuple

    def predicted_labels(self):
        """id -> macro label (0 for anything outside a macro)."""
        return {pid: macro for pid, _mc, macro in self.points}


class _Mc:
    __slots__ = ("id", "members", "center", "radius", "macro_id")

    def __init__(self, mc_id, members, center, radius):
        self.id = mc_id
        self.members = members      # set of live point ids
        self.center = center
        self.radius = radius        # fixed at creation
        self.macro_id = None


class TnStreamEngine:
    def __init__(self, config, dim):
        if dim < 1:
            raise ConfigError("dim must be >= 1")
        self.config = config
        self.dim = dim
        self._live = deque()        # StreamPoint, arrival order
        self._points = {}           # id -> StreamPoint
        self._mcs = {}              # id -> _Mc
        self._macros = {}           # id -> set of mc ids
        self._next_mc_id = 1
        self._next_macro_id = 1
        self._last_arrival = -1
        self._pending = 0
        self._evict_hook = None     # callable(point, macro_label) used by runners

    # -- arrivals ---------------------------------------------------------

    def process_point(self, point):
        """Ingest one arrival and run the pipeline (subject to stride)."""
        if point.arrival_index != self._last_arrival + 1:
            raise OutOfOrderArrival(
                f"arrival {point.arrival_index} after {self._last_arrival}"
            )
        coords = np.asarray(point.coords, dtype=np.float64).reshape(-1)
        if coords.shape[0] != self.dim:
            raise DimensionMismatch(f"point of dim {coords.shape[0]}, stream dim {self.dim}")
        point.coords = coords
        point.mc_id = None
        self._last_arrival = point.arrival_index
        self._live.append(point)
        self._points[point.id] = point
        self._pending += 1
        if self._pending >= self.config.stride:
            self._pending = 0
            self._run_pipeline()

    def process(self, coords, label=None):
        """Convenience wrapper: ids and arrival indexes assigned sequentially."""
        idx = self._last_arrival + 1
        self.process_point(StreamPoint(id=idx, arrival_index=idx, coords=coords, true_label=label))

    def _run_pipeline(self):
        self.evict_expired()
        self.define_mcs()
        self.add_to_mcs()
        self.define_macros()
        self.add_mc_to_macro()
        self.update_mcs()
        self.update_macros()
        self.kill_mcs()
        self.kill_macros()

    # -- pipeline phases ----------------------------------------------------

    def evict_expired(self):
        """Drop oldest points beyond the window; their MCs just lose members here."""
        while len(self._live) > self.config.window:
            old = self._live.popleft()
            if old.mc_id is not None:
                self._mcs[old.mc_id].members.discard(old.id)
            if self._evict_hook is not None:
                self._evict_hook(old, self._macro_label(old))
            del self._points[old.id]

    def define_mcs(self):
        """Create MCs from unassigned points until a full pass creates none.

        Each pass freezes an index over the currently unassigned points; a
        seed that earns a radius pulls every still-unassigned point inside
        its ball, and the ball becomes an MC when at least min_pts fit.
        """
        cfg = self.config
        while True:
            unassigned = [p for p in self._live if p.mc_id is None]
            if len(unassigned) < cfg.min_pts:
                return
            ps = PointSet([p.id for p in unassigned], np.array([p.coords for p in unassigned]))
            index = build_index(ps, cfg.backend)
            cache = {}

            def knn(pid, k, _index=index, _cache=cache):
                hit = _cache.get(pid)
                if hit is None or len(hit) < k:
                    hit = knn_query(_index, pid, k)
                    _cache[pid] = hit
                return hit[:k]

            created = 0
            for seed in unassigned:
                if seed.mc_id is not None:
                    continue
                radius = adaptive_radius(ps, seed.id, cfg.snn_params, knn=knn)
                if radius is None:
                    continue
                members = {
                    pid
                    for pid in range_query(index, seed.coords, radius)
                    if self._points[pid].mc_id is None
                }
                if len(members) < cfg.min_pts:
                    continue
                mc = _Mc(
                    self._next_mc_id,
                    members,
                    self._member_mean(members),
                    radius,
                )
                self._next_mc_id += 1
                self._mcs[mc.id] = mc
                for pid in members:
                    self._points[pid].mc_id = mc.id
                created += 1
            if created == 0:
                return

    def add_to_mcs(self):
        """Unassigned points join the nearest MC whose ball covers them."""
        if not self._mcs:
            return
        mc_ids = sorted(self._mcs)
        centers = np.array([self._mcs[m].center for m in mc_ids])
        radii = np.array([self._mcs[m].radius for m in mc_ids])
        order = np.array(mc_ids)
        for p in self._live:
            if p.mc_id is not None:
                continue
            dists = np.sqrt(((centers - p.coords) ** 2).sum(axis=1))
            inside = dists <= radii
            if not inside.any():
                continue
            cand = np.flatnonzero(inside)
            best = cand[np.lexsort((order[cand], dists[cand]))[0]]
            mc = self._mcs[int(order[best])]
            mc.members.add(p.id)
            p.mc_id = mc.id

    def _gated_mutual_adjacency(self, mcs):
        """Mutual-kNN adjacency over MC centers, edges kept only when the
        centers sit within the two radii summed. Exact pairwise math; k is
        clamped to the candidate count minus one."""
        cfg = self.config
        ids = [mc.id for mc in mcs]
        ps = PointSet(ids, np.array([mc.center for mc in mcs]))
        dists = tng.pairwise_distances(ps.coords)
        k_eff = min(cfg.k, len(mcs) - 1)
        mutual = tng._mutual_mask(ps, k_eff, tng.neighbor_ranks(ps, dists))
        radius = {mc.id: mc.radius for mc in mcs}
        adj = {i: set() for i in ids}
        pos = {i: p for p, i in enumerate(ids)}
        for a in range(len(ids)):
            for b in np.flatnonzero(mutual[a]).tolist():
                ia, ib = ids[a], ids[b]
                if dists[a, b] <= radius[ia] + radius[ib]:
                    adj[ia].add(ib)

        def weight(i, j):
            return float(dists[pos[i], pos[j]])

        return adj, weight

    def define_macros(self):
        """Cluster the unattached MCs; each component of at least n_micro
        becomes a new macro. TNOF-flagged MCs just stay unattached (gray)."""
        cfg = self.config
        unattached = sorted(
            (mc for mc in self._mcs.values() if mc.macro_id is None), key=lambda m: m.id
        )
        if len(unattached) < 2:
            return
        adj, weight = self._gated_mutual_adjacency(unattached)
        clustering = tng.cluster_adjacency(adj, weight, cfg.alpha)
        for comp in clustering.clusters:
            if len(comp) < cfg.n_micro:
                continue
            macro_id = self._next_macro_id
            self._next_macro_id += 1
            self._macros[macro_id] = set(comp)
            for mid in comp:
                self._mcs[mid].macro_id = macro_id

    def add_mc_to_macro(self):
        """Unattached MCs adopt the macro of the nearest already-attached MC
        when the centers sit within summed radii. Attachment is judged
        against the attached set at phase start."""
        attached = sorted(
            (mc for mc in self._mcs.values() if mc.macro_id is not None), key=lambda m: m.id
        )
        if not attached:
            return
        centers = np.array([mc.center for mc in attached])
        radii = np.array([mc.radius for mc in attached])
        macro_ids = np.array([mc.macro_id for mc in attached])
        mc_ids = np.array([mc.id for mc in attached])
        for mc in sorted(self._mcs.values(), key=lambda m: m.id):
            if mc.macro_id is not None:
                continue
            dists = np.sqrt(((centers - mc.center) ** 2).sum(axis=1))
            best = np.lexsort((mc_ids, macro_ids, dists))[0]
            if dists[best] <= mc.radius + radii[best]:
                macro_id = int(macro_ids[best])
                mc.macro_id = macro_id
                self._macros[macro_id].add(mc.id)

    def update_mcs(self):
        """Refresh every MC's count and center from its live members."""
        for mc in self._mcs.values():
            if mc.members:
                mc.center = self._member_mean(mc.members)

    def update_macros(self):
        """Re-cluster each macro's own MCs; keep the largest component when it
        still reaches n_micro, detach everything else."""
        cfg = self.config
        for macro_id in sorted(self._macros):
            member_ids = sorted(self._macros[macro_id])
            mcs = [self._mcs[m] for m in member_ids]
            largest = set()
            if len(mcs) >= 2:
                adj, weight = self._gated_mutual_adjacency(mcs)
                clustering = tng.cluster_adjacency(adj, weight, cfg.alpha)
                if clustering.clusters:
                    largest = max(
                        clustering.clusters, key=lambda c: (len(c), -min(c))
                    )
            if len(largest) < cfg.n_micro:
                largest = set()  # kill_macros removes the emptied macro
            for mid in member_ids:
                if mid not in largest:
                    self._mcs[mid].macro_id = None
            self._macros[macro_id] = largest

    def kill_mcs(self):
        """Delete MCs that fell below min_pts members; their points go free."""
        for mc_id in sorted(self._mcs):
            mc = self._mcs[mc_id]
            if len(mc.members) >= self.config.min_pts:
                continue
            for pid in mc.members:
                self._points[pid].mc_id = None
            if mc.macro_id is not None:
                self._macros[mc.macro_id].discard(mc.id)
            del self._mcs[mc_id]

    def kill_macros(self):
        """Delete macros that fell below n_micro MCs; their MCs detach."""
        for macro_id in sorted(self._macros):
            members = self._macros[macro_id]
            if len(members) >= self.config.n_micro:
                continue
            for mid in members:
                self._mcs[mid].macro_id = None
            del self._macros[macro_id]

    # -- views ------------------------------------------------------------

    def _member_mean(self, member_ids):
        return np.array([self._points[pid].coords for pid in sorted(member_ids)]).mean(axis=0)

    def _macro_label(self, point):
        if point.mc_id is None:
            return 0
        macro = self._mcs[point.mc_id].macro_id
        return macro if macro is not None else 0

    def snapshot(self):
        ordered = [self._mcs[m] for m in sorted(self._mcs)]
        points = tuple(
            (p.id, p.mc_id if p.mc_id is not None else 0, self._macro_label(p))
            for p in self._live
        )
        mcs = tuple(
            (
                mc.id,
                tuple(float(c) for c in mc.center),
                float(mc.radius),
                len(mc.members),
                mc.macro_id if mc.macro_id is not None else 0,
            )
            for mc in ordered
        )
        macros = tuple(
            (macro_id, tuple(sorted(self._macros[macro_id]))) for macro_id in sorted(self._macros)
        )
        gray = tuple(mc.id for mc in ordered if mc.macro_id is None)
        return StreamSnapshot(
            step=self._last_arrival, points=points, mcs=mcs, macros=macros, outlier_mc_ids=gray
        )

    def check_invariants(self):
        """Assert the between-arrival invariants; used by the test suite."""
        cfg = self.config
        assert len(self._live) <= cfg.window
        seen_members = set()
        for mc_id, mc in self._mcs.items():
            assert len(mc.members) >= cfg.min_pts
            assert 0.0 < mc.radius <= cfg.r_max
            assert not (mc.members & seen_members)
            seen_members |= mc.members
            expected = self._member_mean(mc.members)
            assert np.allclose(mc.center, expected)
            for pid in mc.members:
                assert self._points[pid].mc_id == mc_id
            if mc.macro_id is not None:
                assert mc.id in self._macros[mc.macro_id]
        for p in self._live:
            assert p.mc_id is None or p.id in self._mcs[p.mc_id].members
        seen_mcs = set()
        for macro_id, members in self._macros.items():
            assert len(members) >= cfg.n_micro
            assert not (members & seen_mcs)
            seen_mcs |= members
            for mid in members:
                assert self._mcs[mid].macro_id == macro_id
