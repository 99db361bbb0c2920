import numpy as np
import pytest

from tnstream.data import multi_density, uniform_ball_blobs
from tnstream.errors import ConfigError, OutOfOrderArrival
from tnstream.spatial_index import IndexBackend
from tnstream.stream_engine import StreamConfig, StreamPoint, TnStreamEngine
from tnstream.stream_engine import _Mc


def config(**over):
    base = dict(window=100, min_pts=3, n_micro=2, r_max=1.0, k=2, tk=3, mk=1, alpha=1.0)
    base.update(over)
    return StreamConfig(**base)


def feed(engine, coords, labels=None):
    for i, c in enumerate(coords):
        engine.process(c, None if labels is None else labels[i])


def inject_point(engine, coords, mc_id=None):
    idx = engine._last_arrival + 1
    p = StreamPoint(id=idx, arrival_index=idx, coords=np.asarray(coords, float), mc_id=mc_id)
    engine._live.append(p)
    engine._points[p.id] = p
    engine._last_arrival = idx
    return p


def inject_mc(engine, member_coords, radius, macro_id=None):
    members = {inject_point(engine, c).id for c in member_coords}
    mc = _Mc(engine._next_mc_id, members, None, radius)
    mc.center = engine._member_mean(members)
    mc.macro_id = macro_id
    engine._next_mc_id += 1
    engine._mcs[mc.id] = mc
    for pid in members:
        engine._points[pid].mc_id = mc.id
    if macro_id is not None:
        engine._macros.setdefault(macro_id, set()).add(mc.id)
        engine._next_macro_id = max(engine._next_macro_id, macro_id + 1)
    return mc


# -- config and arrival plumbing ----------------------------------------------

def test_config_validation():
    with pytest.raises(ConfigError):
        config(window=2, min_pts=3)
    with pytest.raises(ConfigError):
        config(min_pts=1)
    with pytest.raises(ConfigError):
        config(n_micro=0)
    with pytest.raises(ConfigError):
        config(k=0)
    with pytest.raises(ConfigError):
        config(stride=0)
    with pytest.raises(ValueError):
        config(mk=9, tk=3)


def test_out_of_order_arrival():
    eng = TnStreamEngine(config(), 1)
    eng.process_point(StreamPoint(id=0, arrival_index=0, coords=[0.0]))
    with pytest.raises(OutOfOrderArrival):
        eng.process_point(StreamPoint(id=5, arrival_index=7, coords=[0.0]))


def test_single_point_stream_stays_empty():
    eng = TnStreamEngine(config(), 2)
    eng.process([0.5, 0.5])
    snap = eng.snapshot()
    assert snap.mcs == () and snap.macros == ()
    assert snap.points == ((0, 0, 0),)


def test_eviction_keeps_window():
    eng = TnStreamEngine(config(window=10, min_pts=2), 1)
    rng = np.random.default_rng(0)
    feed(eng, rng.uniform(size=(25, 1)))
    assert len(eng._live) == 10
    assert {p.id for p in eng._live} == set(range(15, 25))


# -- define_mcs ----------------------------------------------------------------

def test_tight_group_forms_single_mc():
    # five near-coincident points, min_pts 3: one MC ends up holding all five
    eng = TnStreamEngine(config(min_pts=3, tk=3, mk=1), 1)
    feed(eng, [[0.0], [0.004], [0.001], [0.003], [0.002]])
    assert len(eng._mcs) == 1
    (mc,) = eng._mcs.values()
    assert len(mc.members) == 5
    assert mc.center[0] == pytest.approx(0.002)


def test_too_few_points_no_mc():
    eng = TnStreamEngine(config(min_pts=3), 1)
    feed(eng, [[0.0], [0.01]])
    assert not eng._mcs


def test_multi_density_radii():
    ps, _ = multi_density(150, 150, 2, sigma_dense=0.01, sigma_sparse=0.15, separation=8.0, seed=3)
    eng = TnStreamEngine(config(window=300, min_pts=3, tk=4, mk=1, r_max=0.5, alpha=3.0), 2)
    feed(eng, ps.coords)
    dense_r, sparse_r = [], []
    for mc in eng._mcs.values():
        (sparse_r if mc.center[0] > 4.0 else dense_r).append(mc.radius)
    assert dense_r and sparse_r
    assert max(dense_r) < min(sparse_r)
    assert all(r <= 0.5 for r in sparse_r)


# -- add_to_mcs ----------------------------------------------------------------

def test_point_at_exact_radius_joins():
    eng = TnStreamEngine(config(), 1)
    mc = inject_mc(eng, [[0.0], [0.2]], radius=0.4)  # center 0.1
    inject_point(eng, [0.5])  # exactly at center + radius
    eng.add_to_mcs()
    assert eng._points[2].mc_id == mc.id


def test_point_outside_all_radii_stays_free():
    eng = TnStreamEngine(config(), 1)
    inject_mc(eng, [[0.0], [0.2]], radius=0.4)
    p = inject_point(eng, [0.51])
    eng.add_to_mcs()
    assert p.mc_id is None


def test_nearest_center_wins():
    eng = TnStreamEngine(config(), 1)
    a = inject_mc(eng, [[0.0], [0.2]], radius=1.0)    # center 0.1
    b = inject_mc(eng, [[1.0], [1.2]], radius=1.0)    # center 1.1
    p = inject_point(eng, [0.7])                      # 0.6 from a, 0.4 from b
    eng.add_to_mcs()
    assert p.mc_id == b.id
    q = inject_point(eng, [0.6])                      # equidistant: smaller id wins
    eng.add_to_mcs()
    assert q.mc_id == a.id


# -- define_macros --------------------------------------------------------------

def chain_engine(n_mcs, spacing, radius, **cfg_over):
    eng = TnStreamEngine(config(**cfg_over), 1)
    mcs = [
        inject_mc(eng, [[i * spacing - 0.01], [i * spacing + 0.01]], radius=radius)
        for i in range(n_mcs)
    ]
    return eng, mcs


def test_chain_within_summed_radii_forms_one_macro():
    eng, mcs = chain_engine(4, spacing=0.5, radius=0.3, n_micro=4, k=2)
    eng.define_macros()
    assert len(eng._macros) == 1
    assert all(mc.macro_id is not None for mc in mcs)


def test_below_n_micro_no_macro():
    eng, _ = chain_engine(3, spacing=0.5, radius=0.3, n_micro=4, k=2)
    eng.define_macros()
    assert not eng._macros


def test_two_far_chains_two_macros():
    eng = TnStreamEngine(config(n_micro=2, k=2), 1)
    for base in (0.0, 50.0):
        for i in range(3):
            inject_mc(eng, [[base + i * 0.5 - 0.01], [base + i * 0.5 + 0.01]], radius=0.3)
    eng.define_macros()
    assert len(eng._macros) == 2
    groups = [sorted(m) for m in eng._macros.values()]
    assert sorted(len(g) for g in groups) == [3, 3]


def test_gate_blocks_mutual_neighbors_beyond_summed_radii():
    # mutually nearest but too far apart for their radii: no macro
    eng, _ = chain_engine(4, spacing=2.0, radius=0.3, n_micro=2, k=2)
    eng.define_macros()
    assert not eng._macros


# -- add_mc_to_macro -------------------------------------------------------------

def test_adjacent_mc_absorbed():
    eng = TnStreamEngine(config(n_micro=2, k=2), 1)
    inject_mc(eng, [[0.0], [0.02]], radius=0.3, macro_id=1)
    inject_mc(eng, [[0.5], [0.52]], radius=0.3, macro_id=1)
    new = inject_mc(eng, [[1.0], [1.02]], radius=0.3)
    eng.add_mc_to_macro()
    assert new.macro_id == 1
    assert new.id in eng._macros[1]


def test_distant_mc_stays_unattached():
    eng = TnStreamEngine(config(n_micro=2, k=2), 1)
    inject_mc(eng, [[0.0], [0.02]], radius=0.3, macro_id=1)
    inject_mc(eng, [[0.5], [0.52]], radius=0.3, macro_id=1)
    far = inject_mc(eng, [[9.0], [9.02]], radius=0.3)
    eng.add_mc_to_macro()
    assert far.macro_id is None


def test_equidistant_mc_prefers_smaller_macro_id():
    eng = TnStreamEngine(config(n_micro=1, k=2), 2)
    inject_mc(eng, [[-1.0, -0.02], [-1.0, 0.02]], radius=0.6, macro_id=1)
    inject_mc(eng, [[1.0, -0.02], [1.0, 0.02]], radius=0.6, macro_id=2)
    mid = inject_mc(eng, [[0.0, -0.02], [0.0, 0.02]], radius=0.6)
    eng.add_mc_to_macro()
    assert mid.macro_id == 1


# -- update/kill phases -----------------------------------------------------------

def test_update_mcs_recomputes_mean():
    eng = TnStreamEngine(config(), 2)
    mc = inject_mc(eng, [[0.0, 0.0], [2.0, 0.0]], radius=2.0)
    assert mc.center.tolist() == [1.0, 0.0]
    p = inject_point(eng, [1.0, 3.0])
    mc.members.add(p.id)
    p.mc_id = mc.id
    eng.update_mcs()
    assert mc.center.tolist() == [1.0, 1.0]
    assert len(mc.members) == 3


def test_kill_mcs_threshold():
    eng = TnStreamEngine(config(min_pts=2), 1)
    keep = inject_mc(eng, [[0.0], [0.1]], radius=0.5)          # exactly N: survives
    doomed = inject_mc(eng, [[5.0], [5.1]], radius=0.5)
    victim = next(iter(doomed.members))
    doomed.members.remove(victim)                               # N-1: deleted
    eng.kill_mcs()
    assert keep.id in eng._mcs
    assert doomed.id not in eng._mcs
    assert eng._points[victim].mc_id is None or victim not in doomed.members


def test_kill_mcs_frees_members_and_updates_macro():
    eng = TnStreamEngine(config(min_pts=3, n_micro=1), 1)
    mc = inject_mc(eng, [[0.0], [0.1]], radius=0.5, macro_id=1)  # below N=3
    member_ids = set(mc.members)
    eng.kill_mcs()
    assert mc.id not in eng._mcs
    assert all(eng._points[pid].mc_id is None for pid in member_ids)
    assert mc.id not in eng._macros[1]


def test_kill_macros_threshold():
    eng = TnStreamEngine(config(n_micro=2, k=2), 1)
    inject_mc(eng, [[0.0], [0.02]], radius=0.3, macro_id=1)
    inject_mc(eng, [[0.5], [0.52]], radius=0.3, macro_id=1)
    lone = inject_mc(eng, [[9.0], [9.02]], radius=0.3, macro_id=2)
    eng.kill_macros()
    assert 1 in eng._macros           # exactly n_micro survives
    assert 2 not in eng._macros       # below threshold deleted
    assert lone.macro_id is None


def test_update_macros_keeps_largest_group():
    eng = TnStreamEngine(config(n_micro=2, k=2, alpha=3.0), 1)
    near = [
        inject_mc(eng, [[i * 0.5 - 0.01], [i * 0.5 + 0.01]], radius=0.3, macro_id=1)
        for i in range(3)
    ]
    drifted = [
        inject_mc(eng, [[40.0 + i * 0.5 - 0.01], [40.0 + i * 0.5 + 0.01]], radius=0.3, macro_id=1)
        for i in range(2)
    ]
    eng.update_macros()
    assert eng._macros[1] == {mc.id for mc in near}
    assert all(mc.macro_id is None for mc in drifted)


def test_update_macros_kills_fragmented_macro():
    eng = TnStreamEngine(config(n_micro=3, k=2, alpha=3.0), 1)
    for base in (0.0, 40.0):
        for i in range(2):
            inject_mc(eng, [[base + i * 0.5 - 0.01], [base + i * 0.5 + 0.01]], radius=0.3, macro_id=1)
    eng.update_macros()
    eng.kill_macros()
    assert 1 not in eng._macros
    assert all(mc.macro_id is None for mc in eng._mcs.values())


def test_freed_mcs_can_rejoin_later():
    # group A slides out of the window, its MC dies, and the macro over
    # {A, B, C} collapses below n_micro; B and C survive as free MCs and
    # rejoin a new macro once the vacated region repopulates.
    # Binary-fraction grids keep every distance comparison exact.
    eng = TnStreamEngine(config(window=25, min_pts=3, n_micro=3, k=2, tk=4, mk=3, r_max=0.5, alpha=3.0), 1)
    p = 0.125
    group_a = [[i * p] for i in range(5)]
    group_b = [[(7 + i) * p] for i in range(5)]
    group_c = [[(14 + i) * p] for i in range(5)]
    feed(eng, group_a + group_b + group_c)
    assert len(eng._macros) == 1
    feed(eng, [[100.0 + 5.0 * i] for i in range(15)])  # slides A out
    assert not eng._macros
    freed = {mc.id for mc in eng._mcs.values()}
    assert len(freed) == 2 and all(mc.macro_id is None for mc in eng._mcs.values())
    feed(eng, group_b + group_c)                       # keep B, C alive in the window
    feed(eng, [[i * 2 * p] for i in range(5)])         # repopulate the vacated region
    assert len(eng._macros) == 1
    (members,) = eng._macros.values()
    assert freed <= members and len(members) == 3


# -- whole-pipeline behavior -------------------------------------------------------

def two_blob_stream(n, seed=0):
    ps, labels = uniform_ball_blobs(2, n, 2, radius=0.08, separation=1.0, seed=seed)
    return ps.coords, labels


def test_invariants_hold_through_random_stream():
    coords, _ = two_blob_stream(160, seed=5)
    eng = TnStreamEngine(config(window=60, min_pts=2, n_micro=2, r_max=0.15, k=2, tk=4, mk=1), 2)
    for c in coords:
        eng.process(c)
        eng.check_invariants()


def test_stationary_two_blobs_hold_two_macros():
    coords, _ = two_blob_stream(400, seed=2)
    eng = TnStreamEngine(
        config(window=200, min_pts=2, n_micro=3, r_max=0.05, k=4, tk=5, mk=2, alpha=3.0), 2
    )
    macro_counts = []
    for c in coords:
        eng.process(c)
        macro_counts.append(len(eng._macros))
    first_stable = macro_counts.index(2)
    assert all(m == 2 for m in macro_counts[first_stable:])


def test_determinism_snapshot_sequences_identical():
    coords, _ = two_blob_stream(120, seed=9)
    def run():
        eng = TnStreamEngine(
            config(window=80, min_pts=2, n_micro=2, r_max=0.15, k=2, tk=4, mk=1,
                   backend=IndexBackend.lsh(8, 4, seed=5)), 2
        )
        snaps = []
        for c in coords:
            eng.process(c)
            snaps.append(eng.snapshot())
        return snaps
    assert run() == run()


def test_snapshot_consistency_and_idempotence():
    coords, _ = two_blob_stream(150, seed=4)
    eng = TnStreamEngine(config(window=100, min_pts=2, n_micro=2, r_max=0.15, k=2, tk=4, mk=1), 2)
    feed(eng, coords)
    snap1 = eng.snapshot()
    snap2 = eng.snapshot()
    assert snap1 == snap2
    by_id = {pid: (mc, macro) for pid, mc, macro in snap1.points}
    for p in eng._live:
        mc, macro = by_id[p.id]
        assert mc == (p.mc_id or 0)
        if mc:
            assert macro == (eng._mcs[mc].macro_id or 0)
        else:
            assert macro == 0
    listed_gray = set(snap1.outlier_mc_ids)
    assert listed_gray == {mc_id for mc_id, *_rest, macro in snap1.mcs if macro == 0}


def test_stride_batches_pipeline():
    coords, _ = two_blob_stream(60, seed=7)
    eng = TnStreamEngine(config(window=60, min_pts=2, n_micro=2, r_max=0.15, k=2, tk=4, mk=1, stride=5), 2)
    feed(eng, coords)
    assert len(eng._live) == 60
    eng.check_invariants()
