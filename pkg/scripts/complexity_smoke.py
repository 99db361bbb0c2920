#!/usr/bin/env python3
"""Timing directionality for the micro-cluster definition phase.

Part 1: uniform 2-D data, LSH backend, n vs 2n: wall-time should grow by
well under 4x (near-linear). Part 2: clumped 38-dimensional data at
n = 20000: the LSH backend should beat the KD-tree. Absolute numbers are
machine-bound; only the direction matters.
"""

import argparse
import time

import numpy as np

from tnstream.spatial_index import IndexBackend
from tnstream.stream_engine import StreamConfig, StreamPoint, TnStreamEngine


def bulk_engine(coords, config):
    engine = TnStreamEngine(config, coords.shape[1])
    for i, c in enumerate(coords):
        p = StreamPoint(id=i, arrival_index=i, coords=np.asarray(c, dtype=np.float64))
        engine._live.append(p)
        engine._points[i] = p
        engine._last_arrival = i
    return engine


def time_define_mcs(coords, backend, min_pts, r_max, tk, mk):
    config = StreamConfig(
        window=len(coords) + 1, min_pts=min_pts, n_micro=3, r_max=r_max,
        k=4, tk=tk, mk=mk, backend=backend,
    )
    engine = bulk_engine(coords, config)
    started = time.perf_counter()
    engine.define_mcs()
    return time.perf_counter() - started, len(engine._mcs)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--base-n", type=int, default=4000)
    parser.add_argument("--wide-n", type=int, default=20000)
    parser.add_argument("--seed", type=int, default=110)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    lsh = IndexBackend.lsh(64, 4, seed=7)
    print("== part 1: doubling n on uniform 2-D data (LSH) ==")
    times = {}
    for n in (args.base_n, 2 * args.base_n):
        coords = rng.uniform(-0.5, 0.5, size=(n, 2))
        times[n], n_mcs = time_define_mcs(coords, lsh, 4, 0.05, 5, 2)
        print(f"  n={n:>6}: {times[n]:6.2f}s   ({n_mcs} micro-clusters)")
    print(f"  ratio: {times[2 * args.base_n] / times[args.base_n]:.2f}")

    print(f"== part 2: clumped wide data, n={args.wide_n}, d=38 ==")
    n_clumps = args.wide_n // 8
    centers = rng.uniform(size=(n_clumps, 38))
    coords = (centers[:, None, :] + rng.normal(0, 0.04, size=(n_clumps, 8, 38))).reshape(-1, 38)
    coords = coords[rng.permutation(len(coords))]
    for name, backend in (("lsh", IndexBackend.lsh(12, 4, seed=7)), ("kd_tree", IndexBackend.kd_tree())):
        elapsed, n_mcs = time_define_mcs(coords, backend, 5, 0.6, 5, 2)
        print(f"  {name:>8}: {elapsed:6.1f}s   ({n_mcs} micro-clusters)")


if __name__ == "__main__":
    main()
