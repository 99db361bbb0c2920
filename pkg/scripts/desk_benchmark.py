#!/usr/bin/env python3
"""Desk-scale benchmark: the three small synthetic streams under each backend.

Writes scorecards next to this script unless --out is given.

    python scripts/desk_benchmark.py --out /tmp/desk
"""

import argparse
from pathlib import Path

from tnstream.data import loop_clusters, minmax_normalize, rings, uniform_ball_blobs
from tnstream.points import PointSet
from tnstream.runner import format_scorecard, run_benchmark
from tnstream.spatial_index import IndexBackend
from tnstream.stream_engine import StreamConfig

BACKENDS = {
    "kd_tree": IndexBackend.kd_tree(),
    "ball_tree": IndexBackend.ball_tree(),
    "lsh": IndexBackend.lsh(16, 4, seed=0),
}


def datasets(seed):
    ps, labels = uniform_ball_blobs(2, 300, 3, radius=0.12, separation=1.0, seed=seed)
    yield "two-ball-300", PointSet(ps.ids, minmax_normalize(ps.coords)), labels, dict(
        window=300, min_pts=2, n_micro=3, r_max=0.15, k=4, tk=6, mk=2, alpha=3.0
    )
    ps, labels = loop_clusters(3, 400, 3, loop_radius=0.25, thickness=0.015, separation=1.0, seed=seed)
    yield "three-loop-400", PointSet(ps.ids, minmax_normalize(ps.coords)), labels, dict(
        window=400, min_pts=2, n_micro=4, r_max=0.12, k=4, tk=5, mk=2, alpha=3.0
    )
    ps, labels = rings(300, [0.12, 0.12], noise=0.01, dim=3, seed=seed, z_gap=0.3)
    yield "stacked-ring-300", ps, labels, dict(
        window=300, min_pts=2, n_micro=4, r_max=0.1, k=4, tk=5, mk=2, alpha=3.0
    )


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", default=str(Path(__file__).with_name("desk_scorecard")))
    args = parser.parse_args()

    rows = []
    for name, ps, labels, params in datasets(args.seed):
        for backend_name, backend in BACKENDS.items():
            rows.append((name, ps, labels, StreamConfig(backend=backend, **params)))
    cards = run_benchmark(rows, jsonl_path=args.out + ".jsonl", table_path=args.out + ".txt")
    print(format_scorecard(cards), end="")
    print(f"\nwrote {args.out}.jsonl and {args.out}.txt")


if __name__ == "__main__":
    main()
