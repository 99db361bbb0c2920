"""Command line entry point.

Subcommands:
  run       replay one dataset (file or generator) and emit snapshots + scores
  bench     run a JSON config of benchmark rows into a scorecard
  generate  write a synthetic dataset to CSV

Exit codes: 0 success, 1 configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .data import generate_synthetic, load_csv, write_csv
from .errors import ArityMismatch, ConfigError, InvalidSpec, ParseError, TnStreamError
from .runner import config_params, format_scorecard, replay_stream, run_benchmark, write_snapshots_jsonl
from .spatial_index import IndexBackend
from .stream_engine import StreamConfig

CONFIG_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # bad flags are configuration errors
        self.print_usage(sys.stderr)
        raise SystemExit(CONFIG_EXIT)


def _add_engine_flags(parser):
    parser.add_argument("--window", type=int, required=True, help="sliding window size W")
    parser.add_argument("--min-pts", type=int, required=True, metavar="N",
                        help="minimum points per micro-cluster")
    parser.add_argument("--n-micro", type=int, required=True,
                        help="minimum micro-clusters per macro-cluster")
    parser.add_argument("--r-max", type=float, required=True, help="micro-cluster radius cap")
    parser.add_argument("--k", type=int, required=True, help="tightest-neighbor level for macros")
    parser.add_argument("--tk", type=int, required=True, help="SNN neighborhood size")
    parser.add_argument("--mk", type=int, required=True, help="SNN shared-count threshold")
    parser.add_argument("--alpha", type=float, default=1.0, help="outlier threshold factor")
    parser.add_argument("--backend", choices=["kd_tree", "ball_tree", "lsh"], default="kd_tree")
    parser.add_argument("--num-hashes", type=int, default=16,
                        help="total LSH hyperplanes, split across tables")
    parser.add_argument("--num-tables", type=int, default=4, help="LSH table count")
    parser.add_argument("--seed", type=int, default=0, help="seed for LSH tables and generators")
    parser.add_argument("--stride", type=int, default=1, help="arrivals per pipeline pass")


def build_backend(name, num_hashes=16, num_tables=4, seed=0):
    if name == "kd_tree":
        return IndexBackend.kd_tree()
    if name == "ball_tree":
        return IndexBackend.ball_tree()
    if name == "lsh":
        bits = max(1, num_hashes // num_tables)
        return IndexBackend.lsh(bits, num_tables, seed)
    raise ConfigError(f"unknown backend {name!r}")


def _config_from_args(args):
    return StreamConfig(
        window=args.window,
        min_pts=args.min_pts,
        n_micro=args.n_micro,
        r_max=args.r_max,
        k=args.k,
        tk=args.tk,
        mk=args.mk,
        alpha=args.alpha,
        backend=build_backend(args.backend, args.num_hashes, args.num_tables, args.seed),
        stride=args.stride,
    )


def _load_inputs(args):
    if args.data:
        return load_csv(args.data, has_labels=not args.no_labels, normalize=not args.raw)
    ps, labels = generate_synthetic(args.generate, seed=args.seed)
    return ps, labels


def _cmd_run(args):
    ps, labels = _load_inputs(args)
    result = replay_stream(
        ps,
        labels,
        _config_from_args(args),
        snapshot_every=args.snapshot_every,
        metrics_mode=args.metrics_mode,
    )
    if args.snapshots:
        write_snapshots_jsonl(args.snapshots, result.snapshots)
    summary = {
        "snapshots": len(result.snapshots),
        "wall_ms": round(result.wall_ms, 3),
        "n_mc": len(result.final.mcs),
        "n_macro": len(result.final.macros),
        "params": config_params(_config_from_args(args)),
    }
    if result.scores:
        summary.update(result.scores)
    if args.score:
        with open(args.score, "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
            fh.write("\n")
    print(json.dumps(summary, sort_keys=True))
    return 0


def _bench_rows(doc):
    rows = []
    for entry in doc.get("rows", []):
        params = dict(entry["params"])
        backend = build_backend(
            params.pop("backend", "kd_tree"),
            params.pop("num_hashes", 16),
            params.pop("num_tables", 4),
            params.pop("seed", entry.get("seed", 0)),
        )
        config = StreamConfig(backend=backend, **params)
        if "data" in entry:
            ps, labels = load_csv(
                entry["data"],
                has_labels=entry.get("has_labels", True),
                normalize=entry.get("normalize", True),
            )
        else:
            ps, labels = generate_synthetic(entry["generate"], seed=entry.get("seed", 0))
        rows.append((entry.get("name", entry.get("data", "generated")), ps, labels, config))
    return rows


def _cmd_bench(args):
    with open(args.config) as fh:
        doc = json.load(fh)
    rows = _bench_rows(doc)
    cards = run_benchmark(rows, jsonl_path=args.out + ".jsonl", table_path=args.out + ".txt")
    print(format_scorecard(cards), end="")
    return 0


def _cmd_generate(args):
    ps, labels = generate_synthetic(args.spec, seed=args.seed)
    write_csv(args.out, ps, labels)
    print(f"wrote {len(ps)} rows to {args.out}")
    return 0


def main(argv=None):
    parser = _Parser(prog="tnstream")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a dataset through the engine")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV dataset path")
    src.add_argument("--generate", help="generator spec, e.g. blobs:k=2,n=300,d=2,sigma=0.05,sep=1")
    run.add_argument("--no-labels", action="store_true", help="dataset has no label column")
    run.add_argument("--raw", action="store_true", help="skip min-max normalization")
    _add_engine_flags(run)
    run.add_argument("--snapshots", help="write snapshot JSON-lines here")
    run.add_argument("--score", help="write the score summary JSON here")
    run.add_argument("--snapshot-every", type=int, default=None)
    run.add_argument("--metrics-mode", choices=["final", "cumulative"], default="final")
    run.set_defaults(func=_cmd_run)

    bench = sub.add_parser("bench", help="run a benchmark config")
    bench.add_argument("--config", required=True, help="JSON file with benchmark rows")
    bench.add_argument("--out", required=True, help="output prefix (.jsonl and .txt)")
    bench.set_defaults(func=_cmd_bench)

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    gen.add_argument("--spec", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ArityMismatch, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (ConfigError, InvalidSpec, ValueError, KeyError, TnStreamError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_EXIT


if __name__ == "__main__":
    sys.exit(main())
