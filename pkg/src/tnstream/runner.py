"""Stream replay, snapshot serialization, and the benchmark harness."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Optional

from . import metrics
from .errors import ConfigError, LengthMismatch
from .stream_engine import StreamPoint, StreamSnapshot, TnStreamEngine

SNAPSHOT_SCHEMA = 1


@dataclass
class ReplayResult:
    snapshots: list
    final: StreamSnapshot
    scores: Optional[dict]
    wall_ms: float
    engine: TnStreamEngine


def replay_stream(
    ps,
    labels,
    config,
    snapshot_every=None,
    metrics_mode="final",
    exclude_outliers=False,
):
    """Feed a PointSet through a fresh engine in row order.

    Snapshots are taken every `snapshot_every` arrivals (default: the window
    size) and at end of stream. Scores compare ground truth against each
    point's macro label, either over the final window (default) or
    cumulatively over every point at the moment it left the window.
    """
    if metrics_mode not in ("final", "cumulative"):
        raise ConfigError(f"unknown metrics mode {metrics_mode!r}")
    if labels is not None and len(labels) != len(ps):
        raise LengthMismatch(f"{len(labels)} labels for {len(ps)} points")
    cadence = snapshot_every or config.window
    engine = TnStreamEngine(config, ps.dim)
    history = []
    if labels is not None and metrics_mode == "cumulative":
        engine._evict_hook = lambda point, macro: history.append((point.true_label, macro))
    snapshots = []
    start = time.perf_counter()
    for count, pos in enumerate(range(len(ps)), start=1):
        label = None if labels is None else labels[pos]
        engine.process_point(
            StreamPoint(
                id=int(ps.ids[pos]),
                arrival_index=count - 1,
                coords=ps.coords[pos],
                true_label=label,
            )
        )
        if count % cadence == 0:
            snapshots.append(engine.snapshot())
    wall_ms = (time.perf_counter() - start) * 1000.0
    if not snapshots or snapshots[-1].step != engine._last_arrival:
        snapshots.append(engine.snapshot())
    final = snapshots[-1]
    result_scores = None
    if labels is not None:
        truth = [p.true_label for p in engine._live]
        pred = [engine._macro_label(p) for p in engine._live]
        if metrics_mode == "cumulative":
            truth = [t for t, _ in history] + truth
            pred = [m for _, m in history] + pred
        result_scores = metrics.scores(truth, pred, exclude_outliers=exclude_outliers)
    return ReplayResult(
        snapshots=snapshots, final=final, scores=result_scores, wall_ms=wall_ms, engine=engine
    )


# -- serialization ----------------------------------------------------------

def snapshot_to_dict(snap):
    return {
        "schema": SNAPSHOT_SCHEMA,
        "step": snap.step,
        "points": [{"id": i, "mc": mc, "macro": macro} for i, mc, macro in snap.points],
        "mcs": [
            {"id": i, "center": list(center), "r": r, "count": count, "macro": macro}
            for i, center, r, count, macro in snap.mcs
        ],
        "macros": [{"id": i, "mcs": list(mcs)} for i, mcs in snap.macros],
        "outlier_mcs": list(snap.outlier_mc_ids),
    }


def snapshot_from_dict(doc):
    return StreamSnapshot(
        step=doc["step"],
        points=tuple((p["id"], p["mc"], p["macro"]) for p in doc["points"]),
        mcs=tuple(
            (m["id"], tuple(m["center"]), m["r"], m["count"], m["macro"]) for m in doc["mcs"]
        ),
        macros=tuple((m["id"], tuple(m["mcs"])) for m in doc["macros"]),
        outlier_mc_ids=tuple(doc["outlier_mcs"]),
    )


def write_snapshots_jsonl(path, snapshots):
    with open(path, "w") as fh:
        for snap in snapshots:
            fh.write(json.dumps(snapshot_to_dict(snap), sort_keys=True))
            fh.write("\n")


def read_snapshots_jsonl(path):
    with open(path) as fh:
        return [snapshot_from_dict(json.loads(line)) for line in fh if line.strip()]


# -- benchmark harness ------------------------------------------------------

def config_params(config):
    doc = {
        "window": config.window,
        "min_pts": config.min_pts,
        "n_micro": config.n_micro,
        "r_max": config.r_max,
        "k": config.k,
        "tk": config.tk,
        "mk": config.mk,
        "alpha": config.alpha,
        "stride": config.stride,
    }
    if config.backend.lsh_params is not None:
        lsh = config.backend.lsh_params
        doc.update(
            num_hyperplanes=lsh.num_hyperplanes, num_tables=lsh.num_tables, seed=lsh.seed
        )
    return doc


def run_benchmark(rows, jsonl_path=None, table_path=None, **replay_kwargs):
    """Run (name, ps, labels, config) rows; one scorecard entry per row.

    A row that raises is recorded with its error and the run continues.
    """
    cards = []
    for name, ps, labels, config in rows:
        card = {"dataset": name, "backend": config.backend.kind}
        try:
            result = replay_stream(ps, labels, config, **replay_kwargs)
            card.update(result.scores or {})
            card.update(
                wall_ms=round(result.wall_ms, 3),
                n_mc=len(result.final.mcs),
                n_macro=len(result.final.macros),
                params=config_params(config),
            )
        except Exception as exc:  # noqa: BLE001 - per-row failures must not stop the run
            card["error"] = f"{type(exc).__name__}: {exc}"
        cards.append(card)
    if jsonl_path:
        with open(jsonl_path, "w") as fh:
            for card in cards:
                fh.write(json.dumps(card, sort_keys=True))
                fh.write("\n")
    if table_path:
        with open(table_path, "w") as fh:
            fh.write(format_scorecard(cards))
    return cards


def format_scorecard(cards):
    headers = ["dataset", "backend", "purity", "ari", "nmi", "wall_ms", "n_mc", "n_macro"]
    lines = ["  ".join(f"{h:>10}" for h in headers)]
    for card in cards:
        if "error" in card:
            lines.append(f"{card['dataset']:>10}  {card['backend']:>10}  ERROR {card['error']}")
            continue
        cells = [card["dataset"], card["backend"]] + [
            f"{card.get(h, float('nan')):.5f}" if h in ("purity", "ari", "nmi") else str(card.get(h, ""))
            for h in headers[2:]
        ]
        lines.append("  ".join(f"{c:>10}" for c in cells))
    return "\n".join(lines) + "\n"
