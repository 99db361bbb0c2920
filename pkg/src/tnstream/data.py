"""Dataset ingestion and the synthetic generators used for benchmarks.

CSV files carry d comma-separated features per row plus an optional trailing
integer label; a single non-numeric first row is accepted as a header.
Generators hand back (PointSet, labels) with cluster labels 1..K and noise
labeled 0; ids follow the emitted (shuffled) row order so files replay as
streams directly.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .errors import ArityMismatch, InvalidSpec, ParseError
from .points import PointSet
from .tn_graph import ADD, separability_class


def load_csv(path, has_labels=True, normalize=True):
    """Read a dataset file; returns (PointSet, labels or None)."""
    rows = []
    arity = None
    header_seen = False
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            fields = [f.strip() for f in row]
            if not any(fields):
                continue
            try:
                values = [float(f) for f in fields]
            except ValueError as exc:
                if not rows and not header_seen:
                    header_seen = True
                    continue
                raise ParseError(lineno, str(exc)) from None
            if arity is None:
                arity = len(values)
            elif len(values) != arity:
                raise ArityMismatch(lineno, arity, len(values))
            rows.append(values)
    if not rows:
        raise ParseError(0, "file holds no data rows")
    data = np.array(rows, dtype=np.float64)
    labels = None
    if has_labels:
        if data.shape[1] < 2:
            raise ParseError(0, "label column requested but rows have a single field")
        labels = [int(v) for v in data[:, -1]]
        data = data[:, :-1]
    if normalize:
        data = minmax_normalize(data)
    return PointSet.from_coords(data), labels


def minmax_normalize(coords):
    """Per-feature min-max scaling to [0, 1]; constant features map to 0."""
    coords = np.asarray(coords, dtype=np.float64)
    lo = coords.min(axis=0)
    span = coords.max(axis=0) - lo
    span[span == 0.0] = 1.0
    return (coords - lo) / span


def write_csv(path, ps, labels=None):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for pos in range(len(ps)):
            row = [repr(float(v)) for v in ps.coords[pos]]
            if labels is not None:
                row.append(str(labels[pos]))
            writer.writerow(row)


def _finish(coords, labels, rng, shuffle):
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if shuffle:
        order = rng.permutation(len(coords))
        coords, labels = coords[order], labels[order]
    return PointSet.from_coords(coords), labels.tolist()


def _diagonal_centers(n_clusters, dim, spacing):
    """Cluster centers along the main diagonal, `spacing` apart pairwise, so
    every feature carries the separation (min-max scaling stays harmless)."""
    steps = np.arange(n_clusters, dtype=np.float64).reshape(-1, 1)
    return steps * (spacing / math.sqrt(dim)) * np.ones((1, dim))


def _split_sizes(total, parts):
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def gaussian_blobs(n_clusters, n_points, dim, sigma, separation, seed=0, shuffle=True):
    """n_points total, split evenly over isotropic blobs on a grid of pitch
    `separation`."""
    rng = np.random.default_rng(seed)
    centers = _diagonal_centers(n_clusters, dim, separation)
    coords, labels = [], []
    for label, size in enumerate(_split_sizes(n_points, n_clusters), start=1):
        coords.append(centers[label - 1] + rng.normal(0.0, sigma, size=(size, dim)))
        labels.extend([label] * size)
    return _finish(np.vstack(coords), labels, rng, shuffle)


def uniform_ball_blobs(n_clusters, n_points, dim, radius, separation, seed=0, shuffle=True):
    """Like gaussian_blobs but with compact support: points uniform in a ball.
    No tail points, so a covering by bounded-radius micro-clusters exists."""
    rng = np.random.default_rng(seed)
    centers = _diagonal_centers(n_clusters, dim, separation)
    coords, labels = [], []
    for label, size in enumerate(_split_sizes(n_points, n_clusters), start=1):
        direction = rng.normal(size=(size, dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        r = radius * rng.uniform(0.0, 1.0, size=(size, 1)) ** (1.0 / dim)
        coords.append(centers[label - 1] + direction * r)
        labels.extend([label] * size)
    return _finish(np.vstack(coords), labels, rng, shuffle)


def segment_clusters(n_clusters, n_points, dim, length, thickness, separation, seed=0, shuffle=True):
    """Elongated clusters: each is a thin axis-aligned segment anchored on the
    diagonal lattice. Compact support throughout, so bounded-radius balls can
    tile every cluster end to end."""
    rng = np.random.default_rng(seed)
    anchors = _diagonal_centers(n_clusters, dim, separation)
    coords, labels = [], []
    for label, size in enumerate(_split_sizes(n_points, n_clusters), start=1):
        axis = (label - 1) % dim
        pts = anchors[label - 1] + rng.uniform(-thickness, thickness, size=(size, dim))
        pts[:, axis] += rng.uniform(0.0, length, size=size)
        coords.append(pts)
        labels.extend([label] * size)
    return _finish(np.vstack(coords), labels, rng, shuffle)


def loop_clusters(n_clusters, n_points, dim, loop_radius, thickness, separation, seed=0, shuffle=True):
    """Well-separated circular loops, one per cluster, anchored on the
    diagonal lattice. Closed 1-D manifolds with compact jitter: bounded-radius
    balls tile each loop with no endpoint gaps."""
    if dim < 2:
        raise InvalidSpec("loop clusters need dim >= 2")
    rng = np.random.default_rng(seed)
    anchors = _diagonal_centers(n_clusters, dim, separation)
    coords, labels = [], []
    for label, size in enumerate(_split_sizes(n_points, n_clusters), start=1):
        a, b = (label - 1) % dim, label % dim
        theta = rng.uniform(0.0, 2.0 * np.pi, size=size)
        pts = anchors[label - 1] + rng.uniform(-thickness, thickness, size=(size, dim))
        pts[:, a] += loop_radius * np.cos(theta)
        pts[:, b] += loop_radius * np.sin(theta)
        coords.append(pts)
        labels.extend([label] * size)
    return _finish(np.vstack(coords), labels, rng, shuffle)


def rings(n_points, radii, noise, dim=2, seed=0, shuffle=True, z_gap=0.0):
    """Coaxial rings with uniform (compact) jitter of half-width `noise`.

    Same-plane concentric rings by default; dim=3 adds a jittered z
    coordinate, offset per ring by `z_gap` (stacked rings)."""
    if dim not in (2, 3):
        raise InvalidSpec("rings supports dim 2 or 3")
    if z_gap and dim != 3:
        raise InvalidSpec("z_gap needs dim 3")
    rng = np.random.default_rng(seed)
    coords, labels = [], []
    for label, (radius, size) in enumerate(
        zip(radii, _split_sizes(n_points, len(radii))), start=1
    ):
        theta = rng.uniform(0.0, 2.0 * np.pi, size=size)
        r = radius + rng.uniform(-noise, noise, size=size)
        ring = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        if dim == 3:
            z = (label - 1) * z_gap + rng.uniform(-noise, noise, size=size)
            ring = np.column_stack([ring, z])
        coords.append(ring)
        labels.extend([label] * size)
    return _finish(np.vstack(coords), labels, rng, shuffle)


def multi_density(n_dense, n_sparse, dim, sigma_dense, sigma_sparse, separation, seed=0, shuffle=True):
    """One tight blob (label 1) and one diffuse blob (label 2), `separation` apart."""
    rng = np.random.default_rng(seed)
    dense = rng.normal(0.0, sigma_dense, size=(n_dense, dim))
    sparse_center = np.zeros(dim)
    sparse_center[0] = separation
    sparse = sparse_center + rng.normal(0.0, sigma_sparse, size=(n_sparse, dim))
    labels = [1] * n_dense + [2] * n_sparse
    return _finish(np.vstack([dense, sparse]), labels, rng, shuffle)


def add_instance(n_clusters, cluster_size, dim, gap, seed=0, shuffle=True):
    """Tight, widely separated clusters guaranteed separable at a single
    threshold: returns (PointSet, labels, threshold). The instance is
    certified before emission: the threshold graph must split into exactly
    the generated clusters with every component a clique."""
    rng = np.random.default_rng(seed)
    half_side = gap / (8.0 * math.sqrt(dim))  # within-cluster diameter <= gap/4
    centers = _diagonal_centers(n_clusters, dim, gap)
    coords, labels = [], []
    sizes = (
        list(cluster_size)
        if isinstance(cluster_size, (list, tuple))
        else [int(cluster_size)] * n_clusters
    )
    if len(sizes) != n_clusters:
        raise InvalidSpec("cluster_size list must have one entry per cluster")
    for label, size in enumerate(sizes, start=1):
        coords.append(centers[label - 1] + rng.uniform(-half_side, half_side, size=(size, dim)))
        labels.extend([label] * size)
    ps, labels = _finish(np.vstack(coords), labels, rng, shuffle)
    threshold = gap / 2.0
    report = separability_class(ps, threshold)
    expected = {
        frozenset(int(ps.ids[p]) for p in np.flatnonzero(np.asarray(labels) == lab))
        for lab in set(labels)
    }
    if report.kind != ADD or {frozenset(c) for c in report.components} != expected:
        raise InvalidSpec("generated instance failed its separability certificate")
    return ps, labels, threshold


def with_noise(ps, labels, fraction, seed=0, shuffle=True):
    """Blend uniform background noise (label 0) into a labeled set so that
    noise makes up `fraction` of the result; the box is padded 10% per side."""
    if not 0.0 < fraction < 1.0:
        raise InvalidSpec("noise fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    n_noise = round(len(ps) * fraction / (1.0 - fraction))
    lo = ps.coords.min(axis=0)
    hi = ps.coords.max(axis=0)
    pad = 0.1 * (hi - lo)
    noise = rng.uniform(lo - pad, hi + pad, size=(n_noise, ps.dim))
    coords = np.vstack([ps.coords, noise])
    all_labels = list(labels) + [0] * n_noise
    return _finish(coords, all_labels, rng, shuffle)


def _parse_kv(body):
    out = {}
    if not body:
        return out
    for item in body.split(","):
        if "=" not in item:
            raise InvalidSpec(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _num(params, key, cast, default=None):
    if key not in params:
        if default is None:
            raise InvalidSpec(f"generator spec is missing {key!r}")
        return default
    try:
        return cast(params[key])
    except (TypeError, ValueError):
        raise InvalidSpec(f"bad value for {key!r}: {params[key]!r}") from None


def generate_synthetic(spec, seed=0):
    """Build a labeled dataset from a spec.

    Dict form: {"kind": "blobs"|"rings"|"multi_density"|"add"|"noisy", ...},
    where "noisy" wraps a base spec: {"kind": "noisy", "base": {...},
    "fraction": 0.1}. String form: "blobs:k=2,n=300,d=2,sigma=0.05,sep=1"
    with an optional noise_frac=... on any kind. add_instance's threshold is
    dropped here; call add_instance directly when you need it.
    """
    if isinstance(spec, str):
        kind, _, body = spec.partition(":")
        params = _parse_kv(body)
        noise_frac = _num(params, "noise_frac", float, 0.0)
        params.pop("noise_frac", None)
        spec = {"kind": kind.strip(), **params}
        if noise_frac:
            spec = {"kind": "noisy", "base": spec, "fraction": noise_frac}
    kind = spec.get("kind")
    params = {k: v for k, v in spec.items() if k != "kind"}
    if kind == "blobs":
        return gaussian_blobs(
            _num(params, "k", int),
            _num(params, "n", int),
            _num(params, "d", int, 2),
            _num(params, "sigma", float),
            _num(params, "sep", float),
            seed=seed,
        )
    if kind == "rings":
        radii_raw = params.get("radii")
        if radii_raw is None:
            raise InvalidSpec("rings spec needs radii=r1+r2+...")
        radii = (
            [float(r) for r in str(radii_raw).split("+")]
            if not isinstance(radii_raw, (list, tuple))
            else [float(r) for r in radii_raw]
        )
        return rings(
            _num(params, "n", int),
            radii,
            _num(params, "noise", float),
            dim=_num(params, "d", int, 2),
            seed=seed,
        )
    if kind == "multi_density":
        return multi_density(
            _num(params, "n_dense", int),
            _num(params, "n_sparse", int),
            _num(params, "d", int, 2),
            _num(params, "sigma_dense", float),
            _num(params, "sigma_sparse", float),
            _num(params, "sep", float),
            seed=seed,
        )
    if kind == "add":
        ps, labels, _threshold = add_instance(
            _num(params, "k", int),
            _num(params, "size", int),
            _num(params, "d", int, 2),
            _num(params, "gap", float),
            seed=seed,
        )
        return ps, labels
    if kind == "noisy":
        base = params.get("base")
        if base is None:
            raise InvalidSpec("noisy spec needs a base spec")
        ps, labels = generate_synthetic(base, seed=seed)
        return with_noise(ps, labels, _num(params, "fraction", float), seed=seed + 1)
    raise InvalidSpec(f"unknown generator kind {kind!r}")
