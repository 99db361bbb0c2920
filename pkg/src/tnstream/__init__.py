"""Fully online data-stream clustering built on mutual k-nearest-neighbor
(tightest-neighbor) graphs over adaptive-radius micro-clusters."""

from .errors import TnStreamError
from .metrics import ari, contingency, nmi, purity, scores
from .points import PointSet
from .runner import ReplayResult, replay_stream, run_benchmark
from .snn_radius import SnnParams, adaptive_radius, snn_count
from .spatial_index import (
    IndexBackend,
    LshParams,
    Neighbor,
    build_index,
    knn_query,
    range_query,
    srp_signature,
)
from .stream_engine import StreamConfig, StreamPoint, StreamSnapshot, TnStreamEngine
from .tn_graph import (
    Clustering,
    SeparabilityReport,
    TnGraph,
    TnofReport,
    closure,
    detect_outliers,
    is_prototype_point,
    ktnc,
    mtncis,
    separability_class,
    smallest_recovering_k,
    tightest_neighbors,
    tn_graph,
    tnof_scores,
    verify_skeleton_set,
    verify_theorem2,
)

__version__ = "0.1.0"

__all__ = [
    "Clustering",
    "IndexBackend",
    "LshParams",
    "Neighbor",
    "PointSet",
    "ReplayResult",
    "SeparabilityReport",
    "SnnParams",
    "StreamConfig",
    "StreamPoint",
    "StreamSnapshot",
    "TnGraph",
    "TnStreamEngine",
    "TnStreamError",
    "TnofReport",
    "adaptive_radius",
    "ari",
    "build_index",
    "closure",
    "contingency",
    "detect_outliers",
    "is_prototype_point",
    "knn_query",
    "ktnc",
    "mtncis",
    "nmi",
    "purity",
    "range_query",
    "replay_stream",
    "run_benchmark",
    "scores",
    "separability_class",
    "smallest_recovering_k",
    "snn_count",
    "srp_signature",
    "tightest_neighbors",
    "tn_graph",
    "tnof_scores",
    "verify_skeleton_set",
    "verify_theorem2",
]
