"""Aggregate RPC execution-path analysis for distributed trace exports."""

from .aggregate import (
    AggregatedTree,
    CallPath,
    PathCountMatrix,
    PathNode,
    build_tree,
    count_path_invocations,
    subset_by_count,
    subset_by_latency,
)
from .model import (
    ParseResult,
    RequestSet,
    Span,
    Trace,
    group_by_request_type,
    parse_trace_export,
)
from .stats import (
    ColorValue,
    DiscreteDistribution,
    Histogram,
    build_histogram,
    categorical_attribute_dispersion,
    coefficient_of_variation,
    cv_to_color,
    divergence_to_color,
    gini_index,
    highlight_counts,
    kl_divergence,
    recolor_tree,
    shannon_entropy,
)
from .store import Snapshot, preprocess, read_snapshot, write_snapshot

__version__ = "0.1.0"

__all__ = [
    "AggregatedTree",
    "CallPath",
    "ColorValue",
    "DiscreteDistribution",
    "Histogram",
    "ParseResult",
    "PathCountMatrix",
    "PathNode",
    "RequestSet",
    "Snapshot",
    "Span",
    "Trace",
    "build_histogram",
    "build_tree",
    "categorical_attribute_dispersion",
    "coefficient_of_variation",
    "count_path_invocations",
    "cv_to_color",
    "divergence_to_color",
    "gini_index",
    "group_by_request_type",
    "highlight_counts",
    "kl_divergence",
    "parse_trace_export",
    "preprocess",
    "read_snapshot",
    "recolor_tree",
    "shannon_entropy",
    "subset_by_count",
    "subset_by_latency",
    "write_snapshot",
]
