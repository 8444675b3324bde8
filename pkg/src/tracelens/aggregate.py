"""Aggregated RPC execution-path tree and per-trace path-count matrix.

A call path is the operation-name sequence from the root RPC down to a
given RPC; it is the identity of a tree node. Repeated invocations of the
same child RPC collapse into a single child node, with the multiplicity
kept per trace in the node's invocation-count distribution.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator
from urllib.parse import quote, unquote

import numpy as np

from .model import EmptyRequestSet, RequestSet, Span, Trace


class UnknownPath(KeyError):
    """The requested call path is not a column of the matrix / node of the tree."""


class InvalidRange(ValueError):
    """Latency range with lo > hi."""


@dataclass(frozen=True)
class CallPath:
    """Operation-name sequence from the root RPC to one RPC (root first)."""

    segments: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("call path must have at least one segment")

    @classmethod
    def of(cls, *segments: str) -> "CallPath":
        return cls(tuple(segments))

    def child(self, operation_name: str) -> "CallPath":
        return CallPath(self.segments + (operation_name,))

    @property
    def parent(self) -> "CallPath | None":
        if len(self.segments) == 1:
            return None
        return CallPath(self.segments[:-1])

    @property
    def leaf(self) -> str:
        return self.segments[-1]

    @property
    def depth(self) -> int:
        return len(self.segments)

    def encode(self) -> str:
        """Wire form: '/'-joined percent-escaped segments."""
        return "/".join(quote(seg, safe="") for seg in self.segments)

    @classmethod
    def decode(cls, encoded: str) -> "CallPath":
        return cls(tuple(unquote(part) for part in encoded.split("/")))

    def __str__(self) -> str:
        return self.encode()


@dataclass
class PathNode:
    """Statistics for one call path over a request set.

    count_distribution maps invocations-per-trace to the number of traces
    with that count (zero included: traces without the path are a count
    class of their own). duration_samples hold, per trace containing the
    path, the summed duration of its invocations in that trace.
    tag_value_counts aggregates span tag values over all invocations,
    per tag key, so categorical dispersion is answerable from a snapshot.
    """

    path: CallPath
    children: dict[str, "PathNode"] = field(default_factory=dict)
    count_distribution: dict[int, int] = field(default_factory=dict)
    duration_samples: list[tuple[str, int]] = field(default_factory=list)
    tag_value_counts: dict[str, dict[str, int]] = field(default_factory=dict)

    def sorted_children(self) -> list["PathNode"]:
        return [self.children[name] for name in sorted(self.children)]

    def subtree_size(self) -> int:
        return 1 + sum(c.subtree_size() for c in self.children.values())

    @property
    def total_invocations(self) -> int:
        """Invocations across the whole request set: sum over k of k * traces."""
        return sum(k * n for k, n in self.count_distribution.items())


@dataclass
class AggregatedTree:
    """Execution-path tree over a request set, indexed by call path."""

    root: PathNode
    n_traces: int
    index: dict[CallPath, PathNode]

    def nodes_depth_first(self) -> Iterator[PathNode]:
        """Preorder walk with lexicographic child order (parents first)."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.sorted_children()))

    def node(self, path: CallPath) -> PathNode:
        try:
            return self.index[path]
        except KeyError:
            raise UnknownPath(path.encode()) from None


@dataclass(eq=False)
class PathCountMatrix:
    """Per-trace invocation counts for every call path, stored columnar.

    Logically one row per trace (trace_id, e2e latency, counts aligned with
    ``paths``); physically ``counts[j]`` is the contiguous array of path j's
    counts across traces, which is the access pattern of every query.
    """

    paths: tuple[CallPath, ...]
    trace_ids: tuple[str, ...]
    latencies_us: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.latencies_us = np.asarray(self.latencies_us, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (len(self.paths), len(self.trace_ids)):
            raise ValueError(
                f"counts shape {self.counts.shape} does not match "
                f"{len(self.paths)} paths x {len(self.trace_ids)} traces"
            )
        if self.latencies_us.shape != (len(self.trace_ids),):
            raise ValueError("one latency per trace required")
        self._path_index = {p: j for j, p in enumerate(self.paths)}

    @property
    def n_traces(self) -> int:
        return len(self.trace_ids)

    def path_position(self, path: CallPath) -> int:
        try:
            return self._path_index[path]
        except KeyError:
            raise UnknownPath(path.encode()) from None

    def counts_for(self, path: CallPath) -> np.ndarray:
        return self.counts[self.path_position(path)]


def _walk_paths(trace: Trace) -> Iterator[tuple[CallPath, Span]]:
    """Yield (call path, span) for every span, root first."""
    root = trace.root_span
    stack = [(CallPath.of(root.operation_name), root)]
    while stack:
        path, span = stack.pop()
        yield path, span
        for child in trace.children_index[span.span_id]:
            stack.append((path.child(child.operation_name), child))


def count_path_invocations(trace: Trace) -> dict[CallPath, int]:
    """Number of spans per call path within one trace (always >= 1 per key)."""
    counts: Counter[CallPath] = Counter()
    for path, _ in _walk_paths(trace):
        counts[path] += 1
    return dict(counts)


def _trace_path_stats(
    trace: Trace,
) -> tuple[dict[CallPath, int], dict[CallPath, int], dict[CallPath, dict[str, dict[str, int]]]]:
    """One walk collecting per-path counts, summed durations, and tag values."""
    counts: dict[CallPath, int] = {}
    durations: dict[CallPath, int] = {}
    tag_values: dict[CallPath, dict[str, dict[str, int]]] = {}
    for path, span in _walk_paths(trace):
        counts[path] = counts.get(path, 0) + 1
        durations[path] = durations.get(path, 0) + span.duration
        if span.tags:
            per_key = tag_values.setdefault(path, {})
            for key, value in span.tags.items():
                per_value = per_key.setdefault(key, {})
                per_value[value] = per_value.get(value, 0) + 1
    return counts, durations, tag_values


def build_tree(requests: RequestSet) -> tuple[AggregatedTree, PathCountMatrix]:
    """Aggregate a request set into the path tree and the count matrix.

    Every path present in at least one trace becomes a node; every trace
    contributes exactly one count per path (possibly zero). Matrix columns
    are the union paths in depth-first order with lexicographic children,
    so two builds of the same request set are identical.
    """
    if not requests.traces:
        raise EmptyRequestSet("cannot aggregate an empty request set")
    n_traces = len(requests.traces)

    per_trace: list[dict[CallPath, int]] = []
    nodes: dict[CallPath, PathNode] = {}
    for trace in requests.traces:
        counts, durations, tag_values = _trace_path_stats(trace)
        per_trace.append(counts)
        for path, count in counts.items():
            node = nodes.get(path)
            if node is None:
                node = nodes[path] = PathNode(path=path)
            node.duration_samples.append((trace.trace_id, durations[path]))
        for path, per_key in tag_values.items():
            node_tags = nodes[path].tag_value_counts
            for key, per_value in per_key.items():
                acc = node_tags.setdefault(key, {})
                for value, c in per_value.items():
                    acc[value] = acc.get(value, 0) + c

    # Every non-root path's parent is itself a walked path, so the parent
    # node always exists; wire up children.
    root = nodes[CallPath.of(requests.request_type)]
    for path, node in nodes.items():
        parent = path.parent
        if parent is not None:
            nodes[parent].children[path.leaf] = node

    tree = AggregatedTree(root=root, n_traces=n_traces, index=nodes)
    ordered_paths = tuple(node.path for node in tree.nodes_depth_first())

    counts = np.zeros((len(ordered_paths), n_traces), dtype=np.int64)
    position = {p: j for j, p in enumerate(ordered_paths)}
    for t, trace_counts in enumerate(per_trace):
        for path, c in trace_counts.items():
            counts[position[path], t] = c
    for j, path in enumerate(ordered_paths):
        distribution = Counter(counts[j].tolist())
        nodes[path].count_distribution = dict(sorted(distribution.items()))

    latencies = np.fromiter(
        (t.e2e_latency_us for t in requests.traces), dtype=np.int64, count=n_traces
    )
    matrix = PathCountMatrix(
        paths=ordered_paths,
        trace_ids=tuple(t.trace_id for t in requests.traces),
        latencies_us=latencies,
        counts=counts,
    )
    return tree, matrix


def subset_by_count(
    matrix: PathCountMatrix, path: CallPath, count: int
) -> list[str]:
    """Trace ids whose invocation count for ``path`` equals ``count`` exactly."""
    row = matrix.counts_for(path)
    return [matrix.trace_ids[i] for i in np.flatnonzero(row == count)]


def subset_by_latency(matrix: PathCountMatrix, lo_us: int, hi_us: int) -> list[str]:
    """Trace ids with end-to-end latency in the closed interval [lo_us, hi_us]."""
    if lo_us > hi_us:
        raise InvalidRange(f"lo {lo_us} > hi {hi_us}")
    mask = (matrix.latencies_us >= lo_us) & (matrix.latencies_us <= hi_us)
    return [matrix.trace_ids[i] for i in np.flatnonzero(mask)]


def verify_tree_matrix_consistency(
    tree: AggregatedTree, matrix: PathCountMatrix
) -> None:
    """Re-check the aggregation invariants (raises ValueError on violation)."""
    if matrix.n_traces != tree.n_traces:
        raise ValueError("matrix row count differs from tree n_traces")
    if set(matrix.paths) != set(tree.index):
        raise ValueError("matrix columns differ from tree paths")
    for path in matrix.paths:
        node = tree.index[path]
        dist = node.count_distribution
        if sum(dist.values()) != tree.n_traces:
            raise ValueError(f"count distribution of {path} does not cover all traces")
        column = matrix.counts_for(path)
        if sum(k * n for k, n in dist.items()) != int(column.sum()):
            raise ValueError(f"tree/matrix invocation totals differ for {path}")
        if not any(k > 0 for k, n in dist.items() if n > 0):
            raise ValueError(f"path {path} occurs in no trace")
