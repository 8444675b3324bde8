"""Persisted preprocessed form: one .tlsnap snapshot per request type.

Container layout (version 1):

    bytes 0..5   magic b"TLSNAP"
    bytes 6..7   format_version, big-endian uint16
    bytes 8..    gzip-compressed UTF-8 JSON payload

The payload holds the aggregated tree (nodes in depth-first order, children
recoverable from the paths) and the count matrix in columnar form (one
count array per path). Writes are atomic (temp file + rename), and reads
re-check the tree/matrix consistency invariant, so a loaded snapshot never
requires the raw trace files again.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .aggregate import (
    AggregatedTree,
    CallPath,
    PathCountMatrix,
    PathNode,
    build_tree,
    verify_tree_matrix_consistency,
)
from .model import (
    MalformedJson,
    ParseWarning,
    group_by_request_type,
    parse_trace_export,
)

MAGIC = b"TLSNAP"
FORMAT_VERSION = 1
SNAPSHOT_SUFFIX = ".tlsnap"


class IoFailure(OSError):
    """Snapshot could not be written; the destination is left unchanged."""


class UnknownVersion(ValueError):
    """Snapshot file declares a format_version this build does not read."""


class CorruptSnapshot(ValueError):
    """Snapshot file is truncated, unparseable, or internally inconsistent."""


class NoMatchingTraces(ValueError):
    """Preprocessing found no traces (or none of the requested type)."""


@dataclass(eq=False)
class Snapshot:
    """One request type's aggregated tree + count matrix, ready to serve."""

    format_version: int
    request_type: str
    created_at: str
    source_digest: str
    tree: AggregatedTree
    matrix: PathCountMatrix

    @property
    def n_traces(self) -> int:
        return self.matrix.n_traces


@dataclass
class PreprocessResult:
    """Snapshots plus the ingest report (accepted/skipped, parse warnings)."""

    snapshots: list[Snapshot]
    warnings: list[ParseWarning]
    traces_accepted: int
    traces_skipped: int


def _tree_to_payload(tree: AggregatedTree) -> list[dict[str, Any]]:
    nodes = []
    for node in tree.nodes_depth_first():
        nodes.append(
            {
                "path": list(node.path.segments),
                "count_distribution": {str(k): v for k, v in node.count_distribution.items()},
                "duration_samples": [[tid, d] for tid, d in node.duration_samples],
                "tag_value_counts": node.tag_value_counts,
            }
        )
    return nodes


def _tree_from_payload(nodes: Sequence[dict[str, Any]], n_traces: int) -> AggregatedTree:
    index: dict[CallPath, PathNode] = {}
    root: PathNode | None = None
    for raw in nodes:
        path = CallPath(tuple(raw["path"]))
        node = PathNode(
            path=path,
            count_distribution={int(k): int(v) for k, v in raw["count_distribution"].items()},
            duration_samples=[(tid, int(d)) for tid, d in raw["duration_samples"]],
            tag_value_counts={
                key: {v: int(c) for v, c in per_value.items()}
                for key, per_value in raw.get("tag_value_counts", {}).items()
            },
        )
        index[path] = node
        parent = path.parent
        if parent is None:
            if root is not None:
                raise CorruptSnapshot("multiple root paths in tree payload")
            root = node
        else:
            if parent not in index:
                raise CorruptSnapshot(f"node {path.encode()} appears before its parent")
            index[parent].children[path.leaf] = node
    if root is None:
        raise CorruptSnapshot("tree payload has no root")
    return AggregatedTree(root=root, n_traces=n_traces, index=index)


def _snapshot_to_payload(snapshot: Snapshot) -> dict[str, Any]:
    matrix = snapshot.matrix
    return {
        "format_version": snapshot.format_version,
        "request_type": snapshot.request_type,
        "created_at": snapshot.created_at,
        "source_digest": snapshot.source_digest,
        "n_traces": matrix.n_traces,
        "tree": _tree_to_payload(snapshot.tree),
        "matrix": {
            "paths": [list(p.segments) for p in matrix.paths],
            "trace_ids": list(matrix.trace_ids),
            "latencies_us": matrix.latencies_us.tolist(),
            "counts": matrix.counts.tolist(),
        },
    }


def _snapshot_from_payload(payload: dict[str, Any], version: int) -> Snapshot:
    raw_matrix = payload["matrix"]
    matrix = PathCountMatrix(
        paths=tuple(CallPath(tuple(p)) for p in raw_matrix["paths"]),
        trace_ids=tuple(raw_matrix["trace_ids"]),
        latencies_us=np.asarray(raw_matrix["latencies_us"], dtype=np.int64),
        counts=np.asarray(raw_matrix["counts"], dtype=np.int64),
    )
    tree = _tree_from_payload(payload["tree"], int(payload["n_traces"]))
    return Snapshot(
        format_version=version,
        request_type=payload["request_type"],
        created_at=payload["created_at"],
        source_digest=payload["source_digest"],
        tree=tree,
        matrix=matrix,
    )


def write_snapshot(snapshot: Snapshot, destination: str | Path) -> None:
    """Atomically persist a snapshot (temp file + rename, re-readable byte-identically)."""
    destination = Path(destination)
    payload = json.dumps(
        _snapshot_to_payload(snapshot), separators=(",", ":"), sort_keys=True
    ).encode("utf-8")
    header = MAGIC + snapshot.format_version.to_bytes(2, "big")
    # mtime=0 keeps gzip output independent of the wall clock.
    body = gzip.compress(payload, mtime=0)
    tmp_path = None
    try:
        fd, tmp_path = tempfile.mkstemp(
            dir=destination.parent, prefix=destination.name, suffix=".tmp"
        )
        with os.fdopen(fd, "wb") as f:
            f.write(header)
            f.write(body)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, destination)
        tmp_path = None
    except OSError as e:
        raise IoFailure(f"cannot write snapshot {destination}: {e}") from e
    finally:
        if tmp_path is not None:
            try:
                os.unlink(tmp_path)
            except OSError:
                pass


def read_snapshot(source: str | Path) -> Snapshot:
    """Load and validate a snapshot; consistency is re-checked on every load."""
    raw = Path(source).read_bytes()
    if len(raw) < len(MAGIC) + 2 or raw[: len(MAGIC)] != MAGIC:
        raise CorruptSnapshot(f"{source}: not a snapshot file")
    version = int.from_bytes(raw[len(MAGIC) : len(MAGIC) + 2], "big")
    if version < 1 or version > FORMAT_VERSION:
        raise UnknownVersion(f"{source}: format_version {version} not supported")
    try:
        payload = json.loads(gzip.decompress(raw[len(MAGIC) + 2 :]))
        snapshot = _snapshot_from_payload(payload, version)
    except (OSError, EOFError, ValueError, KeyError, TypeError) as e:
        if isinstance(e, CorruptSnapshot):
            raise
        raise CorruptSnapshot(f"{source}: {e}") from e
    try:
        verify_tree_matrix_consistency(snapshot.tree, snapshot.matrix)
    except ValueError as e:
        raise CorruptSnapshot(f"{source}: {e}") from e
    return snapshot


def source_digest(files: Iterable[str | Path]) -> str:
    """Order-independent content hash of the ingested files."""
    per_file = sorted(
        hashlib.sha256(Path(f).read_bytes()).hexdigest() for f in files
    )
    return hashlib.sha256("\n".join(per_file).encode("ascii")).hexdigest()


def default_created_at() -> str:
    """Current UTC time, or SOURCE_DATE_EPOCH when set (reproducible builds)."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def preprocess(
    input_files: Sequence[str | Path],
    request_type: str | None = None,
    created_at: str | None = None,
) -> PreprocessResult:
    """Parse exports, group by request type, and aggregate one snapshot per group."""
    traces = []
    warnings: list[ParseWarning] = []
    for path in input_files:
        path = Path(path)
        try:
            result = parse_trace_export(path.read_bytes())
        except MalformedJson as e:
            warnings.append(
                ParseWarning(ParseWarning.MALFORMED_FILE, "", None, f"{path}: {e}")
            )
            continue
        traces.extend(result.traces)
        warnings.extend(result.warnings)

    groups = group_by_request_type(traces)
    if request_type is not None:
        groups = {rt: rs for rt, rs in groups.items() if rt == request_type}
    if not groups:
        raise NoMatchingTraces(
            f"no traces of type {request_type!r}" if request_type else "no traces parsed"
        )

    digest = source_digest(input_files)
    stamp = created_at if created_at is not None else default_created_at()
    snapshots = []
    for rt, request_set in groups.items():
        tree, matrix = build_tree(request_set)
        snapshots.append(
            Snapshot(
                format_version=FORMAT_VERSION,
                request_type=rt,
                created_at=stamp,
                source_digest=digest,
                tree=tree,
                matrix=matrix,
            )
        )
    accepted = sum(s.n_traces for s in snapshots)
    return PreprocessResult(
        snapshots=snapshots,
        warnings=warnings,
        traces_accepted=accepted,
        traces_skipped=len(warnings),
    )
