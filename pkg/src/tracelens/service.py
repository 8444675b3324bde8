"""HTTP query API the dashboard consumes.

All endpoints are pure reads over immutable snapshots: identical queries
against the same snapshot return identical JSON, and responses carry an
ETag derived from the snapshot's source digest. Errors use a JSON shape
{code, message} with machine-readable codes.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .aggregate import (
    CallPath,
    InvalidRange,
    subset_by_count,
    subset_by_latency,
)
from .stats import (
    DegenerateSelection,
    DiscreteDistribution,
    ZeroMean,
    build_histogram,
    categorical_counts_from_node,
    coefficient_of_variation,
    cv_to_color,
    gini_index,
    highlight_counts,
    recolor_tree,
    shannon_entropy,
)
from .store import SNAPSHOT_SUFFIX, Snapshot, read_snapshot

API_PREFIX = "/api/v1"
METRICS = ("cv_invocations", "cv_duration")


class ApiError(Exception):
    """Maps to a {code, message} JSON error response."""

    def __init__(self, status_code: int, code: str, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


class SnapshotRepository:
    """Loads every .tlsnap in a directory; reload swaps the map atomically."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._snapshots: dict[str, Snapshot] = {}
        self.reload()

    def reload(self) -> None:
        loaded: dict[str, Snapshot] = {}
        for path in sorted(self.directory.glob(f"*{SNAPSHOT_SUFFIX}")):
            snapshot = read_snapshot(path)
            loaded[snapshot.request_type] = snapshot
        self._snapshots = loaded

    def request_types(self) -> list[Snapshot]:
        snapshots = self._snapshots
        return [snapshots[rt] for rt in sorted(snapshots)]

    def get(self, request_type: str) -> Snapshot:
        try:
            return self._snapshots[request_type]
        except KeyError:
            raise ApiError(
                404, "UnknownType", f"no snapshot for request type {request_type!r}"
            ) from None


def _decode_path(raw: str) -> CallPath:
    return CallPath.decode(raw)


def _tree_view(snapshot: Snapshot, intensities: dict[CallPath, float], metric: str) -> dict:
    nodes = []
    for node in snapshot.tree.nodes_depth_first():
        parent = node.path.parent
        nodes.append(
            {
                "path": node.path.encode(),
                "label": node.path.leaf,
                "parent": parent.encode() if parent is not None else None,
                "intensity": intensities[node.path],
                "subtree_size": node.subtree_size(),
            }
        )
    return {
        "request_type": snapshot.request_type,
        "metric": metric,
        "n_traces": snapshot.n_traces,
        "nodes": nodes,
    }


def _invocation_cv(snapshot: Snapshot, path: CallPath) -> float:
    return coefficient_of_variation(snapshot.matrix.counts_for(path))


def _duration_cv(snapshot: Snapshot, path: CallPath) -> float:
    samples = [d for _, d in snapshot.tree.node(path).duration_samples]
    try:
        return coefficient_of_variation(samples)
    except ZeroMean:
        # All-zero durations carry no dispersion; render white.
        return 0.0


def _histogram_payload(hist) -> dict:
    return {
        "bin_edges": list(hist.bin_edges),
        "counts": list(hist.counts),
        "bin_rule": hist.bin_rule,
    }


def _node_detail(snapshot: Snapshot, path: CallPath) -> dict:
    node = snapshot.tree.node(path)
    n = snapshot.n_traces
    distribution = [
        {"count": k, "n_traces": c, "fraction": c / n}
        for k, c in sorted(node.count_distribution.items())
    ]
    durations = np.asarray([d for _, d in node.duration_samples], dtype=np.float64)
    summary = {
        "min_us": float(durations.min()),
        "p50_us": float(np.percentile(durations, 50)),
        "p95_us": float(np.percentile(durations, 95)),
        "max_us": float(durations.max()),
    }
    return {
        "path": path.encode(),
        "count_distribution": distribution,
        "duration_summary": summary,
    }


def create_app(snapshot_dir: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="tracelens", docs_url=None, redoc_url=None)
    repository = SnapshotRepository(snapshot_dir)
    app.state.repository = repository

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status_code,
            content={"code": exc.code, "message": exc.message},
        )

    def _snapshot(request_type: str, response: Response) -> Snapshot:
        snapshot = repository.get(request_type)
        response.headers["ETag"] = f'"{snapshot.source_digest}"'
        return snapshot

    def _path_of(snapshot: Snapshot, raw_path: str) -> CallPath:
        path = _decode_path(raw_path)
        if path not in snapshot.tree.index:
            raise ApiError(404, "UnknownPath", f"no node for path {raw_path!r}")
        return path

    @app.get(f"{API_PREFIX}/health")
    def health() -> dict:
        return {
            "status": "ok",
            "request_types": [s.request_type for s in repository.request_types()],
        }

    @app.get(f"{API_PREFIX}/request-types")
    def request_types() -> list[dict]:
        return [
            {"request_type": s.request_type, "n_traces": s.n_traces}
            for s in repository.request_types()
        ]

    @app.get(f"{API_PREFIX}/{{request_type}}/tree")
    def tree(request_type: str, response: Response, metric: str = "cv_invocations") -> dict:
        snapshot = _snapshot(request_type, response)
        if metric not in METRICS:
            raise ApiError(400, "UnknownMetric", f"metric must be one of {METRICS}")
        cv_of = _invocation_cv if metric == "cv_invocations" else _duration_cv
        intensities = {
            path: cv_to_color(cv_of(snapshot, path)).intensity
            for path in snapshot.matrix.paths
        }
        return _tree_view(snapshot, intensities, metric)

    @app.get(f"{API_PREFIX}/{{request_type}}/histogram")
    def histogram(request_type: str, response: Response, bins: int | None = None) -> dict:
        snapshot = _snapshot(request_type, response)
        if bins is not None and bins < 1:
            raise ApiError(400, "InvalidBins", "bins must be >= 1")
        hist = build_histogram(snapshot.matrix.latencies_us, bins=bins)
        return _histogram_payload(hist)

    @app.get(f"{API_PREFIX}/{{request_type}}/node")
    def node_detail(request_type: str, path: str, response: Response) -> dict:
        snapshot = _snapshot(request_type, response)
        return _node_detail(snapshot, _path_of(snapshot, path))

    @app.get(f"{API_PREFIX}/{{request_type}}/highlight")
    def highlight(
        request_type: str,
        path: str,
        count: int,
        response: Response,
        bins: int | None = None,
    ) -> dict:
        snapshot = _snapshot(request_type, response)
        call_path = _path_of(snapshot, path)
        if count < 0:
            raise ApiError(400, "InvalidCount", "count must be >= 0")
        if bins is not None and bins < 1:
            raise ApiError(400, "InvalidBins", "bins must be >= 1")
        matrix = snapshot.matrix
        hist = build_histogram(matrix.latencies_us, bins=bins)
        selected = set(subset_by_count(matrix, call_path, count))
        subset_latencies = [
            int(matrix.latencies_us[i])
            for i, tid in enumerate(matrix.trace_ids)
            if tid in selected
        ]
        return {
            "path": call_path.encode(),
            "count": count,
            "n_selected": len(subset_latencies),
            "histogram": _histogram_payload(hist),
            "highlighted": highlight_counts(hist, subset_latencies),
        }

    @app.get(f"{API_PREFIX}/{{request_type}}/recolor")
    def recolor(
        request_type: str,
        lo: int,
        hi: int,
        response: Response,
        alpha: float = 0.5,
        dmax: float = 1.0,
    ) -> dict:
        snapshot = _snapshot(request_type, response)
        if alpha <= 0:
            raise ApiError(400, "InvalidAlpha", "alpha must be > 0")
        if dmax <= 0:
            raise ApiError(400, "InvalidDmax", "dmax must be > 0")
        try:
            selection = subset_by_latency(snapshot.matrix, lo, hi)
            colors = recolor_tree(snapshot.matrix, selection, alpha=alpha, d_max=dmax)
        except InvalidRange as e:
            raise ApiError(400, "InvalidRange", str(e)) from None
        except DegenerateSelection as e:
            raise ApiError(400, "DegenerateSelection", str(e)) from None
        intensities = {path: color.intensity for path, color in colors.items()}
        view = _tree_view(snapshot, intensities, "kl_divergence")
        view["selection"] = {"lo_us": lo, "hi_us": hi, "n_selected": len(selection)}
        return view

    @app.get(f"{API_PREFIX}/{{request_type}}/attribute")
    def attribute(
        request_type: str, path: str, tag: str, response: Response, metric: str = "gini"
    ) -> dict:
        snapshot = _snapshot(request_type, response)
        call_path = _path_of(snapshot, path)
        if metric not in ("gini", "entropy"):
            raise ApiError(400, "UnknownMetric", "metric must be 'gini' or 'entropy'")
        counts = categorical_counts_from_node(snapshot.tree.node(call_path), tag)
        dist = DiscreteDistribution.from_counts(counts)
        value = gini_index(dist) if metric == "gini" else shannon_entropy(dist)
        total = sum(counts.values())
        return {
            "path": call_path.encode(),
            "tag": tag,
            "metric": metric,
            "value": value,
            "distribution": [
                {"category": c, "count": counts[c], "fraction": counts[c] / total}
                for c in sorted(counts)
            ],
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")

    return app
