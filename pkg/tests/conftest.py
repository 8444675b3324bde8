"""Shared fixtures: hand-built exports and generated corpora."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from tracelens.aggregate import build_tree
from tracelens.generator import generate_corpus, parse_generator_spec
from tracelens.model import group_by_request_type, parse_trace_export

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_FILE = REPO_ROOT / "scenarios" / "trainticket_bimodal.json"


def make_span(
    trace_id: str,
    span_id: str,
    operation: str,
    parent: str | None = None,
    start: int = 0,
    duration: int = 100,
    process: str = "p1",
    tags: list[dict] | None = None,
) -> dict:
    references = []
    if parent is not None:
        references.append({"refType": "CHILD_OF", "traceID": trace_id, "spanID": parent})
    return {
        "traceID": trace_id,
        "spanID": span_id,
        "operationName": operation,
        "references": references,
        "startTime": start,
        "duration": duration,
        "processID": process,
        "tags": tags or [],
    }


def make_export(*traces: list[dict], processes: dict | None = None) -> bytes:
    processes = processes or {"p1": {"serviceName": "svc"}}
    data = [
        {"traceID": spans[0]["traceID"], "spans": spans, "processes": processes}
        for spans in traces
    ]
    return json.dumps({"data": data}).encode("utf-8")


# The canonical bimodal scenario: a TrainTicket-shaped tree where the
# route-lookup path occurs in ~23% of traces and shifts them into a slow
# mode far to the right of the base mode. Base e2e spread is ~2.7 ms and
# the injected delta is 400 ms, far beyond the 6-sigma separation the
# scenario calls for, so the modes never touch.
BIMODAL_SPEC = json.loads(SCENARIO_FILE.read_text())

MODE_PATH = ("getbycheapest", "getleftticket", "getcheapestroute")


@pytest.fixture(scope="session")
def bimodal_corpus():
    spec = parse_generator_spec(json.dumps(BIMODAL_SPEC))
    traces, labels = generate_corpus(spec)
    return traces, labels


@pytest.fixture(scope="session")
def bimodal_request_set(bimodal_corpus):
    traces, _ = bimodal_corpus
    return group_by_request_type(traces)["getbycheapest"]


@pytest.fixture(scope="session")
def bimodal_tree_matrix(bimodal_request_set):
    return build_tree(bimodal_request_set)


@pytest.fixture()
def tiny_export() -> bytes:
    """root -> a -> b chain plus a sibling 'a' under root (repeated child)."""
    spans = [
        make_span("t1", "s1", "home", None, start=0, duration=500),
        make_span("t1", "s2", "getUser", "s1", start=10, duration=100),
        make_span("t1", "s3", "getUser", "s1", start=120, duration=150),
        make_span("t1", "s4", "query", "s2", start=20, duration=50),
    ]
    return make_export(spans)
