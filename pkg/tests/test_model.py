"""Parser, grouping, and round-trip behavior of the trace model."""

from __future__ import annotations

import json

import pytest

from tracelens.model import (
    EmptyRequestSet,
    MalformedJson,
    ParseWarning,
    RequestSet,
    group_by_request_type,
    parse_trace_export,
    to_export_document,
)

from .conftest import make_export, make_span
from .oracles import tree_depth_oracle


def test_minimal_document_single_root_span():
    export = make_export([make_span("t1", "s1", "home", None, duration=500)])
    result = parse_trace_export(export)
    assert len(result.traces) == 1
    assert result.warnings == ()
    trace = result.traces[0]
    assert trace.e2e_latency_us == 500
    assert trace.root_span.operation_name == "home"
    assert trace.root_span.service_name == "svc"


def test_orphan_span_skips_trace_keeps_others():
    good = [make_span("t1", "s1", "home", None)]
    bad = [
        make_span("t2", "s1", "home", None),
        make_span("t2", "s2", "child", parent="missing"),
    ]
    result = parse_trace_export(make_export(good, bad))
    assert len(result.traces) == 1
    assert result.traces[0].trace_id == "t1"
    assert len(result.warnings) == 1
    warning = result.warnings[0]
    assert warning.kind == ParseWarning.ORPHAN_SPAN
    assert warning.trace_id == "t2"
    assert warning.span_id == "s2"


def test_three_span_chain_has_depth_three():
    spans = [
        make_span("t1", "s1", "root", None),
        make_span("t1", "s2", "a", parent="s1"),
        make_span("t1", "s3", "b", parent="s2"),
    ]
    result = parse_trace_export(make_export(spans))
    assert len(result.traces) == 1
    assert tree_depth_oracle(result.traces[0]) == 3


def test_multiple_roots_skipped_with_warning():
    spans = [
        make_span("t1", "s1", "home", None),
        make_span("t1", "s2", "other", None),
    ]
    result = parse_trace_export(make_export(spans))
    assert result.traces == ()
    assert result.warnings[0].kind == ParseWarning.MULTIPLE_ROOTS


def test_negative_duration_skipped_with_warning():
    spans = [make_span("t1", "s1", "home", None, duration=-5)]
    result = parse_trace_export(make_export(spans))
    assert result.traces == ()
    assert result.warnings[0].kind == ParseWarning.NEGATIVE_DURATION
    assert result.warnings[0].span_id == "s1"


def test_cycle_reported_as_orphan():
    spans = [
        make_span("t1", "s1", "home", None),
        make_span("t1", "s2", "a", parent="s3"),
        make_span("t1", "s3", "b", parent="s2"),
    ]
    result = parse_trace_export(make_export(spans))
    assert result.traces == ()
    assert result.warnings[0].kind == ParseWarning.ORPHAN_SPAN


def test_malformed_json_aborts_file():
    with pytest.raises(MalformedJson):
        parse_trace_export(b"{not json")
    with pytest.raises(MalformedJson):
        parse_trace_export(b'{"nodata": []}')


def test_tags_stringified():
    tags = [
        {"key": "http.status_code", "type": "int64", "value": 200},
        {"key": "sampled", "type": "bool", "value": True},
        {"key": "accept", "type": "string", "value": "gzip"},
    ]
    export = make_export([make_span("t1", "s1", "home", None, tags=tags)])
    span = parse_trace_export(export).traces[0].root_span
    assert span.tags == {
        "http.status_code": "200",
        "sampled": "true",
        "accept": "gzip",
    }


def test_service_name_resolved_through_processes():
    spans = [
        make_span("t1", "s1", "home", None, process="p1"),
        make_span("t1", "s2", "child", parent="s1", process="p2"),
    ]
    export = make_export(
        spans,
        processes={"p1": {"serviceName": "frontend"}, "p2": {"serviceName": "backend"}},
    )
    trace = parse_trace_export(export).traces[0]
    by_op = {s.operation_name: s for s in trace.spans}
    assert by_op["home"].service_name == "frontend"
    assert by_op["child"].service_name == "backend"


def test_roundtrip_preserves_traces(tiny_export):
    first = parse_trace_export(tiny_export)
    document = json.dumps(to_export_document(first.traces)).encode()
    second = parse_trace_export(document)
    assert second.warnings == ()
    assert second.traces == first.traces


def test_roundtrip_generated_corpus(bimodal_corpus):
    traces, _ = bimodal_corpus
    sample = traces[:25]
    reparsed = parse_trace_export(json.dumps(to_export_document(sample)).encode())
    assert reparsed.traces == tuple(sample)


def test_every_nonroot_span_has_resolvable_parent(bimodal_corpus):
    traces, _ = bimodal_corpus
    for trace in traces[:100]:
        ids = {s.span_id for s in trace.spans}
        for span in trace.spans:
            if span.span_id == trace.root:
                assert span.parent_id is None
            else:
                assert span.parent_id in ids


def test_group_by_request_type_partitions():
    exports = []
    for i in range(3):
        exports.append([make_span(f"h{i}", "s1", "homepage", None)])
    for i in range(2):
        exports.append([make_span(f"c{i}", "s1", "checkout", None)])
    traces = parse_trace_export(make_export(*exports)).traces
    groups = group_by_request_type(traces)
    assert set(groups) == {"homepage", "checkout"}
    assert len(groups["homepage"]) == 3
    assert len(groups["checkout"]) == 2


def test_group_by_request_type_empty():
    assert group_by_request_type([]) == {}


def test_group_sizes_sum_to_parsed_count():
    exports = []
    ops = ["a", "b", "c", "a", "b", "a", "a", "c", "b", "a"]
    for i, op in enumerate(ops):
        exports.append([make_span(f"t{i}", "s1", op, None)])
    traces = parse_trace_export(make_export(*exports)).traces
    groups = group_by_request_type(traces)
    assert sum(len(rs) for rs in groups.values()) == len(traces) == 10
    # brute-force recount per type
    for op in set(ops):
        assert len(groups[op]) == ops.count(op)


def test_request_set_rejects_empty_and_mixed_roots():
    with pytest.raises(EmptyRequestSet):
        RequestSet.from_traces([])
    t1 = parse_trace_export(make_export([make_span("t1", "s1", "a", None)])).traces[0]
    t2 = parse_trace_export(make_export([make_span("t2", "s1", "b", None)])).traces[0]
    with pytest.raises(ValueError):
        RequestSet(traces=(t1, t2), request_type="a")
