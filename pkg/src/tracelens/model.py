"""Domain model for distributed traces and the Jaeger-export JSON parser.

Traces arrive as files in the Jaeger HTTP API export shape (top-level
``data`` array, spans with CHILD_OF references, a ``processes`` map for
service names, microsecond timestamps). Parsing is pure; structurally
broken traces are skipped with warnings rather than failing the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping

# Span identifiers are opaque strings, unique within one trace.
SpanId = str


class MalformedJson(ValueError):
    """The export document is not parseable at all; ingest aborts for the file."""


class EmptyRequestSet(ValueError):
    """A request set must contain at least one trace."""


@dataclass(frozen=True)
class ParseWarning:
    """One skipped trace (or file) and why."""

    kind: str
    trace_id: str
    span_id: SpanId | None = None
    message: str = ""

    MULTIPLE_ROOTS = "multiple_roots"
    ORPHAN_SPAN = "orphan_span"
    NEGATIVE_DURATION = "negative_duration"
    NO_ROOT = "no_root"
    DUPLICATE_SPAN_ID = "duplicate_span_id"
    MALFORMED_TRACE = "malformed_trace"
    MALFORMED_FILE = "malformed_file"


@dataclass(frozen=True)
class Span:
    """One timed RPC within a trace.

    ``start_time`` and ``duration`` are integer microseconds; ``parent_id``
    is None exactly for the root RPC of the trace.
    """

    span_id: SpanId
    trace_id: str
    parent_id: SpanId | None
    operation_name: str
    service_name: str
    start_time: int
    duration: int
    tags: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Trace:
    """One end-to-end request: a tree of spans rooted at ``root``."""

    trace_id: str
    spans: tuple[Span, ...]
    root: SpanId

    @cached_property
    def span_index(self) -> dict[SpanId, Span]:
        return {s.span_id: s for s in self.spans}

    @cached_property
    def children_index(self) -> dict[SpanId, tuple[Span, ...]]:
        children: dict[SpanId, list[Span]] = {s.span_id: [] for s in self.spans}
        for s in self.spans:
            if s.parent_id is not None:
                children[s.parent_id].append(s)
        return {k: tuple(v) for k, v in children.items()}

    @property
    def root_span(self) -> Span:
        return self.span_index[self.root]

    @property
    def e2e_latency_us(self) -> int:
        """End-to-end response time: the duration of the root span."""
        return self.root_span.duration


@dataclass(frozen=True)
class RequestSet:
    """Traces of one request type (all roots share an operation name)."""

    traces: tuple[Trace, ...]
    request_type: str

    def __post_init__(self) -> None:
        if not self.traces:
            raise EmptyRequestSet("request set contains no traces")
        for t in self.traces:
            op = t.root_span.operation_name
            if op != self.request_type:
                raise ValueError(
                    f"trace {t.trace_id} is rooted at {op!r}, "
                    f"expected {self.request_type!r}"
                )

    @classmethod
    def from_traces(cls, traces: Iterable[Trace]) -> "RequestSet":
        traces = tuple(traces)
        if not traces:
            raise EmptyRequestSet("request set contains no traces")
        return cls(traces=traces, request_type=traces[0].root_span.operation_name)

    def __len__(self) -> int:
        return len(self.traces)


@dataclass(frozen=True)
class ParseResult:
    """Successfully parsed traces plus warnings for everything skipped."""

    traces: tuple[Trace, ...]
    warnings: tuple[ParseWarning, ...]


class _TraceStructureError(Exception):
    def __init__(self, kind: str, span_id: SpanId | None = None, message: str = ""):
        super().__init__(message)
        self.kind = kind
        self.span_id = span_id
        self.message = message


def _stringify_tag(value: Any) -> str:
    # Tag values are categorical downstream; normalize to JSON lexical forms.
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    return str(value)


def _convert_span(raw: Mapping[str, Any], processes: Mapping[str, Any]) -> Span:
    parent_id: SpanId | None = None
    for ref in raw.get("references", ()):
        if ref.get("refType") == "CHILD_OF":
            parent_id = ref["spanID"]
            break
    process = processes.get(raw.get("processID", ""), {})
    tags = {t["key"]: _stringify_tag(t.get("value")) for t in raw.get("tags", ())}
    return Span(
        span_id=raw["spanID"],
        trace_id=raw["traceID"],
        parent_id=parent_id,
        operation_name=raw["operationName"],
        service_name=process.get("serviceName", ""),
        start_time=int(raw["startTime"]),
        duration=int(raw["duration"]),
        tags=tags,
    )


def _validate_tree(trace_id: str, spans: tuple[Span, ...]) -> SpanId:
    """Check the span set forms a single tree and return the root span id."""
    seen: set[SpanId] = set()
    for s in spans:
        if s.span_id in seen:
            raise _TraceStructureError(
                ParseWarning.DUPLICATE_SPAN_ID, s.span_id, "duplicate span id"
            )
        seen.add(s.span_id)
        if s.duration < 0:
            raise _TraceStructureError(
                ParseWarning.NEGATIVE_DURATION, s.span_id, "negative duration"
            )
    roots = [s for s in spans if s.parent_id is None]
    if len(roots) > 1:
        raise _TraceStructureError(
            ParseWarning.MULTIPLE_ROOTS, None, f"{len(roots)} parentless spans"
        )
    if not roots:
        raise _TraceStructureError(ParseWarning.NO_ROOT, None, "no parentless span")
    for s in spans:
        if s.parent_id is not None and s.parent_id not in seen:
            raise _TraceStructureError(
                ParseWarning.ORPHAN_SPAN, s.span_id, "parent reference not found"
            )
    # Parents all resolve; anything unreachable from the root sits on a cycle
    # and never attaches to the tree.
    children: dict[SpanId, list[SpanId]] = {s.span_id: [] for s in spans}
    for s in spans:
        if s.parent_id is not None:
            children[s.parent_id].append(s.span_id)
    reachable: set[SpanId] = set()
    stack = [roots[0].span_id]
    while stack:
        sid = stack.pop()
        reachable.add(sid)
        stack.extend(children[sid])
    if len(reachable) != len(spans):
        orphan = next(s.span_id for s in spans if s.span_id not in reachable)
        raise _TraceStructureError(
            ParseWarning.ORPHAN_SPAN, orphan, "span not reachable from root"
        )
    return roots[0].span_id


def parse_trace_export(document: bytes | str) -> ParseResult:
    """Parse a Jaeger HTTP API export document into validated traces.

    Raises MalformedJson when the document itself is unparseable; individual
    traces that violate the tree structure are skipped with a warning.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise MalformedJson(str(e)) from e
    if not isinstance(doc, dict) or not isinstance(doc.get("data"), list):
        raise MalformedJson("missing top-level 'data' array")

    traces: list[Trace] = []
    warnings: list[ParseWarning] = []
    for entry in doc["data"]:
        trace_id = str(entry.get("traceID", "")) if isinstance(entry, dict) else ""
        try:
            processes = entry.get("processes", {})
            spans = tuple(_convert_span(raw, processes) for raw in entry["spans"])
            if not spans:
                raise _TraceStructureError(ParseWarning.NO_ROOT, None, "no spans")
            root = _validate_tree(trace_id, spans)
        except _TraceStructureError as e:
            warnings.append(ParseWarning(e.kind, trace_id, e.span_id, e.message))
            continue
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            warnings.append(
                ParseWarning(ParseWarning.MALFORMED_TRACE, trace_id, None, str(e))
            )
            continue
        traces.append(Trace(trace_id=trace_id, spans=spans, root=root))
    return ParseResult(traces=tuple(traces), warnings=tuple(warnings))


def to_export_document(traces: Iterable[Trace]) -> dict[str, Any]:
    """Serialize traces back to the Jaeger export shape (parse round-trips)."""
    data = []
    for trace in traces:
        process_ids: dict[str, str] = {}
        raw_spans = []
        for s in trace.spans:
            pid = process_ids.setdefault(s.service_name, f"p{len(process_ids) + 1}")
            references = []
            if s.parent_id is not None:
                references.append(
                    {"refType": "CHILD_OF", "traceID": trace.trace_id, "spanID": s.parent_id}
                )
            raw_spans.append(
                {
                    "traceID": trace.trace_id,
                    "spanID": s.span_id,
                    "operationName": s.operation_name,
                    "references": references,
                    "startTime": s.start_time,
                    "duration": s.duration,
                    "processID": pid,
                    "tags": [
                        {"key": k, "type": "string", "value": v}
                        for k, v in s.tags.items()
                    ],
                }
            )
        data.append(
            {
                "traceID": trace.trace_id,
                "spans": raw_spans,
                "processes": {
                    pid: {"serviceName": name} for name, pid in process_ids.items()
                },
            }
        )
    return {"data": data}


def group_by_request_type(traces: Iterable[Trace]) -> dict[str, RequestSet]:
    """Partition traces by root operation name (empty input gives an empty map)."""
    groups: dict[str, list[Trace]] = {}
    for t in traces:
        groups.setdefault(t.root_span.operation_name, []).append(t)
    return {
        rt: RequestSet(traces=tuple(groups[rt]), request_type=rt)
        for rt in sorted(groups)
    }
