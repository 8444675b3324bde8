"""Synthetic trace generator with injectable latency/path modes.

A generator spec is a JSON document describing one request type's call
tree (operations, branching probabilities, per-call latency models) plus a
list of mode injections: with a given probability a trace receives extra
invocations of a target call path and a latency delta, which shifts its
end-to-end response time into a separate mode of the distribution.

Generation is deterministic per (seed, trace index): every trace draws
from its own sub-seeded RNG, so corpora are byte-identical across runs and
the per-trace work could be parallelized without changing the output. The
emitted document is the same Jaeger export shape the parser consumes, and
a ground-truth label file records which modes were injected per trace.

Spec schema (all latency values in integer microseconds):

    {
      "request_type": "getbycheapest",
      "seed": 42,
      "n_traces": 1000,
      "root": {
        "operation": "getbycheapest",
        "service": "basic-service",
        "latency_us": {"mean": 20000, "stddev": 1500},
        "children": [
          {
            "operation": "getleftticket",
            "service": "ticket-service",
            "probability": 1.0,
            "invocations": 1,
            "latency_us": {"mean": 30000, "stddev": 2000},
            "tags": {"region": "eu",
                     "cache": {"choices": [["hit", 0.9], ["miss", 0.1]]}},
            "children": []
          }
        ]
      },
      "modes": [
        {
          "name": "cheapest-route-lookup",
          "path": ["getbycheapest", "getleftticket", "getcheapestroute"],
          "service": "route-service",
          "probability": 0.23,
          "extra_invocations": 1,
          "latency_us": {"mean": 5000, "stddev": 500},
          "latency_delta_us": 400000
        }
      ]
    }
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any

from .model import Span, Trace

# Fixed start-of-corpus timestamp so output does not depend on the wall clock.
BASE_EPOCH_US = 1_700_000_000_000_000
TRACE_SPACING_US = 1_000_000


class InvalidGeneratorSpec(ValueError):
    """Spec file missing fields, out-of-range probabilities, or bad mode paths."""


@dataclass(frozen=True)
class LatencyModel:
    """Gaussian own-time of one call, truncated to >= 1 microsecond."""

    mean_us: float
    stddev_us: float = 0.0

    def sample(self, rng: random.Random) -> int:
        return max(1, round(rng.gauss(self.mean_us, self.stddev_us)))


@dataclass
class CallTemplate:
    """One operation in the call-tree template."""

    operation: str
    service: str
    latency: LatencyModel
    probability: float = 1.0
    invocations: int = 1
    tags: dict[str, Any] = field(default_factory=dict)
    children: list["CallTemplate"] = field(default_factory=list)


@dataclass
class ModeInjection:
    """Probabilistic extra invocations of a call path plus a latency delta."""

    name: str
    path: tuple[str, ...]
    probability: float
    service: str = ""
    extra_invocations: int = 1
    latency: LatencyModel = field(default_factory=lambda: LatencyModel(1000.0, 0.0))
    latency_delta_us: int = 0


@dataclass
class GeneratorSpec:
    """Everything needed to synthesize one request type's corpus."""

    request_type: str
    n_traces: int
    seed: int
    root: CallTemplate
    modes: list[ModeInjection] = field(default_factory=list)


def _parse_latency(raw: Any, where: str) -> LatencyModel:
    if not isinstance(raw, dict) or "mean" not in raw:
        raise InvalidGeneratorSpec(f"{where}: latency_us needs a 'mean'")
    mean = float(raw["mean"])
    stddev = float(raw.get("stddev", 0.0))
    if mean < 0 or stddev < 0:
        raise InvalidGeneratorSpec(f"{where}: latency mean/stddev must be >= 0")
    return LatencyModel(mean_us=mean, stddev_us=stddev)


def _check_probability(p: float, where: str) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidGeneratorSpec(f"{where}: probability {p} outside [0, 1]")
    return p


def _parse_tags(raw: Any, where: str) -> dict[str, Any]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise InvalidGeneratorSpec(f"{where}: tags must be an object")
    tags: dict[str, Any] = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            choices = value.get("choices")
            if not isinstance(choices, list) or not choices:
                raise InvalidGeneratorSpec(f"{where}: tag {key!r} needs 'choices'")
            total = sum(float(w) for _, w in choices)
            if total <= 0:
                raise InvalidGeneratorSpec(f"{where}: tag {key!r} weights sum to 0")
            tags[key] = [(str(v), float(w)) for v, w in choices]
        else:
            tags[key] = str(value)
    return tags


def _parse_template(raw: Any, where: str) -> CallTemplate:
    if not isinstance(raw, dict) or "operation" not in raw:
        raise InvalidGeneratorSpec(f"{where}: call template needs an 'operation'")
    operation = str(raw["operation"])
    invocations = int(raw.get("invocations", 1))
    if invocations < 1:
        raise InvalidGeneratorSpec(f"{where}/{operation}: invocations must be >= 1")
    return CallTemplate(
        operation=operation,
        service=str(raw.get("service", "")),
        latency=_parse_latency(raw.get("latency_us", {"mean": 1000}), f"{where}/{operation}"),
        probability=_check_probability(raw.get("probability", 1.0), f"{where}/{operation}"),
        invocations=invocations,
        tags=_parse_tags(raw.get("tags"), f"{where}/{operation}"),
        children=[
            _parse_template(child, f"{where}/{operation}")
            for child in raw.get("children", [])
        ],
    )


def _template_chain(root: CallTemplate, path: tuple[str, ...]) -> list[CallTemplate]:
    """Template nodes along ``path`` starting at the root; [] when absent."""
    if not path or root.operation != path[0]:
        return []
    chain = [root]
    node = root
    for segment in path[1:]:
        node = next((c for c in node.children if c.operation == segment), None)
        if node is None:
            return []
        chain.append(node)
    return chain


def parse_generator_spec(text: str) -> GeneratorSpec:
    """Parse and validate a generator spec document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidGeneratorSpec(f"spec is not valid JSON: {e}") from e
    for key in ("request_type", "n_traces", "seed", "root"):
        if key not in raw:
            raise InvalidGeneratorSpec(f"spec missing {key!r}")
    n_traces = int(raw["n_traces"])
    if n_traces < 1:
        raise InvalidGeneratorSpec("n_traces must be >= 1")
    root = _parse_template(raw["root"], "root")
    if root.operation != str(raw["request_type"]):
        raise InvalidGeneratorSpec("root operation must equal request_type")
    if root.probability != 1.0 or root.invocations != 1:
        raise InvalidGeneratorSpec("root must have probability 1 and 1 invocation")

    modes = []
    for i, raw_mode in enumerate(raw.get("modes", [])):
        where = f"modes[{i}]"
        path = tuple(str(s) for s in raw_mode.get("path", ()))
        if len(path) < 2:
            raise InvalidGeneratorSpec(f"{where}: path needs >= 2 segments")
        parent_chain = _template_chain(root, path[:-1])
        if not parent_chain:
            raise InvalidGeneratorSpec(
                f"{where}: parent path {'/'.join(path[:-1])} not in the call tree"
            )
        if any(node.probability != 1.0 for node in parent_chain):
            raise InvalidGeneratorSpec(
                f"{where}: every ancestor of an injected path must have probability 1"
            )
        modes.append(
            ModeInjection(
                name=str(raw_mode.get("name", f"mode-{i}")),
                path=path,
                probability=_check_probability(raw_mode.get("probability", 0.0), where),
                service=str(raw_mode.get("service", "")),
                extra_invocations=int(raw_mode.get("extra_invocations", 1)),
                latency=_parse_latency(
                    raw_mode.get("latency_us", {"mean": 1000}), where
                ),
                latency_delta_us=int(raw_mode.get("latency_delta_us", 0)),
            )
        )
        if modes[-1].extra_invocations < 1:
            raise InvalidGeneratorSpec(f"{where}: extra_invocations must be >= 1")
    return GeneratorSpec(
        request_type=str(raw["request_type"]),
        n_traces=n_traces,
        seed=int(raw["seed"]),
        root=root,
        modes=modes,
    )


def _sample_tags(tags: dict[str, Any], rng: random.Random) -> dict[str, str]:
    result: dict[str, str] = {}
    for key, value in tags.items():
        if isinstance(value, list):
            values = [v for v, _ in value]
            weights = [w for _, w in value]
            result[key] = rng.choices(values, weights=weights, k=1)[0]
        else:
            result[key] = value
    return result


class _TraceBuilder:
    def __init__(self, trace_id: str, rng: random.Random):
        self.trace_id = trace_id
        self.rng = rng
        self.spans: list[Span] = []
        self._next_span = 0

    def _new_span_id(self) -> str:
        self._next_span += 1
        return f"{self.rng.getrandbits(48):012x}{self._next_span:04x}"

    def build_call(
        self,
        template: CallTemplate,
        parent_id: str | None,
        parent_path: tuple[str, ...],
        start_us: int,
        injections: dict[tuple[str, ...], list[ModeInjection]],
        extra_us: int = 0,
    ) -> int:
        """Emit one span (and its subtree); returns the span's duration.

        Children run sequentially; a span's duration is the sum of its
        children's durations plus its own sampled latency (plus extra_us
        for injected slowness), so deltas propagate up to the root.
        """
        span_id = self._new_span_id()
        path = parent_path + (template.operation,)
        own_latency = template.latency.sample(self.rng) + extra_us
        cursor = start_us
        for child in template.children:
            if child.probability < 1.0 and self.rng.random() >= child.probability:
                continue
            for _ in range(child.invocations):
                cursor += self.build_call(child, span_id, path, cursor, injections)
        for mode in injections.get(path, ()):
            injected = CallTemplate(
                operation=mode.path[-1],
                service=mode.service or template.service,
                latency=mode.latency,
            )
            for i in range(mode.extra_invocations):
                # The whole latency delta lands on the first injected
                # invocation; ancestors inherit it bottom-up.
                cursor += self.build_call(
                    injected,
                    span_id,
                    path,
                    cursor,
                    injections,
                    extra_us=mode.latency_delta_us if i == 0 else 0,
                )
        duration = (cursor - start_us) + own_latency
        self.spans.append(
            Span(
                span_id=span_id,
                trace_id=self.trace_id,
                parent_id=parent_id,
                operation_name=template.operation,
                service_name=template.service,
                start_time=start_us,
                duration=duration,
                tags=_sample_tags(template.tags, self.rng),
            )
        )
        return duration


def generate_trace(
    spec: GeneratorSpec, index: int
) -> tuple[Trace, list[str]]:
    """Deterministically generate trace ``index`` and its active mode names."""
    rng = random.Random(f"{spec.seed}:{index}")
    trace_id = f"{rng.getrandbits(96):024x}{index:08x}"
    active = [m for m in spec.modes if rng.random() < m.probability]

    injections: dict[tuple[str, ...], list[ModeInjection]] = {}
    for mode in active:
        injections.setdefault(mode.path[:-1], []).append(mode)

    builder = _TraceBuilder(trace_id, rng)
    start = BASE_EPOCH_US + index * TRACE_SPACING_US
    builder.build_call(spec.root, None, (), start, injections)
    # Spans are appended bottom-up, so the root is the last one emitted.
    spans = tuple(builder.spans)
    return Trace(trace_id=trace_id, spans=spans, root=spans[-1].span_id), [
        m.name for m in active
    ]


def generate_corpus(spec: GeneratorSpec) -> tuple[list[Trace], dict[str, list[str]]]:
    """All traces of the spec plus the ground-truth labels (trace_id -> modes)."""
    traces: list[Trace] = []
    labels: dict[str, list[str]] = {}
    for i in range(spec.n_traces):
        trace, active = generate_trace(spec, i)
        traces.append(trace)
        labels[trace.trace_id] = active
    return traces, labels
