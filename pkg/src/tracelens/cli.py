"""Operator entry point: preprocess, serve, generate, report.

Exit codes: 0 ok, 1 empty/degenerate result, 2 operational error.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path
from urllib.parse import quote

from . import generator, store
from .model import to_export_document
from .stats import ZeroMean, build_histogram, coefficient_of_variation, cv_to_color
from .store import (
    SNAPSHOT_SUFFIX,
    CorruptSnapshot,
    IoFailure,
    NoMatchingTraces,
    Snapshot,
    UnknownVersion,
)

HISTOGRAM_WIDTH = 48


def _snapshot_filename(request_type: str) -> str:
    return quote(request_type, safe="") + SNAPSHOT_SUFFIX


def cmd_preprocess(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        result = store.preprocess(
            args.input,
            request_type=args.request_type,
            created_at=store.default_created_at(),
        )
    except NoMatchingTraces as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    for warning in result.warnings:
        where = warning.trace_id or "-"
        print(
            f"warning: {warning.kind} trace={where} {warning.message}", file=sys.stderr
        )
    try:
        for snapshot in result.snapshots:
            store.write_snapshot(snapshot, out_dir / _snapshot_filename(snapshot.request_type))
    except IoFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    paths_total = sum(len(s.matrix.paths) for s in result.snapshots)
    print(f"traces accepted: {result.traces_accepted}")
    print(f"traces skipped:  {result.traces_skipped}")
    print(f"paths discovered: {paths_total}")
    for snapshot in result.snapshots:
        print(
            f"snapshot: {snapshot.request_type} "
            f"({snapshot.n_traces} traces, {len(snapshot.matrix.paths)} paths) "
            f"-> {_snapshot_filename(snapshot.request_type)}"
        )
    return 0 if result.traces_accepted > 0 else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, _, port_text = args.listen.rpartition(":")
    host = host or "127.0.0.1"
    try:
        port = int(port_text)
    except ValueError:
        print(f"error: cannot parse listen address {args.listen!r}", file=sys.stderr)
        return 2
    # Probe the address before handing off to uvicorn so an unbindable
    # address is an orderly exit 2 rather than a traceback.
    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
        probe.close()
    except OSError as e:
        print(f"error: cannot bind {args.listen}: {e}", file=sys.stderr)
        return 2

    app = create_app(args.snapshots, static_dir=args.static)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        spec_text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        spec = generator.parse_generator_spec(spec_text)
    except generator.InvalidGeneratorSpec as e:
        print(f"error: invalid generator spec: {e}", file=sys.stderr)
        return 2

    traces, labels = generator.generate_corpus(spec)
    document = to_export_document(traces)
    out_path = Path(args.out)
    labels_path = out_path.with_suffix(".labels.json")
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(
            json.dumps(document, separators=(",", ":")), encoding="utf-8"
        )
        labels_path.write_text(
            json.dumps(
                {
                    "request_type": spec.request_type,
                    "seed": spec.seed,
                    "modes": {
                        m.name: {
                            "path": list(m.path),
                            "probability": m.probability,
                            "extra_invocations": m.extra_invocations,
                            "latency_delta_us": m.latency_delta_us,
                        }
                        for m in spec.modes
                    },
                    "traces": labels,
                },
                separators=(",", ":"),
                sort_keys=True,
            ),
            encoding="utf-8",
        )
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"generated {len(traces)} traces -> {out_path}")
    print(f"labels -> {labels_path}")
    return 0


def _format_histogram(hist, width: int = HISTOGRAM_WIDTH) -> list[str]:
    peak = max(hist.counts) if hist.counts else 1
    lines = []
    for i, count in enumerate(hist.counts):
        lo, hi = hist.bin_edges[i], hist.bin_edges[i + 1]
        bar = "#" * (round(count / peak * width) if peak else 0)
        closing = "]" if i == len(hist.counts) - 1 else ")"
        lines.append(f"  [{lo:>12.0f}, {hi:>12.0f}{closing} {bar} {count}")
    return lines


def cmd_report(args: argparse.Namespace) -> int:
    try:
        snapshot = store.read_snapshot(args.snapshot)
    except (CorruptSnapshot, UnknownVersion, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(_render_report(snapshot, top=args.top), end="")
    return 0


def _render_report(snapshot: Snapshot, top: int) -> str:
    matrix = snapshot.matrix
    lines = [
        f"request type: {snapshot.request_type}",
        f"traces: {snapshot.n_traces}  paths: {len(matrix.paths)}",
        f"source digest: {snapshot.source_digest}",
        "",
    ]

    ranked = []
    for path in matrix.paths:
        try:
            cv = coefficient_of_variation(matrix.counts_for(path))
        except ZeroMean:
            cv = 0.0
        ranked.append((cv, path))
    ranked.sort(key=lambda item: (-item[0], item[1].encode()))

    lines.append(f"top {top} paths by invocation-count CV:")
    lines.append("  rank  cv      intensity  path")
    for rank, (cv, path) in enumerate(ranked[:top], start=1):
        intensity = cv_to_color(cv).intensity
        lines.append(f"  {rank:<4}  {cv:<6.3f}  {intensity:<9.3f}  {path.encode()}")
    lines.append("")

    hist = build_histogram(matrix.latencies_us)
    lines.append(f"end-to-end latency histogram ({hist.bin_rule}, µs):")
    lines.extend(_format_histogram(hist))
    lines.append("")

    for cv, path in ranked[:top]:
        node = snapshot.tree.node(path)
        lines.append(f"count distribution for {path.encode()}:")
        for count, n in sorted(node.count_distribution.items()):
            share = n / snapshot.n_traces
            lines.append(f"  count={count}: {n} traces ({share:.1%})")
        lines.append("")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracelens",
        description="Aggregate RPC execution-path analysis for distributed trace exports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="aggregate trace exports into snapshots")
    p.add_argument("--input", nargs="+", required=True, help="trace export JSON files")
    p.add_argument("--out", required=True, help="directory for .tlsnap snapshots")
    p.add_argument("--request-type", default=None, help="only this request type")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("serve", help="serve the query API over a snapshot directory")
    p.add_argument("--snapshots", required=True, help="directory of .tlsnap files")
    p.add_argument("--listen", default="127.0.0.1:8023", help="host:port to bind")
    p.add_argument("--static", default=None, help="optional dashboard asset directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("generate", help="generate a synthetic trace corpus")
    p.add_argument("--spec", required=True, help="generator spec JSON file")
    p.add_argument("--out", required=True, help="output trace export JSON file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("report", help="print a text report for one snapshot")
    p.add_argument("--snapshot", required=True, help=".tlsnap file to report on")
    p.add_argument("--top", type=int, default=10, help="paths to rank (default 10)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
