"""Snapshot container round-trips, atomicity, and preprocessing."""

from __future__ import annotations

import gzip
import json

import numpy as np
import pytest

from tracelens.aggregate import build_tree
from tracelens.model import RequestSet, parse_trace_export
from tracelens.store import (
    FORMAT_VERSION,
    MAGIC,
    CorruptSnapshot,
    NoMatchingTraces,
    Snapshot,
    UnknownVersion,
    preprocess,
    read_snapshot,
    source_digest,
    write_snapshot,
)

from .conftest import make_export, make_span


@pytest.fixture()
def small_snapshot(bimodal_request_set) -> Snapshot:
    tree, matrix = build_tree(bimodal_request_set)
    return Snapshot(
        format_version=FORMAT_VERSION,
        request_type="getbycheapest",
        created_at="2024-01-01T00:00:00Z",
        source_digest="d" * 64,
        tree=tree,
        matrix=matrix,
    )


def assert_snapshots_equal(a: Snapshot, b: Snapshot) -> None:
    assert a.format_version == b.format_version
    assert a.request_type == b.request_type
    assert a.created_at == b.created_at
    assert a.source_digest == b.source_digest
    assert a.matrix.paths == b.matrix.paths
    assert a.matrix.trace_ids == b.matrix.trace_ids
    assert np.array_equal(a.matrix.latencies_us, b.matrix.latencies_us)
    assert np.array_equal(a.matrix.counts, b.matrix.counts)
    assert set(a.tree.index) == set(b.tree.index)
    for path, node in a.tree.index.items():
        other = b.tree.index[path]
        assert node.count_distribution == other.count_distribution
        assert node.duration_samples == other.duration_samples
        assert node.tag_value_counts == other.tag_value_counts
        assert sorted(node.children) == sorted(other.children)


def test_write_read_roundtrip(tmp_path, small_snapshot):
    target = tmp_path / "x.tlsnap"
    write_snapshot(small_snapshot, target)
    loaded = read_snapshot(target)
    assert_snapshots_equal(small_snapshot, loaded)


def test_write_is_byte_deterministic(tmp_path, small_snapshot):
    a, b = tmp_path / "a.tlsnap", tmp_path / "b.tlsnap"
    write_snapshot(small_snapshot, a)
    write_snapshot(small_snapshot, b)
    assert a.read_bytes() == b.read_bytes()


def test_interrupted_write_leaves_prior_snapshot(tmp_path, small_snapshot, monkeypatch):
    target = tmp_path / "x.tlsnap"
    write_snapshot(small_snapshot, target)
    before = target.read_bytes()

    import tracelens.store as store_module

    def boom(src, dst):
        raise OSError("disk gone")

    monkeypatch.setattr(store_module.os, "replace", boom)
    with pytest.raises(OSError):
        write_snapshot(small_snapshot, target)
    assert target.read_bytes() == before
    assert list(tmp_path.glob("*.tmp")) == []


def test_truncated_file_is_corrupt(tmp_path, small_snapshot):
    target = tmp_path / "x.tlsnap"
    write_snapshot(small_snapshot, target)
    data = target.read_bytes()
    target.write_bytes(data[: len(data) // 2])
    with pytest.raises(CorruptSnapshot):
        read_snapshot(target)


def test_wrong_magic_is_corrupt(tmp_path):
    target = tmp_path / "x.tlsnap"
    target.write_bytes(b"NOTSNAP123")
    with pytest.raises(CorruptSnapshot):
        read_snapshot(target)


def test_future_version_rejected(tmp_path, small_snapshot):
    target = tmp_path / "x.tlsnap"
    write_snapshot(small_snapshot, target)
    data = bytearray(target.read_bytes())
    data[len(MAGIC) : len(MAGIC) + 2] = (FORMAT_VERSION + 1).to_bytes(2, "big")
    target.write_bytes(bytes(data))
    with pytest.raises(UnknownVersion):
        read_snapshot(target)


def test_inconsistent_payload_rejected(tmp_path, small_snapshot):
    target = tmp_path / "x.tlsnap"
    write_snapshot(small_snapshot, target)
    raw = target.read_bytes()
    payload = json.loads(gzip.decompress(raw[len(MAGIC) + 2 :]))
    # corrupt one count cell so tree and matrix disagree
    payload["matrix"]["counts"][0][0] += 1
    body = gzip.compress(json.dumps(payload).encode(), mtime=0)
    target.write_bytes(raw[: len(MAGIC) + 2] + body)
    with pytest.raises(CorruptSnapshot):
        read_snapshot(target)


def test_source_digest_deterministic_and_order_free(tmp_path):
    f1 = tmp_path / "a.json"
    f2 = tmp_path / "b.json"
    f1.write_text("one")
    f2.write_text("two")
    assert source_digest([f1, f2]) == source_digest([f2, f1])
    assert source_digest([f1]) != source_digest([f2])


def test_preprocess_one_file_one_type(tmp_path):
    export = make_export(
        [make_span("t1", "s1", "home", None, duration=100)],
        [make_span("t2", "s1", "home", None, duration=200)],
    )
    path = tmp_path / "export.json"
    path.write_bytes(export)
    result = preprocess([path], created_at="2024-01-01T00:00:00Z")
    assert len(result.snapshots) == 1
    assert result.snapshots[0].request_type == "home"
    assert result.traces_accepted == 2
    assert result.warnings == []


def test_preprocess_type_filter(tmp_path):
    export = make_export(
        [make_span("t1", "s1", "home", None)],
        [make_span("t2", "s1", "checkout", None)],
    )
    path = tmp_path / "export.json"
    path.write_bytes(export)
    result = preprocess([path], request_type="checkout")
    assert len(result.snapshots) == 1
    assert result.snapshots[0].request_type == "checkout"
    with pytest.raises(NoMatchingTraces):
        preprocess([path], request_type="missing")


def test_preprocess_collects_warnings_and_skips_bad_files(tmp_path):
    good = tmp_path / "good.json"
    good.write_bytes(
        make_export(
            [make_span("t1", "s1", "home", None)],
            [
                make_span("t2", "s1", "home", None),
                make_span("t2", "s2", "x", parent="nope"),
            ],
        )
    )
    bad = tmp_path / "bad.json"
    bad.write_bytes(b"{broken")
    result = preprocess([good, bad])
    assert result.traces_accepted == 1
    kinds = {w.kind for w in result.warnings}
    assert kinds == {"orphan_span", "malformed_file"}


def test_preprocess_matrix_rows_equal_accepted(tmp_path, bimodal_corpus):
    from tracelens.model import to_export_document

    traces, _ = bimodal_corpus
    path = tmp_path / "corpus.json"
    path.write_text(json.dumps(to_export_document(traces)))
    result = preprocess([path])
    parsed = parse_trace_export(path.read_bytes())
    assert result.traces_accepted == len(parsed.traces)
    assert sum(s.matrix.n_traces for s in result.snapshots) == len(parsed.traces)


def test_loaded_snapshot_serves_without_raw_files(tmp_path, small_snapshot):
    target = tmp_path / "x.tlsnap"
    write_snapshot(small_snapshot, target)
    loaded = read_snapshot(target)
    # queries run purely off the loaded structures
    assert loaded.matrix.n_traces == small_snapshot.matrix.n_traces
    assert loaded.tree.root.path.segments == ("getbycheapest",)
