import json
import random

import pytest

from editseq.ast import deserialize, serialize
from editseq.datasets import ADD_PROPERTY_TYPED, figure_trace
from editseq.trace import (
    MalformedRecord,
    Trace,
    Version,
    build_edit_graph,
    debounce,
    dump_trace,
    enumerate_edits,
    load_corpus,
    load_trace,
)
from oracles import random_trace


def _tree(tok):
    return deserialize(f'(X "{tok}")')


def _trace(stamps):
    return Trace("t", tuple(Version(s, _tree(str(k))) for k, s in enumerate(stamps)))


def test_timestamps_must_not_decrease():
    with pytest.raises(ValueError):
        _trace([0, 10, 5])


def test_debounce_keeps_last_of_each_burst():
    t = debounce(_trace([0, 100, 200, 1000, 1100, 3000]), 500)
    assert [v.tree.token for v in t.versions] == ["2", "4", "5"]


def test_debounce_zero_window_keeps_everything():
    t = _trace([0, 0, 5])
    assert len(debounce(t, 0)) == 3


def test_enumerate_edits_all_pairs_and_pruning():
    t = figure_trace("typed")
    edits = enumerate_edits(t, 1000)
    assert len(edits) == 15
    assert all(e.i < e.j for e in edits)
    small = enumerate_edits(t, 5)
    assert all(e.size <= 5 for e in small) and len(small) < len(edits)


def test_edit_graph_edges_follow_versions():
    g = build_edit_graph([figure_trace("typed"), figure_trace("copied")])
    assert g.seq_edges
    for a, b in g.seq_edges:
        assert a.trace_id == b.trace_id and a.j == b.i
    e = g.nodes[0]
    assert all(f.i == e.j for f in g.successors(e))


def test_edit_graph_brute_force_edges():
    rng = random.Random(4)
    traces = [random_trace(rng, f"r{k}", 5) for k in range(3)]
    g = build_edit_graph(traces)
    brute = {(a.key, b.key) for a in g.nodes for b in g.nodes if a.trace_id == b.trace_id and a.j == b.i}
    assert {(a.key, b.key) for a, b in g.seq_edges} == brute


def test_dump_and_load_roundtrip(tmp_path):
    t = figure_trace("typed")
    p = tmp_path / "typed.jsonl"
    dump_trace(t, str(p), ADD_PROPERTY_TYPED)
    back = load_trace(str(p))
    assert back.trace_id == "typed"
    assert [v.tree for v in back.versions] == [v.tree for v in t.versions]
    q = tmp_path / "ast.jsonl"
    dump_trace(t, str(q))
    assert [v.tree for v in load_trace(str(q)).versions] == [v.tree for v in t.versions]


def test_load_corpus_sorted(tmp_path):
    for name in ("b", "a"):
        dump_trace(figure_trace("typed"), str(tmp_path / f"{name}.jsonl"))
    (tmp_path / "notes.txt").write_text("ignored")
    assert [t.trace_id for t in load_corpus(str(tmp_path))] == ["a", "b"]


@pytest.mark.parametrize(
    "line, reason",
    [
        ("not json", "invalid JSON"),
        ("[1, 2]", "object"),
        ('{"src": "class A { }"}', "'t'"),
        ('{"t": 1, "cursor": "x", "src": "class A { }"}', "cursor"),
        ('{"t": 1}', "exactly one"),
        ('{"t": 1, "src": "class A { }", "ast": "(X)"}', "exactly one"),
        ('{"t": 1, "src": "class {"}', "expected"),
        ('{"t": 1, "ast": "(X"}', "unterminated"),
    ],
)
def test_malformed_records_name_file_and_line(tmp_path, line, reason):
    p = tmp_path / "bad.jsonl"
    p.write_text(json.dumps({"t": 0, "src": "class A { }"}) + "\n" + line + "\n")
    with pytest.raises(MalformedRecord) as info:
        load_trace(str(p))
    assert info.value.line == 2
    assert str(info.value).startswith(f"{p}:2:")
    assert reason in str(info.value)


def test_cursor_is_kept(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text(json.dumps({"t": 0, "cursor": 7, "ast": serialize(_tree("a"))}) + "\n")
    assert load_trace(str(p)).versions[0].cursor == 7
