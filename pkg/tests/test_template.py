import random

import pytest
from hypothesis import given, strategies as st

from editseq.ast import AstNode, deserialize
from editseq.diff import make_edit
from editseq.template import (
    EditTemplate,
    Esp,
    IsKind,
    IsNotNull,
    MatchStatus,
    PatternRecord,
    Rel,
    TooManyAlignments,
    UnresolvedHole,
    apply,
    apply_case,
    canonicalize,
    dump_patterns,
    eval_predicate,
    format_predicate,
    hole_ids,
    isomorphic,
    load_patterns,
    match_prefix,
    match_sequence,
    match_template,
    parse_predicate,
    rename_holes,
)
from golden import ADD_PROPERTY, delete_param_esp
from oracles import brute_match, freeze, random_template, random_tree

D = deserialize


def leaf(label, tok):
    return AstNode(label, tok)


def test_apply_splices_sequences():
    t = D("(A (Hole 1) (X \"m\") (Hole 2))")
    s = {"1": (leaf("X", "a"), leaf("X", "b")), "2": ()}
    assert apply(t, s) == D('(A (X "a") (X "b") (X "m"))')


def test_root_hole_needs_single_node():
    with pytest.raises(ValueError):
        apply(D("(Hole 1)"), {"1": (leaf("X", "a"), leaf("X", "b"))})
    assert apply(D("(Hole 1)"), {"1": (leaf("X", "a"),)}) == leaf("X", "a")


def test_apply_unbound_hole():
    with pytest.raises(KeyError):
        apply(D("(A (Hole 9))"), {})


def test_match_lists_every_alignment():
    subs = match_template(D("(A (Hole 1) (Hole 2))"), D('(A (X "a") (X "b"))'))
    assert [(len(s["1"]), len(s["2"])) for s in subs] == [(0, 2), (1, 1), (2, 0)]


def test_match_rejects_label_mismatch():
    assert match_template(D("(A (Hole 1))"), D("(B)")) == []


def test_alignment_budget():
    big = AstNode("A", None, [leaf("X", str(k)) for k in range(30)])
    t = D("(A (Hole 1) (Hole 2) (Hole 3) (Hole 4))")
    with pytest.raises(TooManyAlignments):
        match_template(t, big, limit=100)


@given(st.integers(0, 100_000))
def test_match_agrees_with_enumeration(seed):
    rng = random.Random(seed)
    n = random_tree(rng)
    t = random_template(rng, n if rng.random() < 0.8 else random_tree(rng))
    got = match_template(t, n)
    assert freeze(got) == freeze(brute_match(t, n))
    for s in got:
        assert apply(t, s) == n


def test_apply_case_changes_first_char_only():
    assert apply_case("lower", "IdName") == "idName"
    assert apply_case("upper", "idName") == "IdName"
    assert apply_case("eq", "x") == "x"
    assert apply_case("lower", "") == ""


def test_predicates_evaluate():
    s = {"1": (leaf("Identifier", "Size"),), "2": (leaf("Identifier", "size"),), "3": ()}
    assert eval_predicate(Rel("2", "lower", "1"), s)
    assert not eval_predicate(Rel("2", "eq", "1"), s)
    assert eval_predicate(IsNotNull("1"), s) and not eval_predicate(IsNotNull("3"), s)
    assert eval_predicate(IsKind("1", "Identifier"), s)
    assert not eval_predicate(IsKind("3", "Identifier"), s)
    with pytest.raises(UnresolvedHole):
        eval_predicate(IsNotNull("9"), s)


@pytest.mark.parametrize("text", ["notnull 3", "kind 4 TypeName", "rel 10 lower 5", "rel 2 eq 1"])
def test_predicate_text_roundtrip(text):
    assert format_predicate(parse_predicate(text)) == text


def test_eq_predicates_are_normalized():
    assert Esp((EditTemplate(D("(Hole 1)"), D("(Hole 2)")),), {Rel("1", "eq", "2")}).predicates == {Rel("2", "eq", "1")}


@pytest.mark.parametrize("bad", ["notnull", "kind 1", "rel 1 swap 2", "holes 1"])
def test_bad_predicate_text(bad):
    with pytest.raises(ValueError):
        parse_predicate(bad)


def test_esp_validation():
    t = EditTemplate(D("(A (Hole 1))"), D("(A (Hole 1))"))
    with pytest.raises(ValueError):
        Esp((t,))
    with pytest.raises(ValueError):
        Esp((EditTemplate(D("(Hole 1)"), D("(Hole 2)")),), {IsNotNull("7")})
    with pytest.raises(ValueError):
        Esp(())


def test_canonical_renaming():
    esp = rename_holes(ADD_PROPERTY, {h: f"h{h}" for h in ADD_PROPERTY.holes})
    assert esp != ADD_PROPERTY
    assert isomorphic(esp, ADD_PROPERTY)
    assert canonicalize(esp) == ADD_PROPERTY
    assert hole_ids(ADD_PROPERTY.templates[0].post) == ["3", "4", "5", "6"]


def test_pattern_file_roundtrip(tmp_path):
    p = tmp_path / "p.jsonl"
    recs = [PatternRecord(1, ADD_PROPERTY, "sketch", 2), PatternRecord(2, delete_param_esp(), "s2", 0)]
    dump_patterns(recs, str(p))
    back = load_patterns(str(p))
    assert back == recs


def test_pattern_file_errors_name_line(tmp_path):
    p = tmp_path / "p.jsonl"
    dump_patterns([PatternRecord(1, ADD_PROPERTY)], str(p))
    with open(p, "a") as fh:
        fh.write('{"rank": 2, "templates": [["(A", "(B)"]]}\n')
    with pytest.raises(ValueError, match=r"p.jsonl:2:"):
        load_patterns(str(p))


# -- sequence matching --------------------------------------------------------


def _edit(i, pre, post, trace="t"):
    return make_edit(trace, i, i + 1, D(pre), D(post))


def test_prefix_uses_only_checkable_predicates():
    esp = Esp(
        (
            EditTemplate(D("(L (Hole 1))"), D('(L (Hole 2) (X "n"))')),
            EditTemplate(D("(Hole 3)"), D("(Hole 4)")),
        ),
        {Rel("2", "eq", "1"), Rel("4", "eq", "1")},
    )
    e1 = _edit(0, '(L (X "a"))', '(L (X "a") (X "n"))')
    assert match_prefix([e1], esp).unique
    e2 = _edit(1, '(M (Y "q"))', '(M (Y "r"))')
    assert match_prefix([e1, e2], esp).status is MatchStatus.NO_MATCH
    e3 = _edit(1, '(M (Y "q"))', '(M (X "a"))')
    res = match_prefix([e1, e3], esp)
    assert res.unique and res.sigma["4"] == (leaf("X", "a"),)


def test_predicates_disambiguate_alignments():
    e = _edit(0, '(L (X "a") (X "b"))', '(L (X "a"))')
    loose = Esp((EditTemplate(D("(L (Hole 1) (Hole 2))"), D("(L (Hole 3))")),))
    assert match_prefix([e], loose).status is MatchStatus.AMBIGUOUS
    tight = Esp(loose.templates, {Rel("3", "eq", "1")})
    res = match_prefix([e], tight)
    assert res.unique and res.sigma["2"] == (leaf("X", "b"),)


def test_starred_sequence_delete_param(delete_param):
    from editseq.trace import enumerate_edits

    edits = {(e.i, e.j): e for e in enumerate_edits(delete_param)}
    seq = [edits[(0, 1)], edits[(1, 2)], edits[(2, 3)]]
    res = match_sequence(seq, delete_param_esp())
    assert res.status is MatchStatus.UNIQUE
    assert [n.token for n in res.sigma["5"]] == ["io", "result"]
    assert match_sequence(seq[:1], delete_param_esp()).status is MatchStatus.NO_MATCH
    loose = delete_param_esp(link_args=False, last_arg_kind=False)
    assert match_sequence(seq, loose).status is MatchStatus.AMBIGUOUS
