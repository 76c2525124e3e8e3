import random

from hypothesis import given, strategies as st

from editseq.ast import deserialize, replace_at
from editseq.diff import DELETE, INSERT, UPDATE, EditKind, classify, localize, make_edit
from editseq.minilang import parse
from oracles import brute_localize, mutate, random_tree


def test_equal_trees_have_no_edit():
    t = deserialize('(A (X "a"))')
    assert localize(t, t) is None
    assert make_edit("t", 0, 1, t, t) is None


def test_localize_descends_to_single_difference():
    a = deserialize('(A (B (X "a") (X "b")) (Y "c"))')
    b = deserialize('(A (B (X "a") (X "z")) (Y "c"))')
    pre, post, path = localize(a, b)
    assert path == (0, 1)
    assert pre == deserialize('(X "b")') and post == deserialize('(X "z")')


def test_insert_delete_update_kinds():
    a = deserialize('(L (X "a") (X "b"))')
    b = deserialize('(L (X "a") (Y "n") (X "b"))')
    assert classify(a, b) == EditKind(INSERT, "Y")
    assert classify(b, a) == EditKind(DELETE, "Y")
    assert classify(deserialize('(X "a")'), deserialize('(X "b")')) == EditKind(UPDATE, "X")
    mixed = deserialize('(L (X "a") (Y "n") (X "b"))')
    assert classify(deserialize("(L)"), mixed) == EditKind(INSERT, "L")


def test_property_insert_kind():
    a = parse("class N {\n    N() {\n    }\n}\n")
    b = parse("class N {\n    public str Id { }\n    N() {\n    }\n}\n")
    e = make_edit("t", 0, 1, a, b)
    assert str(e.kind) == "InsertPropertyDecl"
    assert e.loc_pre.label == "MemberList"
    assert replace_at(a, e.loc_path, e.loc_post) == b


def test_edit_identity_is_its_key():
    a, b = deserialize('(X "a")'), deserialize('(X "b")')
    e1 = make_edit("t", 0, 1, a, b)
    e2 = make_edit("t", 0, 1, b, a)
    assert e1 == e2 and hash(e1) == hash(e2)
    assert e1 < make_edit("t", 0, 2, a, b)


@given(st.integers(0, 100_000))
def test_localize_replacement_reproduces_post(seed):
    rng = random.Random(seed)
    a = random_tree(rng)
    b = mutate(rng, a)
    loc = localize(a, b)
    if loc is None:
        assert a == b
        return
    pre, post, path = loc
    assert replace_at(a, path, post) == b
    assert brute_localize(a, b) == loc
