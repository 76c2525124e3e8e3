import math
import random

import pytest
from hypothesis import given, strategies as st

from editseq.ast import AstNode, deserialize
from editseq.quotient import Sketch
from editseq.synth import (
    LengthMismatch,
    anti_unify,
    au_cost,
    build_dendrogram,
    expand_star_spec,
    generate_pattern,
    hole_cost,
    learn_patterns,
    resolve_binding,
)
from editseq.template import IsKind, MatchStatus, Rel, apply, make_hole, match_sequence
from editseq.trace import enumerate_edits
from oracles import random_trace

H = make_hole


def leaf(label, tok):
    return AstNode(label, tok)


def chain(rng, tid, n=2):
    t = random_trace(rng, tid, n + 1, max_nodes=20)
    es = {(e.i, e.j): e for e in enumerate_edits(t, 1000)}
    if any((k, k + 1) not in es for k in range(n)):
        return None
    return tuple(es[(k, k + 1)] for k in range(n))


def typed_chain(trace):
    es = {(e.i, e.j): e for e in enumerate_edits(trace)}
    return es[(0, 3)], es[(3, 4)], es[(4, 5)]


def test_generate_pattern_typed(typed):
    esp = generate_pattern(typed_chain(typed))
    assert len(esp.templates) == 3
    # the untouched constructor is abstracted and linked across the edit
    assert Rel("2", "eq", "1") in esp.predicates
    assert IsKind("1", "CtorDecl") in esp.predicates
    (g,) = esp.groundings
    for t, e in zip(esp.templates, typed_chain(typed)):
        assert apply(t.pre, g) == e.loc_pre and apply(t.post, g) == e.loc_post
    assert match_sequence(typed_chain(typed), esp).unique


def test_hole_cost_cases():
    x = leaf("X", "a")
    assert hole_cost((), ()) == math.inf
    assert hole_cost((H(1),), ()) == 1.0
    assert hole_cost((x,), ()) == 1.5
    assert hole_cost((H(1),), (H(2),)) == 0.5
    assert hole_cost((x,), (leaf("X", "b"),)) == 1.5
    assert hole_cost((x, x), (H(2),)) == 2.5


def test_anti_unify_keeps_common_structure():
    a = generate_pattern(_single('(L (X "a"))', '(L (X "a") (Y "p"))'))
    b = generate_pattern(_single('(L (X "b") (X "c"))', '(L (X "b") (X "c") (Y "p"))'))
    r = anti_unify(a, b)
    t = r.esp_star.templates[0]
    assert t.post.children[-1] == leaf("Y", "p")
    assert 0 < r.cost < 1


def _single(pre, post, tid="t"):
    from editseq.diff import make_edit

    return (make_edit(tid, 0, 1, deserialize(pre), deserialize(post)),)


def test_identical_patterns_cost_is_lowest():
    a = generate_pattern(_single('(L (X "a"))', '(L (X "a") (Y "p"))'))
    same = anti_unify(a, a).cost
    other = anti_unify(a, generate_pattern(_single('(M (X "q"))', '(M)'))).cost
    assert same < other


def test_length_mismatch():
    a = generate_pattern(_single('(X "a")', '(X "b")'))
    with pytest.raises(LengthMismatch):
        anti_unify(a, generate_pattern(_single('(X "a")', '(X "b")') * 2))


def test_au_cost_default_denominator():
    a = generate_pattern(_single('(L (X "a"))', '(L (X "a") (Y "p"))'))
    b = generate_pattern(_single('(L (X "b"))', '(L (X "b") (Y "p"))'))
    r = anti_unify(a, b)
    assert au_cost(r.esp_star, r.delta_a, r.delta_b) == pytest.approx(r.cost)


def test_resolve_binding():
    sigma = {"1": (leaf("X", "a"), leaf("X", "b"))}
    seq = (AstNode("L", None, [H(1)]), H(1))
    assert resolve_binding(seq, sigma) == (
        AstNode("L", None, [leaf("X", "a"), leaf("X", "b")]),
        leaf("X", "a"),
        leaf("X", "b"),
    )


def test_expand_star_spec_cuts_sequences():
    rng = random.Random(3)
    seq = chain(rng, "s", 3)
    sk = Sketch(tuple(e.kind for e in seq[:2]), True)
    out = expand_star_spec(sk, [seq, seq[:2]])
    assert out == [seq[:2], (seq[0], seq[2])]
    assert expand_star_spec(Sketch(sk.placeholders), [seq, seq[:2]]) == [seq[:2]]


def test_dendrogram_shape(mined):
    for sketch, spec in mined.sketches:
        d = build_dendrogram(sketch, spec)
        leaves = len(d.leaves)
        assert len(d.children) <= max(leaves - 1, 0)
        for idx, (i, j) in d.children.items():
            assert d.depth[idx] == max(d.depth[i], d.depth[j]) + 1
            assert not math.isinf(d.costs[idx])


def test_learn_patterns_single_sequence(typed):
    seq = typed_chain(typed)
    sk = Sketch(tuple(e.kind for e in seq))
    (only,) = learn_patterns(sk, [seq])
    assert only == generate_pattern(seq)


def test_delta_reconstruction_on_mined_dendrogram(mined):
    for sketch, spec in mined.sketches:
        d = build_dendrogram(sketch, spec)
        for idx, (i, j) in d.children.items():
            r = d.results[idx]
            for side, src in ((r.delta_a, d.nodes[i]), (r.delta_b, d.nodes[j])):
                for t, orig in zip(r.esp_star.templates, src.templates):
                    assert apply(t.pre, side) == orig.pre
                    assert apply(t.post, side) == orig.post


@given(st.integers(0, 100_000))
def test_anti_unification_properties(seed):
    rng = random.Random(seed)
    a, b = chain(rng, "a"), chain(rng, "b")
    if a is None or b is None:
        return
    A, B = generate_pattern(a), generate_pattern(b)
    r = anti_unify(A, B)
    # generalization
    for seq in (a, b):
        assert match_sequence(seq, r.esp_star).status is not MatchStatus.NO_MATCH
    # symmetry
    assert anti_unify(B, A).cost == pytest.approx(r.cost)
    # no hole is empty on both sides
    for h in r.esp_star.holes:
        assert r.delta_a[h] or r.delta_b[h]


def test_kind_predicates_survive_merge(typed, copied):
    ea = enumerate_edits(typed)
    eb = enumerate_edits(copied)
    a = generate_pattern([e for e in ea if (e.i, e.j) == (3, 4)])
    b = generate_pattern([e for e in eb if (e.i, e.j) == (2, 3)])
    r = anti_unify(a, b)
    kinds = {p.label for p in r.esp_star.predicates if isinstance(p, IsKind)}
    assert {"TypeName", "Identifier"} <= kinds
