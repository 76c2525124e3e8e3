"""Pattern generation from edit sequences, anti-unification and clustering.

Anti-unification aligns two patterns template by template. Equal concrete
parts are kept, same-label nodes are aligned child by child with a dynamic
program that may introduce holes bound to the empty sequence on one side,
and everything else becomes a fresh hole. The cost model rewards keeping
structure and pairing existing holes, penalizes one-sided empty bindings and
forbids holes that are empty on both sides.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .ast import AstNode, enumerate_subtrees, node_count, replace_at, text_of_sequence
from .diff import Edit
from .quotient import Sketch
from .template import (
    Binding,
    EditTemplate,
    Esp,
    IsKind,
    IsNotNull,
    Predicate,
    Rel,
    apply_case,
    canonicalize,
    has_holes,
    make_hole,
    predicate_holes,
)

__all__ = [
    "LengthMismatch",
    "AuResult",
    "Dendrogram",
    "generate_pattern",
    "anti_unify",
    "au_cost",
    "hole_cost",
    "expand_star_spec",
    "learn_patterns",
    "build_dendrogram",
    "resolve_binding",
]

INF = math.inf


class LengthMismatch(ValueError):
    pass


# -- shared helpers ------------------------------------------------------------


def resolve_binding(seq: Binding, sigma: Mapping[str, Binding]) -> Binding:
    """Replace holes inside ``seq`` by their ``sigma`` bindings."""
    out: List[AstNode] = []
    for n in seq:
        if n.is_hole:
            out.extend(sigma[n.token])
        else:
            out.append(_resolve_node(n, sigma))
    return tuple(out)


def _resolve_node(n: AstNode, sigma) -> AstNode:
    if not n.children:
        return n
    return n.with_children(resolve_binding(n.children, sigma))


def _relate(a: Binding, b: Binding) -> List[str]:
    """Predicate functions ``fn`` with ``text(a) == fn(text(b))`` that are
    worth proposing: equality needs structural equality, case changes need
    two different token leaves of the same label."""
    if a == b:
        return ["eq"]
    if len(a) == 1 and len(b) == 1:
        x, y = a[0], b[0]
        if x.token is not None and y.token is not None and x.label == y.label:
            return [fn for fn in ("lower", "upper") if x.token == apply_case(fn, y.token)]
    return []


# -- generating a pattern from one sequence --------------------------------------


def generate_pattern(seq: Sequence[Edit], starred: bool = False) -> Esp:
    """Abstract one concrete edit sequence into an ESP.

    Inside each edit, the largest pairs of related pre/post nodes are
    repeatedly replaced by fresh holes linked by a predicate. Afterwards
    every pair of hole bindings across the whole sequence is checked for
    further relations.
    """
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return str(counter[0])

    templates = []
    sigma: Dict[str, Binding] = {}
    preds: set = set()
    for e in seq:
        pre, post = e.loc_pre, e.loc_post
        while True:
            pair = _best_related_pair(pre, post)
            if pair is None:
                break
            p_path, q_path, fn, p_node, q_node = pair
            hp, hq = fresh(), fresh()
            pre = replace_at(pre, p_path, make_hole(hp))
            post = replace_at(post, q_path, make_hole(hq))
            sigma[hp] = (p_node,)
            sigma[hq] = (q_node,)
            preds.add(Rel(hq, fn, hp))
            for h, n in ((hp, p_node), (hq, q_node)):
                preds.add(IsNotNull(h))
                preds.add(IsKind(h, n.label))
        templates.append(EditTemplate(pre, post))
    holes = sorted(sigma, key=int)
    for x in holes:
        for y in holes:
            if x != y:
                for fn in _relate(sigma[x], sigma[y]):
                    preds.add(Rel(x, fn, y))
    esp = Esp(tuple(templates), frozenset(preds), starred, (dict(sigma),))
    return canonicalize(esp)


def _best_related_pair(pre: AstNode, post: AstNode):
    pre_nodes = [(p, n) for p, n in enumerate_subtrees(pre) if p and not has_holes(n)]
    if not pre_nodes:
        return None
    by_tree: Dict[AstNode, Tuple] = {}
    by_token: Dict[Tuple[str, str], Tuple] = {}
    for p, n in pre_nodes:
        by_tree.setdefault(n, p)
        if n.token is not None:
            by_token.setdefault((n.label, n.token), p)
    best = None
    best_key = None
    fn_rank = {"eq": 0, "lower": 1, "upper": 2}
    for q, m in enumerate_subtrees(post):
        if not q or has_holes(m):
            continue
        cands = []
        if m in by_tree:
            cands.append(("eq", by_tree[m]))
        elif m.token is not None:
            for fn in ("lower", "upper"):
                for (label, tok), p in by_token.items():
                    if label == m.label and tok != m.token and apply_case(fn, tok) == m.token:
                        cands.append((fn, p))
        for fn, p in cands:
            key = (-node_count(m), fn_rank[fn], p, q)
            if best_key is None or key < best_key:
                best_key = key
                best = (p, q, fn, _at(pre, p), m)
    return best


def _at(root: AstNode, path) -> AstNode:
    for step in path:
        root = root.children[step]
    return root


# -- anti-unification ------------------------------------------------------------


def hole_cost(da: Binding, db: Binding) -> float:
    """Per-hole cost: bound sizes plus a case term."""
    base = sum(node_count(n) for n in da) + sum(node_count(n) for n in db)
    ea, eb = not da, not db
    ha = len(da) == 1 and da[0].is_hole
    hb = len(db) == 1 and db[0].is_hole
    if ea and eb:
        return INF
    if (ha and eb) or (hb and ea):
        return base + 0.0
    if ea or eb:
        return base + 0.5
    if ha and hb:
        return base - 1.5
    return base - 0.5


@dataclass(frozen=True)
class AuResult:
    esp_star: Esp
    delta_a: Mapping[str, Binding]
    delta_b: Mapping[str, Binding]
    cost: float


class _UnionFind:
    def __init__(self):
        self.parent: Dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: str, y: str):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def same(self, x: str, y: str) -> bool:
        return self.find(x) == self.find(y)


def _eq_classes(preds) -> _UnionFind:
    uf = _UnionFind()
    for p in preds:
        if isinstance(p, Rel) and p.fn == "eq":
            uf.union(p.left, p.right)
    return uf


class _Side:
    """What the predicates of one input pattern let us conclude about
    bindings that may still mention its holes."""

    def __init__(self, esp: Esp):
        self.esp = esp
        self.eq = _eq_classes(esp.predicates)
        self.kind: Dict[str, str] = {}
        self.notnull = set()
        self.rels = set()
        for p in esp.predicates:
            if isinstance(p, IsKind):
                self.kind[p.hole] = p.label
                self.notnull.add(p.hole)
            elif isinstance(p, IsNotNull):
                self.notnull.add(p.hole)
            elif p.fn != "eq":
                self.rels.add((self.eq.find(p.left), p.fn, self.eq.find(p.right)))
        self.labels = self._resolved_labels()

    def _resolved_labels(self) -> Dict[str, Optional[str]]:
        out: Dict[str, Optional[str]] = dict(self.kind)
        for h in self.esp.holes:
            if h in out:
                continue
            labels = {g[h][0].label if len(g.get(h, ())) == 1 else None for g in self.esp.groundings}
            out[h] = labels.pop() if len(labels) == 1 else None
        return out

    def label_of(self, seq: Binding) -> Optional[str]:
        if len(seq) != 1:
            return None
        n = seq[0]
        return self.labels.get(n.token) if n.is_hole else n.label

    def is_notnull(self, seq: Binding) -> bool:
        return any(not n.is_hole or n.token in self.notnull for n in seq)

    def kind_of(self, seq: Binding) -> Optional[str]:
        if len(seq) != 1:
            return None
        n = seq[0]
        if n.is_hole:
            return self.kind.get(n.token)
        return n.label

    def seq_equal(self, a: Binding, b: Binding) -> bool:
        return len(a) == len(b) and all(self.node_equal(x, y) for x, y in zip(a, b))

    def node_equal(self, x: AstNode, y: AstNode) -> bool:
        if x.is_hole or y.is_hole:
            return x.is_hole and y.is_hole and self.eq.same(x.token, y.token)
        if x is y:
            return True
        return x.label == y.label and x.token == y.token and self.seq_equal(x.children, y.children)

    def rel(self, a: Binding, fn: str, b: Binding) -> bool:
        ga = not any(has_holes(n) for n in a)
        gb = not any(has_holes(n) for n in b)
        if ga and gb:
            return text_of_sequence(a) == apply_case(fn, text_of_sequence(b))
        if len(a) == 1 and len(b) == 1 and a[0].is_hole and b[0].is_hole:
            return (self.eq.find(a[0].token), fn, self.eq.find(b[0].token)) in self.rels
        return False


_ZERO = (0.0, 0)


def _add(x, y):
    return (x[0] + y[0], x[1] + y[1])


class _AntiUnifier:
    def __init__(self, a: Esp, b: Esp):
        self.sa = _Side(a)
        self.sb = _Side(b)
        self.memo: Dict[Tuple[AstNode, AstNode], Tuple] = {}
        self.list_memo: Dict[Tuple, Tuple] = {}
        self.holes: List[Tuple[str, Binding, Binding]] = []

    # cost of generalizing the single nodes x (from a) and y (from b)
    def node_cost(self, x: AstNode, y: AstNode):
        key = (x, y)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        hole = self.run_cost((x,), (y,))
        best = (hole, "hole")
        if not x.is_hole and not y.is_hole and x.label == y.label and x.token == y.token:
            if x == y and not has_holes(x):
                best = ((float(node_count(x)), 0), "keep")
            elif x.token is None:
                inner = _add((1.0, 0), self.list_cost(x.children, y.children)[0][0][0])
                if inner <= hole:
                    best = (inner, "recurse")
        self.memo[key] = best
        return best

    def run_cost(self, da: Binding, db: Binding):
        c = hole_cost(da, db)
        if not da or not db:
            mismatch = 0
        else:
            la, lb = self.sa.label_of(da), self.sb.label_of(db)
            mismatch = 0 if la is not None and la == lb else 1
        return (c, mismatch)

    def list_cost(self, xs: Sequence[AstNode], ys: Sequence[AstNode]):
        key = (tuple(xs), tuple(ys))
        hit = self.list_memo.get(key)
        if hit is None:
            hit = self.list_memo[key] = self._list_cost(xs, ys)
        return hit

    def _list_cost(self, xs, ys):
        m, n = len(xs), len(ys)
        dp: List[List[Tuple]] = [[None] * (n + 1) for _ in range(m + 1)]
        choice: List[List[Tuple]] = [[None] * (n + 1) for _ in range(m + 1)]
        dp[m][n] = _ZERO
        for i in range(m, -1, -1):
            for j in range(n, -1, -1):
                if i == m and j == n:
                    continue
                best = None
                bchoice = None
                if i < m and j < n:
                    c = _add(self.node_cost(xs[i], ys[j])[0], dp[i + 1][j + 1])
                    best, bchoice = c, ("pair",)
                for x in range(0, m - i + 1):
                    for y in range(0, n - j + 1):
                        if x + y == 0:
                            continue
                        c = _add(self.run_cost(tuple(xs[i:i + x]), tuple(ys[j:j + y])), dp[i + x][j + y])
                        if best is None or c < best:
                            best, bchoice = c, ("run", x, y)
                dp[i][j] = best
                choice[i][j] = bchoice
        return dp, choice

    def new_hole(self, da: Binding, db: Binding) -> AstNode:
        hid = str(len(self.holes) + 1)
        self.holes.append((hid, tuple(da), tuple(db)))
        return make_hole(hid)

    def build(self, x: AstNode, y: AstNode) -> AstNode:
        _, how = self.node_cost(x, y)
        if how == "keep":
            return x
        if how == "hole":
            return self.new_hole((x,), (y,))
        return AstNode(x.label, None, self.build_list(x.children, y.children))

    def build_list(self, xs, ys) -> List[AstNode]:
        _, choice = self.list_cost(xs, ys)
        out = []
        i = j = 0
        while i < len(xs) or j < len(ys):
            c = choice[i][j]
            if c[0] == "pair":
                out.append(self.build(xs[i], ys[j]))
                i, j = i + 1, j + 1
            else:
                _, x, y = c
                out.append(self.new_hole(xs[i:i + x], ys[j:j + y]))
                i, j = i + x, j + y
        return out


def anti_unify(a: Esp, b: Esp) -> AuResult:
    """Least-cost generalization of two patterns of equal length."""
    if len(a.templates) != len(b.templates):
        raise LengthMismatch(f"cannot anti-unify patterns of length {len(a)} and {len(b)}")
    au = _AntiUnifier(a, b)
    templates = []
    for ta, tb in zip(a.templates, b.templates):
        pre = au.build(ta.pre, tb.pre)
        post = au.build(ta.post, tb.post)
        templates.append(EditTemplate(pre, post))
    delta_a = {h: da for h, da, _ in au.holes}
    delta_b = {h: db for h, _, db in au.holes}
    preds = _infer_predicates(au.holes, au.sa, au.sb)
    groundings = [
        {h: resolve_binding(d, g) for h, d in delta_a.items()} for g in a.groundings
    ] + [
        {h: resolve_binding(d, g) for h, d in delta_b.items()} for g in b.groundings
    ]
    esp = Esp(tuple(templates), frozenset(preds), a.starred or b.starred, tuple(groundings))
    cost = au_cost(esp, delta_a, delta_b, a.size + b.size)
    return AuResult(esp, delta_a, delta_b, cost)


def _infer_predicates(holes, sa: _Side, sb: _Side) -> List[Predicate]:
    preds: List[Predicate] = []
    for h, da, db in holes:
        if sa.is_notnull(da) and sb.is_notnull(db):
            preds.append(IsNotNull(h))
        ka = sa.kind_of(da)
        if ka is not None and ka == sb.kind_of(db):
            preds.append(IsKind(h, ka))
    for h1, da1, db1 in holes:
        for h2, da2, db2 in holes:
            if h1 == h2:
                continue
            equal = sa.seq_equal(da1, da2) and sb.seq_equal(db1, db2)
            if equal:
                if int(h1) > int(h2):
                    preds.append(Rel(h1, "eq", h2))
                continue
            for fn in ("lower", "upper"):
                if sa.rel(da1, fn, da2) and sb.rel(db1, fn, db2):
                    preds.append(Rel(h1, fn, h2))
    return preds


def au_cost(esp_star: Esp, delta_a: Mapping[str, Binding], delta_b: Mapping[str, Binding], denominator: Optional[float] = None) -> float:
    """Generalization cost of a merge.

    Concrete nodes of the result count one each; holes are charged once
    per class of holes linked by equality predicates. ``denominator``
    defaults to the sizes of the two inputs rebuilt from the substitutions.
    """
    holes = esp_star.holes
    uf = _eq_classes(esp_star.predicates)
    classes: Dict[str, float] = {}
    for h in holes:
        c = hole_cost(delta_a[h], delta_b[h])
        r = uf.find(h)
        classes[r] = max(classes.get(r, -INF), c)
    numerator = esp_star.size - len(holes) + sum(classes.values())
    if denominator is None:
        denominator = 0
        for side in (delta_a, delta_b):
            for t in esp_star.templates:
                denominator += _instantiated_size(t.pre, side) + _instantiated_size(t.post, side)
    if math.isinf(numerator):
        return INF
    return numerator / denominator


def _instantiated_size(t: AstNode, sigma) -> int:
    if t.is_hole:
        return sum(node_count(n) for n in sigma[t.token])
    return 1 + sum(
        sum(node_count(n) for n in sigma[c.token]) if c.is_hole else _instantiated_size(c, sigma)
        for c in t.children
    )


# -- clustering ---------------------------------------------------------------


def expand_star_spec(sketch: Sketch, spec: Sequence[Sequence[Edit]]) -> List[Tuple[Edit, ...]]:
    """Cut every sequence ``ed_1..ed_m`` into ``ed_1..ed_{n-1} ed_k`` for
    ``n <= k <= m``. Unstarred sketches keep the sequences of length n."""
    n = len(sketch)
    out = []
    seen = set()
    for seq in spec:
        seq = tuple(seq)
        if not sketch.starred:
            cands = [seq] if len(seq) == n else []
        else:
            cands = [seq[:n - 1] + (seq[k],) for k in range(n - 1, len(seq))]
        for c in cands:
            key = tuple(e.key for e in c)
            if key not in seen:
                seen.add(key)
                out.append(c)
    return out


@dataclass
class Dendrogram:
    nodes: List[Esp] = field(default_factory=list)
    children: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    leaves: Dict[int, Tuple[Edit, ...]] = field(default_factory=dict)
    depth: Dict[int, int] = field(default_factory=dict)
    costs: Dict[int, float] = field(default_factory=dict)
    results: Dict[int, AuResult] = field(default_factory=dict)

    @property
    def internal(self) -> List[int]:
        return sorted(self.children)


def build_dendrogram(sketch: Sketch, spec: Sequence[Sequence[Edit]]) -> Dendrogram:
    seqs = expand_star_spec(sketch, spec)
    d = Dendrogram()
    for seq in seqs:
        idx = len(d.nodes)
        d.nodes.append(generate_pattern(seq, starred=sketch.starred))
        d.leaves[idx] = seq
        d.depth[idx] = 0
    active = list(range(len(d.nodes)))
    cache: Dict[Tuple[int, int], AuResult] = {}
    while len(active) > 1:
        best = None
        for x in range(len(active)):
            for y in range(x + 1, len(active)):
                i, j = active[x], active[y]
                if (i, j) not in cache:
                    cache[(i, j)] = anti_unify(d.nodes[i], d.nodes[j])
                c = cache[(i, j)].cost
                if math.isinf(c):
                    continue
                if best is None or c < best[0]:
                    best = (c, i, j)
        if best is None:
            break
        c, i, j = best
        res = cache[(i, j)]
        idx = len(d.nodes)
        d.nodes.append(canonicalize(res.esp_star))
        d.children[idx] = (i, j)
        d.depth[idx] = max(d.depth[i], d.depth[j]) + 1
        d.costs[idx] = c
        d.results[idx] = res
        active = [k for k in active if k not in (i, j)] + [idx]
    return d


def learn_patterns(sketch: Sketch, spec: Sequence[Sequence[Edit]]) -> List[Esp]:
    """All merged patterns of the dendrogram, or the lone leaf when the
    (expanded) spec holds a single sequence."""
    d = build_dendrogram(sketch, spec)
    if not d.children:
        return list(d.nodes[:1]) if len(d.nodes) == 1 else []
    return [d.nodes[k] for k in d.internal]
