"""Templates with holes, hole predicates, edit sequence patterns and matching.

A template is an :class:`AstNode` tree whose ``Hole`` leaves stand for a
(possibly empty) run of sibling nodes. A substitution maps hole ids to tuples
of nodes and is applied by splicing each bound run into the parent's child
list.
"""
from __future__ import annotations

import enum
import functools
import json
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .ast import HOLE_LABEL, AstNode, deserialize, node_count, serialize, text_of_sequence

__all__ = [
    "MAX_ALIGNMENTS",
    "Binding",
    "Substitution",
    "UnboundHole",
    "UnresolvedHole",
    "TooManyAlignments",
    "IsNotNull",
    "IsKind",
    "Rel",
    "Predicate",
    "EditTemplate",
    "Esp",
    "MatchStatus",
    "MatchResult",
    "make_hole",
    "hole_ids",
    "has_holes",
    "apply",
    "match_template",
    "match_edit",
    "eval_predicate",
    "predicate_holes",
    "match_sequence",
    "match_prefix",
    "canonicalize",
    "isomorphic",
    "format_predicate",
    "parse_predicate",
    "PatternRecord",
    "dump_patterns",
    "load_patterns",
    "apply_case",
]

MAX_ALIGNMENTS = 10_000

Binding = Tuple[AstNode, ...]
Substitution = Dict[str, Binding]


class UnboundHole(KeyError):
    pass


class UnresolvedHole(ValueError):
    pass


class TooManyAlignments(RuntimeError):
    pass


# -- holes ---------------------------------------------------------------------


def make_hole(hole_id) -> AstNode:
    return AstNode(HOLE_LABEL, str(hole_id))


def hole_ids(t: AstNode) -> List[str]:
    """Hole ids of a template in pre-order."""
    out = []
    stack = [t]
    while stack:
        n = stack.pop()
        if n.is_hole:
            out.append(n.token)
        else:
            stack.extend(reversed(n.children))
    return out


def has_holes(t: AstNode) -> bool:
    if t.is_hole:
        return True
    return any(has_holes(c) for c in t.children)


def _hole_key(h: str):
    return (0, int(h), "") if h.isdigit() else (1, 0, h)


# -- predicates ----------------------------------------------------------------

FUNCTIONS = ("eq", "lower", "upper")


@dataclass(frozen=True)
class IsNotNull:
    hole: str


@dataclass(frozen=True)
class IsKind:
    hole: str
    label: str


@dataclass(frozen=True)
class Rel:
    """``text(left) == fn(text(right))``."""

    left: str
    fn: str
    right: str

    def __post_init__(self):
        if self.fn not in FUNCTIONS:
            raise ValueError(f"unknown predicate function {self.fn!r}")


Predicate = Union[IsNotNull, IsKind, Rel]


def _normalize(p: Predicate) -> Predicate:
    # equality is symmetric; store it with the larger hole on the left
    if isinstance(p, Rel) and p.fn == "eq" and _hole_key(p.left) < _hole_key(p.right):
        return Rel(p.right, "eq", p.left)
    return p


def predicate_holes(p: Predicate) -> Tuple[str, ...]:
    if isinstance(p, Rel):
        return (p.left, p.right)
    return (p.hole,)


def _predicate_key(p: Predicate):
    if isinstance(p, IsNotNull):
        return (0, _hole_key(p.hole), "", _hole_key(""))
    if isinstance(p, IsKind):
        return (1, _hole_key(p.hole), p.label, _hole_key(""))
    return (2, _hole_key(p.left), p.fn, _hole_key(p.right))


def apply_case(fn: str, text: str) -> str:
    """Apply a predicate function; case changes touch the first character only."""
    if fn == "eq" or not text:
        return text
    if fn == "lower":
        return text[0].lower() + text[1:]
    return text[0].upper() + text[1:]


def _ground_text(seq: Binding) -> str:
    if any(has_holes(n) for n in seq):
        raise UnresolvedHole("binding still contains holes")
    return text_of_sequence(seq)


def eval_predicate(
    p: Predicate,
    sigma: Mapping[str, Binding],
    resolve: Optional[Callable[[Binding], Binding]] = None,
) -> bool:
    """Evaluate ``p`` under ``sigma``.

    ``resolve`` maps a binding that still mentions holes to a concrete one.
    """

    def get(h):
        if h not in sigma:
            raise UnresolvedHole(f"hole {h} is not bound")
        seq = sigma[h]
        if resolve is not None:
            seq = resolve(seq)
        return seq

    if isinstance(p, IsNotNull):
        return len(get(p.hole)) > 0
    if isinstance(p, IsKind):
        seq = get(p.hole)
        return len(seq) == 1 and seq[0].label == p.label
    return _ground_text(get(p.left)) == apply_case(p.fn, _ground_text(get(p.right)))


def format_predicate(p: Predicate) -> str:
    if isinstance(p, IsNotNull):
        return f"notnull {p.hole}"
    if isinstance(p, IsKind):
        return f"kind {p.hole} {p.label}"
    return f"rel {p.left} {p.fn} {p.right}"


def parse_predicate(text: str) -> Predicate:
    parts = text.split()
    if len(parts) == 2 and parts[0] == "notnull":
        return IsNotNull(parts[1])
    if len(parts) == 3 and parts[0] == "kind":
        return IsKind(parts[1], parts[2])
    if len(parts) == 4 and parts[0] == "rel" and parts[2] in FUNCTIONS:
        return _normalize(Rel(parts[1], parts[2], parts[3]))
    raise ValueError(f"malformed predicate {text!r}")


# -- templates and patterns ------------------------------------------------------


@dataclass(frozen=True)
class EditTemplate:
    pre: AstNode
    post: AstNode

    @property
    def holes(self) -> List[str]:
        return hole_ids(self.pre) + hole_ids(self.post)

    @property
    def size(self) -> int:
        return node_count(self.pre) + node_count(self.post)

    def __str__(self):
        return f"{serialize(self.pre)} -> {serialize(self.post)}"


@dataclass(frozen=True)
class Esp:
    """An edit sequence pattern: templates, an optional trailing star and
    hole predicates.

    ``groundings`` holds one concrete substitution per supporting edit
    sequence; it is bookkeeping and takes no part in equality.
    """

    templates: Tuple[EditTemplate, ...]
    predicates: FrozenSet[Predicate] = frozenset()
    starred: bool = False
    groundings: Tuple[Mapping[str, Binding], ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "templates", tuple(self.templates))
        object.__setattr__(self, "predicates", frozenset(_normalize(p) for p in self.predicates))
        object.__setattr__(self, "groundings", tuple(self.groundings))
        if not self.templates:
            raise ValueError("an ESP needs at least one template")
        seen = set()
        for t in self.templates:
            for h in t.holes:
                if h in seen:
                    raise ValueError(f"hole {h} occurs twice")
                seen.add(h)
        for p in self.predicates:
            missing = [h for h in predicate_holes(p) if h not in seen]
            if missing:
                raise ValueError(f"predicate {format_predicate(p)} names unknown hole {missing[0]}")

    def __len__(self):
        return len(self.templates)

    @property
    def holes(self) -> List[str]:
        return [h for t in self.templates for h in t.holes]

    def template_holes(self, upto: int) -> FrozenSet[str]:
        """Holes of the first ``upto`` templates."""
        return frozenset(h for t in self.templates[:upto] for h in t.holes)

    def predicates_within(self, holes: Iterable[str]) -> List[Predicate]:
        hs = set(holes)
        return [p for p in self.sorted_predicates() if all(h in hs for h in predicate_holes(p))]

    def sorted_predicates(self) -> List[Predicate]:
        return sorted(self.predicates, key=_predicate_key)

    @property
    def size(self) -> int:
        return sum(t.size for t in self.templates)

    def __str__(self):
        lines = []
        for k, t in enumerate(self.templates, 1):
            star = "*" if self.starred and k == len(self.templates) else ""
            lines.append(f"[{k}{star}] {t}")
        if self.predicates:
            lines.append("where " + ", ".join(format_predicate(p) for p in self.sorted_predicates()))
        return "\n".join(lines)


def canonicalize(esp: Esp) -> Esp:
    """Renumber holes 1..k in order of first appearance."""
    mapping = {h: str(k) for k, h in enumerate(esp.holes, 1)}
    return rename_holes(esp, mapping)


def rename_holes(esp: Esp, mapping: Mapping[str, str]) -> Esp:
    def tree(t: AstNode) -> AstNode:
        if t.is_hole:
            return make_hole(mapping[t.token])
        if not t.children:
            return t
        return AstNode(t.label, t.token, [tree(c) for c in t.children], t.span)

    def pred(p: Predicate) -> Predicate:
        if isinstance(p, IsNotNull):
            return IsNotNull(mapping[p.hole])
        if isinstance(p, IsKind):
            return IsKind(mapping[p.hole], p.label)
        return Rel(mapping[p.left], p.fn, mapping[p.right])

    templates = tuple(EditTemplate(tree(t.pre), tree(t.post)) for t in esp.templates)
    groundings = tuple({mapping[h]: v for h, v in g.items() if h in mapping} for g in esp.groundings)
    return Esp(templates, frozenset(pred(p) for p in esp.predicates), esp.starred, groundings)


def isomorphic(a: Esp, b: Esp) -> bool:
    """Equal up to a renaming of holes."""
    return canonicalize(a) == canonicalize(b)


# -- substitution application --------------------------------------------------


def apply(t: AstNode, sigma: Mapping[str, Binding]) -> AstNode:
    """Instantiate a template. A hole at the root needs a single-node binding."""
    if t.is_hole:
        seq = _lookup(sigma, t.token)
        if len(seq) != 1:
            raise ValueError(f"root hole {t.token} must bind exactly one node")
        return seq[0]
    return _apply(t, sigma)


def _lookup(sigma, h):
    try:
        return sigma[h]
    except KeyError:
        raise UnboundHole(h) from None


def _apply(t: AstNode, sigma) -> AstNode:
    if not t.children:
        return t
    out = []
    changed = False
    for c in t.children:
        if c.is_hole:
            out.extend(_lookup(sigma, c.token))
            changed = True
        else:
            n = _apply(c, sigma)
            changed = changed or n is not c
            out.append(n)
    return t.with_children(out) if changed else t


# -- matching ------------------------------------------------------------------


class _Budget:
    __slots__ = ("left",)

    def __init__(self, limit: int):
        self.left = limit

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise TooManyAlignments()


def match_template(t: AstNode, n: AstNode, limit: int = MAX_ALIGNMENTS) -> List[Substitution]:
    """Every substitution ``s`` with ``apply(t, s) == n``.

    Alternatives are produced leftmost-shortest first. Raises
    :class:`TooManyAlignments` when more than ``limit`` partial alignments
    are explored.
    """
    budget = _Budget(limit)
    return [dict(s) for s in _match(t, n, (), budget)]


@functools.lru_cache(maxsize=1 << 16)
def _shape(t: AstNode) -> Tuple[bool, Tuple[int, ...], Tuple[bool, ...]]:
    """``(has holes, fixed children after i, any hole after i)`` of a template
    node, cached because the same templates are matched over and over."""
    kids = t.children
    fixed, holes = [0] * (len(kids) + 1), [False] * (len(kids) + 1)
    for i in range(len(kids) - 1, -1, -1):
        fixed[i] = fixed[i + 1] + (0 if kids[i].is_hole else 1)
        holes[i] = holes[i + 1] or kids[i].is_hole
    return has_holes(t), tuple(fixed), tuple(holes)


def _match(t: AstNode, n: AstNode, acc: tuple, budget: _Budget) -> Iterator[tuple]:
    if t.is_hole:
        budget.spend()
        yield acc + ((t.token, (n,)),)
        return
    if t.label != n.label or t.token != n.token:
        return
    shape = _shape(t)
    if not shape[0]:
        if t == n:
            yield acc
        return
    if len(n.children) < shape[1][0]:
        return
    yield from _match_list(t.children, 0, n.children, 0, acc, budget, shape)


def _match_list(ts, i, ns, j, acc, budget, shape) -> Iterator[tuple]:
    if i == len(ts):
        if j == len(ns):
            yield acc
        return
    t = ts[i]
    rest_fixed = shape[1][i + 1]
    if t.is_hole:
        hi = len(ns) - j - rest_fixed
        lo = 0 if shape[2][i + 1] else hi
        for k in range(max(lo, 0), hi + 1):
            budget.spend()
            yield from _match_list(ts, i + 1, ns, j + k, acc + ((t.token, tuple(ns[j:j + k])),), budget, shape)
        return
    if j >= len(ns) or len(ns) - j < rest_fixed + 1:
        return
    for acc2 in _match(t, ns[j], acc, budget):
        yield from _match_list(ts, i + 1, ns, j + 1, acc2, budget, shape)


def match_edit(edit, et: EditTemplate, limit: int = MAX_ALIGNMENTS) -> List[Substitution]:
    """Joint matches of an edit's localized pre and post subtrees."""
    pres = match_template(et.pre, edit.loc_pre, limit)
    if not pres:
        return []
    posts = match_template(et.post, edit.loc_post, limit)
    if len(pres) * len(posts) > limit:
        raise TooManyAlignments()
    return [{**a, **b} for a in pres for b in posts]


class MatchStatus(enum.Enum):
    UNIQUE = "unique"
    AMBIGUOUS = "ambiguous"
    NO_MATCH = "nomatch"


@dataclass(frozen=True)
class MatchResult:
    status: MatchStatus
    sigma: Optional[Mapping[str, Binding]] = None

    @property
    def unique(self) -> bool:
        return self.status is MatchStatus.UNIQUE


NO_MATCH = MatchResult(MatchStatus.NO_MATCH)
AMBIGUOUS = MatchResult(MatchStatus.AMBIGUOUS)


def _satisfies(preds: Sequence[Predicate], sigma) -> bool:
    return all(eval_predicate(p, sigma) for p in preds)


def _newly_checkable(preds, before: FrozenSet[str], after: FrozenSet[str]):
    return [
        p for p in preds
        if all(h in after for h in predicate_holes(p)) and not all(h in before for h in predicate_holes(p))
    ]


def extend_solutions(
    partial: List[Substitution],
    bound: FrozenSet[str],
    edit,
    et: EditTemplate,
    predicates: Sequence[Predicate],
    limit: int = MAX_ALIGNMENTS,
    subs: Optional[List[Substitution]] = None,
) -> Tuple[List[Substitution], FrozenSet[str]]:
    """Join ``partial`` with the matches of one more edit, keeping only
    substitutions that satisfy every predicate that just became checkable.
    ``subs`` may carry the already computed matches of ``edit``."""
    if subs is None:
        subs = match_edit(edit, et, limit)
    now = bound | frozenset(et.holes)
    if not subs:
        return [], now
    active = _newly_checkable(predicates, bound, now)
    out = []
    for s in partial:
        for t in subs:
            m = {**s, **t}
            if _satisfies(active, m):
                out.append(m)
                if len(out) > limit:
                    raise TooManyAlignments()
    return out, now


def _solutions(edits, templates, predicates, limit) -> List[Substitution]:
    partial: List[Substitution] = [{}]
    bound: FrozenSet[str] = frozenset()
    for e, et in zip(edits, templates):
        partial, bound = extend_solutions(partial, bound, e, et, predicates, limit)
        if not partial:
            return []
    return partial


def _result(solutions: List[Substitution]) -> MatchResult:
    if not solutions:
        return NO_MATCH
    if len(solutions) > 1:
        return AMBIGUOUS
    return MatchResult(MatchStatus.UNIQUE, solutions[0])


def match_prefix(edits: Sequence, esp: Esp, limit: int = MAX_ALIGNMENTS) -> MatchResult:
    """Match ``edits`` against the first ``len(edits)`` templates using the
    predicates whose holes all live in those templates."""
    k = len(edits)
    if k == 0 or k > len(esp.templates):
        return NO_MATCH
    preds = esp.predicates_within(esp.template_holes(k))
    try:
        return _result(_solutions(edits, esp.templates[:k], preds, limit))
    except TooManyAlignments:
        return AMBIGUOUS


def match_sequence(edits: Sequence, esp: Esp, limit: int = MAX_ALIGNMENTS) -> MatchResult:
    """Match a whole edit sequence.

    A starred ESP of length n accepts ``ed_1..ed_m`` (m >= n) when every
    expansion ``ed_1..ed_{n-1} ed_k`` matches; the reported substitution is
    the one of the last expansion.
    """
    n = len(esp.templates)
    if not esp.starred:
        if len(edits) != n:
            return NO_MATCH
        return match_prefix(edits, esp, limit)
    if len(edits) < n:
        return NO_MATCH
    preds = esp.sorted_predicates()
    try:
        prefix = _solutions(edits[:n - 1], esp.templates[:n - 1], preds, limit)
        if not prefix:
            return NO_MATCH
        bound = esp.template_holes(n - 1)
        last = esp.templates[n - 1]
        valid = []
        for p in prefix:
            per_expansion = []
            for e in edits[n - 1:]:
                ext, _ = extend_solutions([p], bound, e, last, preds, limit)
                if not ext:
                    break
                per_expansion.append(ext)
            else:
                valid.append(per_expansion)
                if len(valid) > 1:
                    return AMBIGUOUS
        if not valid:
            return NO_MATCH
        if any(len(ext) > 1 for ext in valid[0]):
            return AMBIGUOUS
        return MatchResult(MatchStatus.UNIQUE, valid[0][-1][0])
    except TooManyAlignments:
        return AMBIGUOUS


# -- pattern files -------------------------------------------------------------


@dataclass(frozen=True)
class PatternRecord:
    rank: int
    esp: Esp
    sketch: str = ""
    depth: int = 0


def _record_to_json(r: PatternRecord) -> str:
    return json.dumps(
        {
            "rank": r.rank,
            "sketch": r.sketch,
            "depth": r.depth,
            "templates": [[serialize(t.pre), serialize(t.post)] for t in r.esp.templates],
            "star": r.esp.starred,
            "predicates": [format_predicate(p) for p in r.esp.sorted_predicates()],
        }
    )


def dump_patterns(records: Iterable[PatternRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(_record_to_json(r) + "\n")


def load_patterns(path: str) -> List[PatternRecord]:
    """Read a pattern file; raises ``ValueError`` naming ``path:line`` on bad records."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                templates = tuple(EditTemplate(deserialize(a), deserialize(b)) for a, b in rec["templates"])
                preds = frozenset(parse_predicate(p) for p in rec.get("predicates", []))
                esp = Esp(templates, preds, bool(rec.get("star", False)))
                out.append(PatternRecord(int(rec.get("rank", len(out) + 1)), esp, str(rec.get("sketch", "")), int(rec.get("depth", 0))))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out
