"""Prediction replay, outcome classification, metrics and greedy ranking."""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .ast import AstNode, Span, enumerate_subtrees, replace_at
from .diff import Edit, localize
from .template import (
    AMBIGUOUS,
    NO_MATCH,
    Binding,
    EditTemplate,
    Esp,
    IsKind,
    MatchResult,
    MatchStatus,
    Rel,
    TooManyAlignments,
    apply,
    apply_case,
    eval_predicate,
    extend_solutions,
    hole_ids,
    match_edit,
    match_prefix,
    match_template,
    predicate_holes,
)
from .trace import DEFAULT_MAX_DIFF_NODES, Trace, Version, enumerate_edits

__all__ = [
    "Outcome",
    "PredictionOutcome",
    "EvalCounts",
    "Metrics",
    "TraceIndex",
    "ReplayContext",
    "predict",
    "predict_naive",
    "classify",
    "evaluate",
    "greedy_select",
    "filter_and_select",
    "compute_metrics",
    "f_gamma",
    "ensemble_outcomes",
    "sequence_traces",
]

Chain = Tuple[Edit, ...]
Point = Tuple[str, int]


class Outcome(enum.Enum):
    NO_PREDICTION = "none"
    CORRECT = "correct"
    WRONG = "wrong"


@dataclass(frozen=True)
class PredictionOutcome:
    kind: Outcome
    predicted: Optional[AstNode] = None
    matched: Optional[int] = None


NO_PREDICTION = PredictionOutcome(Outcome.NO_PREDICTION)


# -- per-trace precomputation ----------------------------------------------------


class TraceIndex:
    """Edits of one trace grouped by end version, plus replay cursors."""

    def __init__(self, trace: Trace, max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES):
        self.trace = trace
        self.edits = enumerate_edits(trace, max_diff_nodes)
        self.ending_at: Dict[int, List[Edit]] = defaultdict(list)
        for e in self.edits:
            self.ending_at[e.j].append(e)
        for v in self.ending_at.values():
            v.sort(key=lambda e: -e.i)
        self._cursor: Dict[int, Optional[int]] = {}

    def __len__(self):
        return len(self.trace.versions)

    def cursor(self, m: int) -> Optional[int]:
        """Recorded cursor of ``v_m``, else where the next real edit starts."""
        if m not in self._cursor:
            vs = self.trace.versions
            c = vs[m].cursor
            if c is None and m + 1 < len(vs):
                loc = localize(vs[m].tree, vs[m + 1].tree)
                if loc is not None and loc[0].span is not None:
                    c = loc[0].span.start
            self._cursor[m] = c
        return self._cursor[m]

    def chains(self, m: int, k: int) -> List[Chain]:
        """Contiguous chains of ``k`` edits ending at ``v_m`` in replay order."""
        if k == 1:
            return [(e,) for e in self.ending_at.get(m, ())]
        out = []
        for e in self.ending_at.get(m, ()):
            for c in self.chains(e.i, k - 1):
                out.append(c + (e,))
        return sorted(out, key=_chain_order)


def _chain_order(chain: Chain):
    return tuple(-e.i for e in reversed(chain))


# -- Predict -----------------------------------------------------------------------


def _candidate_subtrees(tree: AstNode, cursor: Optional[int]):
    nodes = list(enumerate_subtrees(tree))
    if cursor is not None and tree.span is not None:
        nodes = [(p, n) for p, n in nodes if n.span is not None and n.span.contains(cursor)]
    order = {p: k for k, (p, _) in enumerate(nodes)}
    nodes.sort(key=lambda pn: (-len(pn[0]), order[pn[0]]))
    return nodes


def _ground_post_holes(post_holes: Sequence[str], sigma: Dict[str, Binding], esp: Esp) -> Optional[Dict[str, Binding]]:
    """Bind every post-template hole through equality or case predicates."""
    kinds = {p.hole: p.label for p in esp.predicates if isinstance(p, IsKind)}
    rels = [p for p in esp.sorted_predicates() if isinstance(p, Rel)]
    pending = [h for h in post_holes if h not in sigma]
    sigma = dict(sigma)
    while pending:
        progress = False
        for h in list(pending):
            value = None
            for p in rels:
                if p.fn == "eq":
                    other = p.right if p.left == h else p.left if p.right == h else None
                    if other is not None and other in sigma:
                        value = sigma[other]
                        break
            if value is None:
                for p in rels:
                    if p.fn != "eq" and p.left == h and p.right in sigma:
                        src = sigma[p.right]
                        if len(src) == 1 and src[0].token is not None:
                            label = kinds.get(h, src[0].label)
                            value = (AstNode(label, apply_case(p.fn, src[0].token)),)
                            break
            if value is not None:
                if h in kinds and len(value) == 1 and value[0].label != kinds[h] and value[0].token is not None:
                    value = (AstNode(kinds[h], value[0].token),)
                sigma[h] = value
                pending.remove(h)
                progress = True
        if not progress:
            return None
    return sigma


def _predict_with(template: EditTemplate, sigma: Mapping[str, Binding], esp: Esp, upto: int, tree: AstNode, cursor: Optional[int]) -> Optional[AstNode]:
    preds = esp.predicates_within(esp.template_holes(upto))
    pre_holes = set(hole_ids(template.pre))
    post_holes = hole_ids(template.post)
    for path, node in _candidate_subtrees(tree, cursor):
        try:
            subs = match_template(template.pre, node)
        except TooManyAlignments:
            continue
        for s in subs:
            full = {**sigma, **s}
            early = [p for p in preds if all(h in full for h in predicate_holes(p)) and any(h in pre_holes for h in predicate_holes(p))]
            if not all(eval_predicate(p, full) for p in early):
                continue
            grounded = _ground_post_holes(post_holes, full, esp)
            if grounded is None:
                continue
            if not all(eval_predicate(p, grounded) for p in preds if all(h in grounded for h in predicate_holes(p))):
                continue
            try:
                replacement = apply(template.post, grounded)
            except (KeyError, ValueError):
                continue
            new = replace_at(tree, path, replacement)
            if new != tree:
                return new
    return None


def _predict_from_match(esp: Esp, chain: Chain, sigma: Mapping[str, Binding], index: TraceIndex, m: int) -> Optional[AstNode]:
    k, n = len(chain), len(esp.templates)
    tree = index.trace.versions[m].tree
    if k < n:
        return _predict_with(esp.templates[k], sigma, esp, k + 1, tree, index.cursor(m))
    if esp.starred:
        keep = esp.template_holes(n - 1)
        restricted = {h: v for h, v in sigma.items() if h in keep}
        return _predict_with(esp.templates[n - 1], restricted, esp, n, tree, index.cursor(m))
    return None


def _max_prefix(esp: Esp) -> int:
    n = len(esp.templates)
    return n if esp.starred else n - 1


def predict_naive(esp: Esp, index: TraceIndex, m: int) -> Optional[AstNode]:
    """Brute-force prediction: every chain ending at ``v_m`` is matched
    from scratch."""
    for k in range(1, _max_prefix(esp) + 1):
        for chain in index.chains(m, k):
            res = match_prefix(chain, esp)
            if res.unique:
                out = _predict_from_match(esp, chain, res.sigma, index, m)
                if out is not None:
                    return out
    return None


class PrefixState:
    """Prefix matches of one ESP over one trace, built version by version.

    ``states[j]`` maps each chain ending at ``v_j`` (of length up to the
    longest usable prefix) to its solutions, or ``None`` when the
    alignment budget overflowed.
    """

    def __init__(self, esp: Esp, index: TraceIndex):
        self.esp = esp
        self.index = index
        self.limit = _max_prefix(esp)
        self.states: Dict[int, Dict[Chain, Optional[List]]] = {}
        self._preds = [esp.predicates_within(esp.template_holes(k + 1)) for k in range(len(esp.templates))]
        self._bound = [esp.template_holes(k) for k in range(len(esp.templates) + 1)]
        self._subs: Dict[Tuple[Edit, int], Optional[List]] = {}

    def at(self, j: int) -> Dict[Chain, Optional[List]]:
        if j in self.states:
            return self.states[j]
        out: Dict[Chain, Optional[List]] = {}
        if self.limit >= 1:
            for e in self.index.ending_at.get(j, ()):
                out[(e,)] = self._extend([{}], frozenset(), e, 0)
                if self.limit >= 2:
                    for chain, sols in self.at(e.i).items():
                        if len(chain) >= self.limit:
                            continue
                        if sols is None:
                            out[chain + (e,)] = None
                        elif sols:
                            k = len(chain)
                            out[chain + (e,)] = self._extend(sols, self._bound[k], e, k)
                        else:
                            out[chain + (e,)] = []
        self.states[j] = out
        return out

    def _matches(self, e: Edit, k: int):
        key = (e, k)
        if key not in self._subs:
            try:
                self._subs[key] = match_edit(e, self.esp.templates[k])
            except TooManyAlignments:
                self._subs[key] = None
        return self._subs[key]

    def _extend(self, sols, bound, e, k):
        subs = self._matches(e, k)
        if subs is None:
            return None
        if not subs:
            return []
        try:
            got, _ = extend_solutions(sols, bound, e, self.esp.templates[k], self._preds[k], subs=subs)
        except TooManyAlignments:
            return None
        return got

    def result(self, chain: Chain) -> MatchResult:
        sols = self.at(chain[-1].j)[chain]
        if sols is None:
            return AMBIGUOUS
        if not sols:
            return NO_MATCH
        if len(sols) > 1:
            return AMBIGUOUS
        return MatchResult(MatchStatus.UNIQUE, sols[0])

    def predict(self, m: int) -> Optional[AstNode]:
        by_len: Dict[int, List[Chain]] = defaultdict(list)
        for chain in self.at(m):
            by_len[len(chain)].append(chain)
        for k in sorted(by_len):
            for chain in sorted(by_len[k], key=_chain_order):
                res = self.result(chain)
                if res.unique:
                    out = _predict_from_match(self.esp, chain, res.sigma, self.index, m)
                    if out is not None:
                        return out
        return None


def predict(esp: Esp, trace, m: int, max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES) -> Optional[AstNode]:
    """Predicted next version after ``v_m`` or ``None``."""
    index = trace if isinstance(trace, TraceIndex) else TraceIndex(trace, max_diff_nodes)
    if not 0 <= m < len(index):
        raise IndexError(f"version {m} out of range")
    return PrefixState(esp, index).predict(m)


def _outcome(index: TraceIndex, m: int, predicted: Optional[AstNode]) -> PredictionOutcome:
    if predicted is None:
        return NO_PREDICTION
    for l in range(m + 1, len(index)):
        if index.trace.versions[l].tree == predicted:
            return PredictionOutcome(Outcome.CORRECT, predicted, l)
    return PredictionOutcome(Outcome.WRONG, predicted)


def classify(esp: Esp, trace, m: int, max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES) -> PredictionOutcome:
    index = trace if isinstance(trace, TraceIndex) else TraceIndex(trace, max_diff_nodes)
    return _outcome(index, m, predict(esp, index, m))


# -- evaluation ----------------------------------------------------------------


@dataclass
class EvalCounts:
    correct: int = 0
    incorrect: int = 0
    covered: Set[Point] = field(default_factory=set)
    outcomes: Dict[Point, PredictionOutcome] = field(default_factory=dict)

    @property
    def precision(self) -> float:
        total = self.correct + self.incorrect
        return self.correct / total if total else 0.0


class ReplayContext:
    """Traces prepared once and per-pattern outcomes cached by identity."""

    def __init__(self, traces: Sequence[Trace], max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES):
        self.indexes = [TraceIndex(t, max_diff_nodes) for t in traces]
        self._cache: Dict[int, EvalCounts] = {}
        self._keep: List[Esp] = []

    @property
    def points(self) -> List[Point]:
        return [(ix.trace.trace_id, m) for ix in self.indexes for m in range(len(ix))]

    def evaluate(self, esp: Esp) -> EvalCounts:
        key = id(esp)
        if key not in self._cache:
            self._keep.append(esp)
            self._cache[key] = self._evaluate(esp)
        return self._cache[key]

    def _evaluate(self, esp: Esp) -> EvalCounts:
        counts = EvalCounts()
        for ix in self.indexes:
            state = PrefixState(esp, ix)
            for m in range(1, len(ix)):
                predicted = state.predict(m)
                if predicted is None:
                    continue
                out = _outcome(ix, m, predicted)
                point = (ix.trace.trace_id, m)
                counts.outcomes[point] = out
                counts.covered.add(point)
                if out.kind is Outcome.CORRECT:
                    counts.correct += 1
                else:
                    counts.incorrect += 1
                break
        return counts


def evaluate(esp: Esp, data: Sequence[Trace], max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES) -> EvalCounts:
    """Replay ``esp`` over every trace; each trace yields at most one
    prediction (the first one)."""
    return ReplayContext(data, max_diff_nodes).evaluate(esp)


def sequence_traces(sequences: Iterable[Sequence[Edit]], step_ms: int = 1000) -> List[Trace]:
    """Turn edit sequences into short traces over the versions they visit."""
    out = []
    for k, seq in enumerate(sequences):
        seq = tuple(seq)
        trees = [seq[0].pre_root] + [e.post_root for e in seq]
        versions = tuple(Version(step_ms * q, t) for q, t in enumerate(trees))
        out.append(Trace(f"seq{k}:{seq[0].trace_id}", versions))
    return out


def greedy_select(patterns: Sequence[Esp], data, threshold: float, context: Optional[ReplayContext] = None, max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES) -> List[Esp]:
    """Set-cover style ranking.

    Patterns at or below ``threshold`` precision are dropped (no prediction
    at all counts as zero precision). Then the pattern with the largest
    ``correct - incorrect`` on still uncovered points is taken until
    patterns or points run out. Ties keep input order.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    ctx = context or ReplayContext(data, max_diff_nodes)
    counts = [ctx.evaluate(p) for p in patterns]
    alive = [i for i, c in enumerate(counts) if c.precision > threshold]
    uncovered = set(ctx.points)
    selected: List[int] = []
    while alive and uncovered:
        def score(i):
            c = w = 0
            for point, out in counts[i].outcomes.items():
                if point in uncovered:
                    if out.kind is Outcome.CORRECT:
                        c += 1
                    else:
                        w += 1
            return c - w

        best = max(alive, key=lambda i: (score(i), -i))
        alive.remove(best)
        selected.append(best)
        uncovered -= counts[best].covered
    return [patterns[i] for i in selected]


def filter_and_select(
    patterns: Sequence[Esp],
    edit_seqs: Sequence[Sequence[Edit]],
    traces: Sequence[Trace],
    t1: float = 0.7,
    t2: float = 0.8,
    max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES,
    contexts: Optional[Tuple[ReplayContext, ReplayContext]] = None,
) -> List[Esp]:
    """Two greedy passes: over the edit sequences with ``t1``, then over the
    traces with ``t2``. ``contexts`` lets repeated calls share replays."""
    if contexts is None:
        contexts = (ReplayContext(sequence_traces(edit_seqs), max_diff_nodes), ReplayContext(traces, max_diff_nodes))
    first = greedy_select(patterns, None, t1, context=contexts[0])
    return greedy_select(first, None, t2, context=contexts[1])


# -- metrics ---------------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall_rel: float
    f_gamma: float
    correct: int = 0
    incorrect: int = 0
    baseline_correct: int = 0


def f_gamma(precision: float, recall: float, gamma: float = 3.0) -> float:
    """Weighted harmonic mean favouring precision for ``gamma > 1``...
    NaN when undefined."""
    g2 = gamma * gamma
    denom = precision + g2 * recall
    if math.isnan(precision) or math.isnan(recall) or denom == 0:
        return math.nan
    return (1 + g2) * precision * recall / denom


def ensemble_outcomes(ranked: Sequence[Esp], context: ReplayContext) -> Dict[Point, Tuple[int, PredictionOutcome]]:
    """``(rank index, outcome)`` per data point, taken from the first pattern
    by rank that predicts there."""
    out: Dict[Point, Tuple[int, PredictionOutcome]] = {}
    for k, p in enumerate(ranked):
        for point, o in context.evaluate(p).outcomes.items():
            out.setdefault(point, (k, o))
    return out


def compute_metrics(
    selected: Sequence[Esp],
    baseline: Sequence[Esp],
    data: Sequence[Trace],
    gamma: float = 3.0,
    context: Optional[ReplayContext] = None,
    max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES,
) -> Metrics:
    ctx = context or ReplayContext(data, max_diff_nodes)
    mine = ensemble_outcomes(selected, ctx)
    base = ensemble_outcomes(baseline, ctx)
    correct = sum(1 for _, o in mine.values() if o.kind is Outcome.CORRECT)
    incorrect = len(mine) - correct
    base_correct = sum(1 for _, o in base.values() if o.kind is Outcome.CORRECT)
    precision = correct / (correct + incorrect) if correct + incorrect else math.nan
    recall = correct / base_correct if base_correct else math.nan
    return Metrics(precision, recall, f_gamma(precision, recall, gamma), correct, incorrect, base_correct)
