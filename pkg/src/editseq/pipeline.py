"""End-to-end mining: traces to a ranked list of edit sequence patterns."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .diff import Edit
from .quotient import (
    DEFAULT_MAX_SEQ_LEN,
    DEFAULT_SUPPORT,
    QuotientGraph,
    Sketch,
    build_quotient,
    frequent_paths,
    generate_sketches,
)
from .rankpredict import ReplayContext, filter_and_select, sequence_traces
from .synth import build_dendrogram
from .template import Esp, PatternRecord
from .trace import DEFAULT_DEBOUNCE_MS, DEFAULT_MAX_DIFF_NODES, EditGraph, Trace, build_edit_graph, debounce

__all__ = ["Config", "ConfigError", "Candidate", "MiningResult", "mine"]

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    n: int = DEFAULT_MAX_SEQ_LEN
    support: int = DEFAULT_SUPPORT
    debounce_ms: int = DEFAULT_DEBOUNCE_MS
    max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES
    t1: float = 0.7
    t2: float = 0.8
    gamma: float = 3.0
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.support < 2:
            raise ConfigError("support must be at least 2")
        if self.debounce_ms < 0:
            raise ConfigError("debounce-ms must be non-negative")
        if self.max_diff_nodes < 1:
            raise ConfigError("max-diff-nodes must be positive")
        for name in ("t1", "t2"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "Config":
        """Build from loosely typed values such as a parsed config file.
        Keys may use dashes or underscores."""
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name not in types:
                raise ConfigError(f"unknown configuration key {key!r}")
            conv = float if types[name] in (float, "float") else int
            try:
                kwargs[name] = conv(raw)
            except (TypeError, ValueError):
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
        return cls(**kwargs)

    def replace(self, **changes) -> "Config":
        return Config(**{**asdict(self), **changes})


@dataclass(frozen=True)
class Candidate:
    esp: Esp
    sketch: Sketch
    depth: int


@dataclass
class MiningResult:
    traces: List[Trace]
    graph: EditGraph
    quotient: QuotientGraph
    sketches: List[Tuple[Sketch, List[Tuple[Edit, ...]]]]
    candidates: List[Candidate]
    selected: List[Candidate]
    max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES
    _contexts: Optional[Tuple[ReplayContext, ReplayContext]] = field(default=None, repr=False)

    def select(self, t1: float, t2: float) -> List[Candidate]:
        """Rank the candidates under thresholds ``t1``/``t2``; replays are
        cached so re-ranking is cheap."""
        if self._contexts is None:
            self._contexts = (
                ReplayContext(sequence_traces(_edit_sequences(self.sketches)), self.max_diff_nodes),
                ReplayContext(self.traces, self.max_diff_nodes),
            )
        by_id: Dict[int, Candidate] = {id(c.esp): c for c in self.candidates}
        ranked = filter_and_select(
            [c.esp for c in self.candidates], (), (), t1, t2, self.max_diff_nodes, contexts=self._contexts
        )
        return [by_id[id(e)] for e in ranked]

    def records(self) -> List[PatternRecord]:
        return [PatternRecord(k, c.esp, str(c.sketch), c.depth) for k, c in enumerate(self.selected, 1)]


def _candidates(sketches) -> List[Candidate]:
    out: List[Candidate] = []
    seen = set()
    for sketch, spec in sketches:
        d = build_dendrogram(sketch, spec)
        idxs = d.internal or ([0] if len(d.nodes) == 1 else [])
        for k in idxs:
            esp = d.nodes[k]
            if esp in seen:
                continue
            seen.add(esp)
            out.append(Candidate(esp, sketch, d.depth[k]))
    return out


def _edit_sequences(sketches) -> List[Tuple[Edit, ...]]:
    seqs, seen = [], set()
    for _, spec in sketches:
        for seq in spec:
            key = tuple(e.key for e in seq)
            if key not in seen:
                seen.add(key)
                seqs.append(tuple(seq))
    return seqs


def mine(traces: Sequence[Trace], config: Optional[Config] = None, thresholds: Optional[Tuple[float, float]] = None) -> MiningResult:
    """Learn and rank patterns from ``traces``.

    ``thresholds`` overrides ``(config.t1, config.t2)``; ``(0, 0)`` gives the
    baseline configuration.
    """
    config = config or Config()
    t1, t2 = thresholds if thresholds is not None else (config.t1, config.t2)
    traces = [debounce(t, config.debounce_ms) for t in traces]
    graph = build_edit_graph(traces, config.max_diff_nodes)
    qg = build_quotient(graph, config.support)
    paths = frequent_paths(qg, config.n, config.support)
    sketches = generate_sketches(qg, paths)
    candidates = _candidates(sketches)
    log.info("%d edits, %d sketches, %d candidate patterns", len(graph.nodes), len(sketches), len(candidates))
    result = MiningResult(traces, graph, qg, sketches, candidates, [], config.max_diff_nodes)
    result.selected = result.select(t1, t2)
    return result
