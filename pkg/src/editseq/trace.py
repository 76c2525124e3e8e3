"""Development traces, debouncing, edit enumeration and the edit graph."""
from __future__ import annotations

import json
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .ast import AstNode, ParseError, deserialize
from .diff import Edit, make_edit
from .minilang import SourceSyntaxError, parse

__all__ = [
    "DEFAULT_DEBOUNCE_MS",
    "DEFAULT_MAX_DIFF_NODES",
    "Version",
    "Trace",
    "EditGraph",
    "MalformedRecord",
    "debounce",
    "enumerate_edits",
    "build_edit_graph",
    "trace_from_sources",
    "load_trace",
    "load_corpus",
    "dump_trace",
]

DEFAULT_DEBOUNCE_MS = 500
DEFAULT_MAX_DIFF_NODES = 60


@dataclass(frozen=True)
class Version:
    timestamp: int
    tree: AstNode
    cursor: Optional[int] = None


@dataclass(frozen=True)
class Trace:
    trace_id: str
    versions: Tuple[Version, ...]

    def __post_init__(self):
        object.__setattr__(self, "versions", tuple(self.versions))
        stamps = [v.timestamp for v in self.versions]
        if any(b < a for a, b in zip(stamps, stamps[1:])):
            raise ValueError(f"trace {self.trace_id}: timestamps must be non-decreasing")

    def __len__(self):
        return len(self.versions)

    def tree(self, m: int) -> AstNode:
        return self.versions[m].tree


class MalformedRecord(ValueError):
    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


def debounce(t: Trace, window_ms: int = DEFAULT_DEBOUNCE_MS) -> Trace:
    """Keep only the last version of every run of versions spaced closer
    than ``window_ms``."""
    kept = []
    versions = t.versions
    for k, v in enumerate(versions):
        nxt = versions[k + 1] if k + 1 < len(versions) else None
        if nxt is not None and nxt.timestamp - v.timestamp < window_ms:
            continue
        kept.append(v)
    return Trace(t.trace_id, tuple(kept))


def enumerate_edits(t: Trace, max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES) -> List[Edit]:
    """All edits ``v_i -> v_j`` (i < j) whose localized size is within bounds."""
    edits = []
    vs = t.versions
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            e = make_edit(t.trace_id, i, j, vs[i].tree, vs[j].tree)
            if e is not None and e.size <= max_diff_nodes:
                edits.append(e)
    return edits


@dataclass
class EditGraph:
    nodes: List[Edit] = field(default_factory=list)
    seq_edges: Set[Tuple[Edit, Edit]] = field(default_factory=set)

    def __post_init__(self):
        self._succ: Dict[Edit, List[Edit]] = defaultdict(list)
        for a, b in sorted(self.seq_edges):
            self._succ[a].append(b)

    def successors(self, e: Edit) -> List[Edit]:
        return self._succ.get(e, [])


def build_edit_graph(traces: Iterable[Trace], max_diff_nodes: int = DEFAULT_MAX_DIFF_NODES) -> EditGraph:
    nodes: List[Edit] = []
    edges: Set[Tuple[Edit, Edit]] = set()
    for t in traces:
        edits = enumerate_edits(t, max_diff_nodes)
        nodes.extend(edits)
        starting = defaultdict(list)
        for e in edits:
            starting[e.i].append(e)
        for e in edits:
            for f in starting.get(e.j, ()):
                edges.add((e, f))
    nodes.sort()
    return EditGraph(nodes, edges)


def trace_from_sources(
    trace_id: str,
    sources: Sequence[str],
    step_ms: int = 1000,
    cursors: Optional[Sequence[Optional[int]]] = None,
) -> Trace:
    """Build a trace from source snapshots, one every ``step_ms``."""
    cursors = list(cursors) if cursors is not None else [None] * len(sources)
    versions = [Version(k * step_ms, parse(src), c) for k, (src, c) in enumerate(zip(sources, cursors))]
    return Trace(trace_id, tuple(versions))


def load_trace(path: str, trace_id: Optional[str] = None) -> Trace:
    """Read one line-delimited trace file.

    Each record is ``{"t": ms, "cursor": int|null, "src": text}`` or the
    same with ``"ast"`` holding an s-expression.
    """
    if trace_id is None:
        trace_id = os.path.splitext(os.path.basename(path))[0]
    versions = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(path, lineno, f"invalid JSON: {exc.msg}") from exc
            versions.append(_version_from_record(rec, path, lineno))
    try:
        return Trace(trace_id, tuple(versions))
    except ValueError as exc:
        raise MalformedRecord(path, len(versions), str(exc)) from exc


def _version_from_record(rec, path: str, lineno: int) -> Version:
    if not isinstance(rec, dict):
        raise MalformedRecord(path, lineno, "record must be an object")
    stamp = rec.get("t")
    if not isinstance(stamp, int) or isinstance(stamp, bool):
        raise MalformedRecord(path, lineno, "'t' must be an integer")
    cursor = rec.get("cursor")
    if cursor is not None and (not isinstance(cursor, int) or isinstance(cursor, bool)):
        raise MalformedRecord(path, lineno, "'cursor' must be an integer or null")
    if ("src" in rec) == ("ast" in rec):
        raise MalformedRecord(path, lineno, "exactly one of 'src' and 'ast' is required")
    try:
        if "src" in rec:
            tree = parse(rec["src"])
        else:
            tree = deserialize(rec["ast"])
    except (SourceSyntaxError, ParseError, TypeError) as exc:
        raise MalformedRecord(path, lineno, str(exc)) from exc
    return Version(stamp, tree, cursor)


def load_corpus(directory: str) -> List[Trace]:
    """Load every ``*.jsonl`` file of a directory as one trace, sorted by name."""
    names = sorted(n for n in os.listdir(directory) if n.endswith(".jsonl"))
    return [load_trace(os.path.join(directory, n)) for n in names]


def dump_trace(t: Trace, path: str, sources: Optional[Sequence[str]] = None) -> None:
    from .ast import serialize

    with open(path, "w", encoding="utf-8") as fh:
        for k, v in enumerate(t.versions):
            rec = {"t": v.timestamp, "cursor": v.cursor}
            if sources is not None:
                rec["src"] = sources[k]
            else:
                rec["ast"] = serialize(v.tree)
            fh.write(json.dumps(rec) + "\n")
