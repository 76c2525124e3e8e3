"""Input checks shared by the estimator and the command line."""
from __future__ import annotations

from typing import Iterable, List, Sequence, Tuple

from .ast import AstNode
from .trace import Trace

__all__ = ["check_trace", "check_traces", "check_queries", "check_version_index"]


def check_trace(t) -> Trace:
    if not isinstance(t, Trace):
        raise TypeError(f"expected a Trace, got {type(t).__name__}")
    for k, v in enumerate(t.versions):
        if not isinstance(v.tree, AstNode):
            raise TypeError(f"trace {t.trace_id}: version {k} has no syntax tree")
    return t


def check_traces(X: Iterable, allow_empty: bool = True) -> List[Trace]:
    """A list of traces with distinct ids."""
    if isinstance(X, Trace):
        raise TypeError("expected a collection of traces, got a single Trace")
    traces = [check_trace(t) for t in X]
    if not traces and not allow_empty:
        raise ValueError("at least one trace is required")
    ids = [t.trace_id for t in traces]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate trace ids: {', '.join(dup)}")
    return traces


def check_version_index(t: Trace, m) -> int:
    if isinstance(m, bool) or not isinstance(m, int):
        raise TypeError("version index must be an int")
    if not 0 <= m < len(t.versions):
        raise IndexError(f"version {m} outside 0..{len(t.versions) - 1} of trace {t.trace_id}")
    return m


def check_queries(X: Sequence) -> List[Tuple[Trace, int]]:
    """``(trace, m)`` pairs asking for the version after ``v_m``."""
    out = []
    for q in X:
        try:
            t, m = q
        except (TypeError, ValueError):
            raise TypeError("each query must be a (trace, m) pair") from None
        t = check_trace(t)
        out.append((t, check_version_index(t, m)))
    return out
