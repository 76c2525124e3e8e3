"""Small hand-written traces and a generator for synthetic corpora.

The ``figure_*`` traces reproduce the classic add-property workflow (typed
directly, copied and renamed, and a diverging variant) and the
delete-parameter cascade. :func:`make_planted_corpus` builds a corpus where
the add-property workflow is planted in some traces between noise edits.
"""
from __future__ import annotations

import random
from typing import Dict, List, Optional, Sequence, Tuple

from .trace import Trace, trace_from_sources

__all__ = [
    "ADD_PROPERTY_TYPED",
    "ADD_PROPERTY_COPIED",
    "ADD_PROPERTY_DIVERGING",
    "DELETE_PARAMETER",
    "figure_trace",
    "PlantedCorpus",
    "make_planted_corpus",
]

ADD_PROPERTY_TYPED = [
    "class Node {\n    Node() {\n    }\n}\n",
    "class Node {\n    public str Id { }\n    Node() {\n    }\n}\n",
    "class Node {\n    public str Id {get;}\n    Node() {\n    }\n}\n",
    "class Node {\n    public str Id {get;set;}\n    Node() {\n    }\n}\n",
    "class Node {\n    public str Id {get;set;}\n    Node(str id) {\n    }\n}\n",
    "class Node {\n    public str Id {get;set;}\n    Node(str id) {\n        Id = id;\n    }\n}\n",
]

ADD_PROPERTY_COPIED = [
    "class Graph {\n    public int Id {get; set;}\n    Graph(int id) {\n        Id = id;\n    }\n}\n",
    "class Graph {\n    public int Id {get; set;}\n    public int Id {get; set;}\n    Graph(int id) {\n        Id = id;\n    }\n}\n",
    "class Graph {\n    public int Id {get; set;}\n    public int Size {get; set;}\n    Graph(int id) {\n        Id = id;\n    }\n}\n",
    "class Graph {\n    public int Id {get;set;}\n    public int Size {get;set;}\n    Graph(int id, int size) {\n        Id = id;\n    }\n}\n",
    "class Graph {\n    public int Id {get;set;}\n    public int Size {get;set;}\n    Graph(int id, int size) {\n        Id = id;\n        Size = size;\n    }\n}\n",
]

ADD_PROPERTY_DIVERGING = [
    "class Metric {\n    Metric() {\n    }\n}\n",
    "class Metric {\n    public float Cost { }\n    Metric() {\n    }\n}\n",
    "class Metric {\n    public float Cost {get;}\n    Metric() {\n    }\n}\n",
    "class Metric {\n    public float Cost {get;set;}\n    Metric() {\n    }\n}\n",
    "class Metric {\n    public float Cost {get;set;}\n    Metric(int val) {\n    }\n}\n",
    "class Metric {\n    public float Cost {get;set;}\n    Metric(int val) {\n        Cost = Math.Abs(val);\n    }\n}\n",
]

_COMMS = (
    "class Comms {{\n    void Write({params}) {{\n    }}\n}}\n"
    "void Main() {{\n    Comms.Write({first});\n    Comms.Write({second});\n}}\n"
)

DELETE_PARAMETER = [
    _COMMS.format(params="Stream s, byte[] bs, bool flush", first="io, bytes, f", second="io, result, f"),
    _COMMS.format(params="Stream s, byte[] bs", first="io, bytes, f", second="io, result, f"),
    _COMMS.format(params="Stream s, byte[] bs", first="io, bytes", second="io, result, f"),
    _COMMS.format(params="Stream s, byte[] bs", first="io, bytes", second="io, result"),
]

_FIGURES = {
    "typed": ADD_PROPERTY_TYPED,
    "copied": ADD_PROPERTY_COPIED,
    "diverging": ADD_PROPERTY_DIVERGING,
    "delete-param": DELETE_PARAMETER,
}


def figure_trace(name: str, step_ms: int = 1000) -> Trace:
    """One of ``typed``, ``copied``, ``diverging`` or ``delete-param``."""
    return trace_from_sources(name, _FIGURES[name], step_ms=step_ms)


# -- planted corpora -------------------------------------------------------------

_CLASS_NAMES = ["Account", "Buffer", "Client", "Engine", "Folder", "Ledger", "Packet", "Router", "Sensor", "Widget", "Vector", "Ticket"]
_PROPS = [("int", "Count"), ("str", "Name"), ("bool", "Ready"), ("int", "Limit"), ("str", "Path"),
          ("float", "Ratio"), ("int", "Width"), ("str", "Label"), ("bool", "Dirty"), ("int", "Depth")]
_METHOD_NAMES = ["Reset", "Flush", "Close", "Start", "Stop", "Clear"]


class _ClassState:
    """A tiny mutable model of one class that renders to source text."""

    def __init__(self, name: str):
        self.name = name
        self.props: List[Tuple[str, str]] = []
        self.params: List[Tuple[str, str]] = []
        self.body: List[str] = []
        self.methods: List[Tuple[str, List[str]]] = []

    def render(self) -> str:
        lines = [f"class {self.name} {{"]
        for ty, nm in self.props:
            lines.append(f"    public {ty} {nm} {{get;set;}}")
        params = ", ".join(f"{t} {n}" for t, n in self.params)
        lines.append(f"    {self.name}({params}) {{")
        lines += [f"        {s}" for s in self.body]
        lines.append("    }")
        for mname, stmts in self.methods:
            lines.append(f"    void {mname}() {{")
            lines += [f"        {s}" for s in stmts]
            lines.append("    }")
        lines.append("}")
        return "\n".join(lines) + "\n"


class PlantedCorpus:
    """Generated traces plus the version indices where the planted workflow
    makes a prediction possible."""

    def __init__(self, traces: List[Trace], sources: Dict[str, List[str]], planted: Dict[str, List[int]]):
        self.traces = traces
        self.sources = sources
        self.planted = planted

    @property
    def planted_points(self) -> List[Tuple[str, int]]:
        return sorted((t, m) for t, ms in self.planted.items() for m in ms)


def make_planted_corpus(
    n_traces: int = 10,
    n_planted: int = 8,
    seed: int = 0,
    noise_edits: int = 2,
    step_ms: int = 1000,
) -> PlantedCorpus:
    """Build ``n_traces`` traces, ``n_planted`` of which contain the
    add-property workflow (property, constructor parameter, assignment).

    Noise edits add or grow unrelated methods before and after the
    workflow. Planted points are the versions right after the property and
    after the parameter were added.
    """
    if not 0 <= n_planted <= n_traces:
        raise ValueError("n_planted must lie in [0, n_traces]")
    rng = random.Random(seed)
    names = rng.sample(_CLASS_NAMES, k=min(n_traces, len(_CLASS_NAMES)))
    while len(names) < n_traces:
        names.append(f"Class{len(names)}")
    planted_ids = set(rng.sample(range(n_traces), k=n_planted))
    traces, sources, planted = [], {}, {}
    for k in range(n_traces):
        tid = f"trace{k:02d}"
        cls = _ClassState(names[k])
        # a pre-existing property wired through the constructor
        ty0, nm0 = _PROPS[rng.randrange(len(_PROPS))]
        cls.props.append((ty0, nm0))
        cls.params.append((ty0, nm0.lower()))
        cls.body.append(f"{nm0} = {nm0.lower()};")
        versions = [cls.render()]
        points: List[int] = []

        def noise():
            if cls.methods and rng.random() < 0.5:
                mname, stmts = cls.methods[rng.randrange(len(cls.methods))]
                stmts.append(f"Log({len(stmts)});")
            else:
                used = {m for m, _ in cls.methods}
                free = [m for m in _METHOD_NAMES if m not in used]
                if not free:
                    return
                cls.methods.append((free[rng.randrange(len(free))], []))
            versions.append(cls.render())

        for _ in range(rng.randint(1, noise_edits)):
            noise()
        if k in planted_ids:
            taken = {n for _, n in cls.props}
            choices = [p for p in _PROPS if p[1] not in taken]
            ty, nm = choices[rng.randrange(len(choices))]
            cls.props.append((ty, nm))
            versions.append(cls.render())
            points.append(len(versions) - 1)
            cls.params.append((ty, nm.lower()))
            versions.append(cls.render())
            points.append(len(versions) - 1)
            cls.body.append(f"{nm} = {nm.lower()};")
            versions.append(cls.render())
        for _ in range(rng.randint(1, noise_edits)):
            noise()
        traces.append(trace_from_sources(tid, versions, step_ms=step_ms))
        sources[tid] = versions
        if points:
            planted[tid] = points
    return PlantedCorpus(traces, sources, planted)
