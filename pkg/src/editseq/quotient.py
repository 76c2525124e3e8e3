"""Kind partitions, the quotient graph, frequent paths and sketches."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

from .diff import Edit, EditKind
from .trace import EditGraph

__all__ = [
    "DEFAULT_SUPPORT",
    "DEFAULT_MAX_SEQ_LEN",
    "MissingEdge",
    "QuotientGraph",
    "Sketch",
    "partition",
    "build_quotient",
    "support",
    "frequent_paths",
    "generate_sketches",
    "to_dot",
]

DEFAULT_SUPPORT = 2
DEFAULT_MAX_SEQ_LEN = 3

Chain = Tuple[Edit, ...]
KindPath = Tuple[EditKind, ...]


class MissingEdge(KeyError):
    pass


@dataclass(frozen=True)
class QuotientGraph:
    vertices: Dict[EditKind, Tuple[Edit, ...]]
    labels: Dict[Tuple[EditKind, EditKind], FrozenSet[Tuple[Edit, Edit]]]
    support_threshold: int = DEFAULT_SUPPORT

    @property
    def edges(self) -> List[Tuple[EditKind, EditKind]]:
        return sorted(self.labels)

    def successors(self, kind: EditKind) -> List[EditKind]:
        return sorted(b for a, b in self.labels if a == kind)


@dataclass(frozen=True)
class Sketch:
    placeholders: KindPath
    starred: bool = False

    def __post_init__(self):
        if not self.placeholders:
            raise ValueError("a sketch needs at least one placeholder")

    def __len__(self):
        return len(self.placeholders)

    def __str__(self):
        return ".".join(str(k) for k in self.placeholders) + ("*" if self.starred else "")


def partition(edits: Iterable[Edit]) -> Dict[EditKind, Tuple[Edit, ...]]:
    groups: Dict[EditKind, List[Edit]] = defaultdict(list)
    for e in edits:
        groups[e.kind].append(e)
    return {k: tuple(sorted(v)) for k, v in sorted(groups.items())}


def build_quotient(g: EditGraph, s: int = DEFAULT_SUPPORT) -> QuotientGraph:
    pairs: Dict[Tuple[EditKind, EditKind], set] = defaultdict(set)
    for a, b in g.seq_edges:
        pairs[(a.kind, b.kind)].add((a, b))
    labels = {k: frozenset(v) for k, v in sorted(pairs.items()) if len(v) >= s}
    return QuotientGraph(partition(g.nodes), labels, s)


def support(qg: QuotientGraph, path: Sequence[EditKind]) -> List[Chain]:
    """Chains ``e_1..e_n`` whose consecutive pairs lie in the edge labels
    along ``path``. A single-partition path is supported by its edits."""
    path = tuple(path)
    if len(path) == 1:
        return [(e,) for e in qg.vertices.get(path[0], ())]
    chains: List[Chain] = []
    for a, b in zip(path, path[1:]):
        if (a, b) not in qg.labels:
            raise MissingEdge(f"no edge {a} -> {b}")
    by_source: Dict[Edit, List[Edit]] = defaultdict(list)
    chains = sorted(qg.labels[(path[0], path[1])])
    for k in range(2, len(path)):
        by_source = defaultdict(list)
        for a, b in qg.labels[(path[k - 1], path[k])]:
            by_source[a].append(b)
        chains = sorted(c + (b,) for c in chains for b in by_source.get(c[-1], ()))
        if not chains:
            break
    return [tuple(c) for c in chains]


def frequent_paths(qg: QuotientGraph, max_len: int = DEFAULT_MAX_SEQ_LEN, s: int = DEFAULT_SUPPORT) -> List[KindPath]:
    """Paths of 2..max_len partitions with support of at least ``s`` chains."""
    out: List[KindPath] = []
    frontier: List[Tuple[KindPath, List[Chain]]] = []
    for a, b in qg.edges:
        chains = support(qg, (a, b))
        if len(chains) >= s:
            frontier.append(((a, b), chains))
    while frontier:
        nxt = []
        for path, chains in frontier:
            out.append(path)
            if len(path) >= max_len:
                continue
            for c in qg.successors(path[-1]):
                label = qg.labels[(path[-1], c)]
                by_source: Dict[Edit, List[Edit]] = defaultdict(list)
                for a, b in label:
                    by_source[a].append(b)
                ext = sorted(ch + (b,) for ch in chains for b in by_source.get(ch[-1], ()))
                if len(ext) >= s:
                    nxt.append((path + (c,), ext))
        frontier = nxt
    return sorted(out)


def _is_simple(path: KindPath) -> bool:
    return len(set(path)) == len(path)


def generate_sketches(qg: QuotientGraph, paths: Iterable[KindPath]) -> List[Tuple[Sketch, List[Chain]]]:
    """One unstarred sketch per simple path, plus one starred sketch per
    family ``Q.P^i`` (non-empty simple ``Q.P``, at least one repetition of
    ``P``) whose spec is the union of the family's supports."""
    paths = sorted(set(paths))
    known = set(paths)
    out: List[Tuple[Sketch, List[Chain]]] = []
    for p in paths:
        if _is_simple(p):
            out.append((Sketch(p, False), support(qg, p)))
    for p in paths:
        if not _is_simple(p) or len(p) < 2:
            continue
        base = p
        if (base + (base[-1],)) not in known:
            continue
        family = [base]
        nxt = base + (base[-1],)
        while nxt in known:
            family.append(nxt)
            nxt = nxt + (base[-1],)
        chains = sorted({c for member in family for c in support(qg, member)})
        out.append((Sketch(base, True), chains))
    return out


def to_dot(qg: QuotientGraph) -> str:
    lines = ["digraph quotient {"]
    for kind, edits in qg.vertices.items():
        lines.append(f'  "{kind}" [label="{kind} ({len(edits)})"];')
    for (a, b), label in sorted(qg.labels.items()):
        lines.append(f'  "{a}" -> "{b}" [label="{len(label)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
