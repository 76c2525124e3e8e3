"""Edit localization and Kind classification."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from .ast import AstNode, Path, node_count

__all__ = ["INSERT", "DELETE", "UPDATE", "EditKind", "Edit", "localize", "classify", "make_edit"]

INSERT = "Insert"
DELETE = "Delete"
UPDATE = "Update"


@dataclass(frozen=True, order=True)
class EditKind:
    operation: str
    label: str

    def __str__(self):
        return f"{self.operation}{self.label}"


@dataclass(frozen=True, eq=False)
class Edit:
    """An edit ``v_i -> v_j`` of one trace with its localized subtrees.

    Identity is the triple ``(trace_id, i, j)``.
    """

    trace_id: str
    i: int
    j: int
    pre_root: AstNode = field(repr=False)
    post_root: AstNode = field(repr=False)
    loc_pre: AstNode = field(repr=False)
    loc_post: AstNode = field(repr=False)
    loc_path: Path = field(repr=False)
    kind: EditKind

    @property
    def key(self) -> Tuple[str, int, int]:
        return (self.trace_id, self.i, self.j)

    @property
    def size(self) -> int:
        return node_count(self.loc_pre) + node_count(self.loc_post)

    def __eq__(self, other):
        if not isinstance(other, Edit):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key


def localize(v_pre: AstNode, v_post: AstNode) -> Optional[Tuple[AstNode, AstNode, Path]]:
    """Return ``(loc_pre, loc_post, path)`` for the smallest differing subtree.

    ``None`` means the trees are structurally equal. Descent continues while
    both nodes share label and child count and exactly one child differs.
    """
    if v_pre == v_post:
        return None
    path = []
    a, b = v_pre, v_post
    while (
        a.label == b.label
        and a.token is None
        and b.token is None
        and len(a.children) == len(b.children)
    ):
        diff = [k for k, (x, y) in enumerate(zip(a.children, b.children)) if x != y]
        if len(diff) != 1:
            break
        k = diff[0]
        path.append(k)
        a, b = a.children[k], b.children[k]
    return a, b, tuple(path)


def _inserted_run(short: Sequence[AstNode], long: Sequence[AstNode]) -> Optional[Tuple[AstNode, ...]]:
    k = len(long) - len(short)
    prefix = 0
    while prefix < len(short) and short[prefix] == long[prefix]:
        prefix += 1
    if tuple(short[prefix:]) == tuple(long[prefix + k:]):
        return tuple(long[prefix:prefix + k])
    return None


def classify(loc_pre: AstNode, loc_post: AstNode) -> EditKind:
    """Kind of a localized edit: insert/delete of a contiguous child run
    when the shapes allow it, otherwise an update of ``loc_pre``."""
    if (
        loc_pre.label == loc_post.label
        and loc_pre.token is None
        and loc_post.token is None
    ):
        pre, post = loc_pre.children, loc_post.children
        for op, short, long in ((INSERT, pre, post), (DELETE, post, pre)):
            if len(long) > len(short):
                run = _inserted_run(short, long)
                if run is not None:
                    labels = {n.label for n in run}
                    label = labels.pop() if len(labels) == 1 else loc_pre.label
                    return EditKind(op, label)
    return EditKind(UPDATE, loc_pre.label)


def make_edit(trace_id: str, i: int, j: int, pre_root: AstNode, post_root: AstNode) -> Optional[Edit]:
    loc = localize(pre_root, post_root)
    if loc is None:
        return None
    loc_pre, loc_post, path = loc
    return Edit(trace_id, i, j, pre_root, post_root, loc_pre, loc_post, path, classify(loc_pre, loc_post))
