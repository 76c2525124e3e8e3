"""Immutable labeled ordered trees and the subtree algebra built on them.

Every other module works on :class:`AstNode` values: parsed program
versions, localized edit subtrees and templates (where some leaves are
``Hole`` nodes).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

__all__ = [
    "AstNode",
    "Span",
    "Path",
    "InvalidPath",
    "ParseError",
    "HOLE_LABEL",
    "node_count",
    "subtree_at",
    "replace_at",
    "enumerate_subtrees",
    "serialize",
    "deserialize",
    "text_value",
    "text_of_sequence",
]

HOLE_LABEL = "Hole"

Path = Tuple[int, ...]


class InvalidPath(IndexError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


@dataclass(frozen=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def contains(self, offset: int) -> bool:
        return self.start <= offset <= self.end


class AstNode:
    """A labeled ordered tree node.

    A node carries either a token (leaf) or a possibly empty tuple of
    children. Equality and hashing are structural and ignore ``span``.
    """

    __slots__ = ("label", "token", "children", "span", "_hash", "_size")

    def __init__(
        self,
        label: str,
        token: Optional[str] = None,
        children: Sequence["AstNode"] = (),
        span: Optional[Span] = None,
    ):
        children = tuple(children)
        if token is not None and children:
            raise ValueError(f"{label}: a token leaf cannot have children")
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "token", token)
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "span", span)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_size", None)

    def __setattr__(self, name, value):
        raise AttributeError("AstNode is immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, AstNode):
            return NotImplemented
        if hash(self) != hash(other):
            return False
        return (
            self.label == other.label
            and self.token == other.token
            and self.children == other.children
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.label, self.token, self.children))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return serialize(self)

    def __reduce__(self):
        return (AstNode, (self.label, self.token, self.children, self.span))

    @property
    def is_hole(self) -> bool:
        return self.label == HOLE_LABEL

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def with_children(self, children: Sequence["AstNode"]) -> "AstNode":
        return AstNode(self.label, None, children, self.span)

    def without_spans(self) -> "AstNode":
        return AstNode(
            self.label, self.token, [c.without_spans() for c in self.children]
        )


def node_count(n: AstNode) -> int:
    size = n._size
    if size is None:
        size = 1 + sum(node_count(c) for c in n.children)
        object.__setattr__(n, "_size", size)
    return size


def subtree_at(root: AstNode, path: Sequence[int]) -> AstNode:
    node = root
    for depth, step in enumerate(path):
        if not 0 <= step < len(node.children):
            raise InvalidPath(f"step {depth} ({step}) out of range for {node.label}")
        node = node.children[step]
    return node


def replace_at(root: AstNode, path: Sequence[int], replacement: AstNode) -> AstNode:
    if not path:
        return replacement
    step = path[0]
    if not 0 <= step < len(root.children):
        raise InvalidPath(f"step 0 ({step}) out of range for {root.label}")
    children = list(root.children)
    children[step] = replace_at(children[step], path[1:], replacement)
    return root.with_children(children)


def enumerate_subtrees(root: AstNode) -> Iterator[Tuple[Path, AstNode]]:
    """Yield ``(path, subtree)`` for every node in pre-order."""
    stack = [((), root)]
    while stack:
        path, node = stack.pop()
        yield path, node
        for i in range(len(node.children) - 1, -1, -1):
            stack.append((path + (i,), node.children[i]))


def text_value(n: AstNode) -> str:
    return " ".join(_tokens(n))


def text_of_sequence(nodes: Sequence[AstNode]) -> str:
    return " ".join(t for n in nodes for t in _tokens(n))


def _tokens(n: AstNode) -> Iterator[str]:
    if n.token is not None:
        yield n.token
    for c in n.children:
        yield from _tokens(c)


# -- s-expression format -----------------------------------------------------

_LABEL_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_BARE_RE = re.compile(r"[A-Za-z0-9_]+")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize(n: AstNode) -> str:
    parts = []
    _write(n, parts)
    return "".join(parts)


def _write(n: AstNode, out: list) -> None:
    if n.is_hole and n.token is not None:
        out.append(f"({HOLE_LABEL} {n.token})")
        return
    out.append("(")
    out.append(n.label)
    if n.token is not None:
        out.append(" ")
        out.append(_quote(n.token))
    for c in n.children:
        out.append(" ")
        _write(c, out)
    out.append(")")


def deserialize(text: str) -> AstNode:
    """Parse the s-expression form produced by :func:`serialize`.

    ``(Hole <id>)`` leaves with a bare identifier are accepted so template
    trees round-trip as well.
    """
    parser = _SexprParser(text)
    node = parser.node()
    parser.skip_ws()
    if parser.pos != len(text):
        raise ParseError("trailing input", parser.pos)
    return node


class _SexprParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise ParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def node(self) -> AstNode:
        self.expect("(")
        self.skip_ws()
        m = _LABEL_RE.match(self.text, self.pos)
        if not m:
            raise ParseError("expected label", self.pos)
        label = m.group()
        self.pos = m.end()
        self.skip_ws()
        if self.pos >= len(self.text):
            raise ParseError("unterminated node", self.pos)
        ch = self.text[self.pos]
        if ch == '"':
            token = self.string()
            self.expect(")")
            return AstNode(label, token)
        if label == HOLE_LABEL and ch != ")" and ch != "(":
            m = _BARE_RE.match(self.text, self.pos)
            if not m:
                raise ParseError("expected hole id", self.pos)
            self.pos = m.end()
            self.expect(")")
            return AstNode(label, m.group())
        children = []
        while True:
            self.skip_ws()
            if self.pos >= len(self.text):
                raise ParseError("unterminated node", self.pos)
            if self.text[self.pos] == ")":
                self.pos += 1
                return AstNode(label, None, children)
            children.append(self.node())

    def string(self) -> str:
        start = self.pos
        self.pos += 1
        out = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    break
                nxt = self.text[self.pos + 1]
                if nxt not in '"\\':
                    raise ParseError(f"bad escape \\{nxt}", self.pos)
                out.append(nxt)
                self.pos += 2
            elif ch == '"':
                self.pos += 1
                return "".join(out)
            else:
                out.append(ch)
                self.pos += 1
        raise ParseError("unterminated string", start)
