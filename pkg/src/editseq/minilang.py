"""Parser and pretty-printer for MiniSharp, a small C#-like language.

The grammar is just large enough for class/property/constructor/method
declarations, simple statements and expressions. List positions
(members, parameters, arguments, statements, accessors) become explicit
list-labeled nodes so that template holes can bind sibling sequences.
"""
from __future__ import annotations

import re
from typing import List, Optional, Tuple

from .ast import AstNode, Span

__all__ = ["LABELS", "SourceSyntaxError", "UnknownLabel", "parse", "unparse"]

LABELS = frozenset(
    """CompilationUnit ClassDecl MemberList PropertyDecl AccessorList Accessor
    Modifier CtorDecl MethodDecl ParameterList Parameter TypeName Identifier
    Block LocalDecl Assign Return Throw ExprStmt Invoke ArgumentList
    MemberAccess IntLit StrLit BoolLit Binary New""".split()
)

MODIFIERS = frozenset(
    ["public", "private", "protected", "internal", "static", "readonly",
     "virtual", "override", "abstract", "sealed", "async"]
)
KEYWORDS = MODIFIERS | {"class", "return", "throw", "new", "true", "false", "get", "set"}

# binary operators by increasing precedence
_PRECEDENCE = [("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/", "%")]
_BINARY_OPS = {op for level in _PRECEDENCE for op in level}


class SourceSyntaxError(SyntaxError):
    def __init__(self, message: str, text: str, offset: int):
        line = text.count("\n", 0, offset) + 1
        column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} (line {line}, column {column})")
        self.lineno = line
        self.offset = column
        self.position = offset


class UnknownLabel(ValueError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*|/\*.*?\*/)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[{}()\[\];,.=<>+\-*/%])
    """,
    re.VERBOSE | re.DOTALL,
)


def _tokenize(text: str) -> List[Tuple[str, str, int, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SourceSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), m.start(), m.end()))
        pos = m.end()
    tokens.append(("eof", "", len(text), len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    # -- token helpers
    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value: str, k: int = 0) -> bool:
        kind, text, _, _ = self.peek(k)
        return kind != "str" and text == value

    def at_ident(self, k: int = 0) -> bool:
        kind, text, _, _ = self.peek(k)
        return kind == "ident" and text not in KEYWORDS

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        if not self.at(value):
            self.fail(f"expected {value!r}")
        return self.advance()

    def fail(self, message: str):
        kind, text, start, _ = self.peek()
        found = "end of input" if kind == "eof" else repr(text)
        raise SourceSyntaxError(f"{message}, found {found}", self.text, start)

    def leaf(self, label: str, tok) -> AstNode:
        return AstNode(label, tok[1], span=Span(tok[2], tok[3]))

    def node(self, label: str, children, start: int) -> AstNode:
        end = self.toks[self.i - 1][3] if self.i else start
        return AstNode(label, None, children, Span(start, max(start, end)))

    def ident(self) -> AstNode:
        if not self.at_ident():
            self.fail("expected identifier")
        return self.leaf("Identifier", self.advance())

    # -- declarations
    def unit(self) -> AstNode:
        items = []
        while self.peek()[0] != "eof":
            items.append(self.member(top_level=True))
        return AstNode("CompilationUnit", None, items, Span(0, len(self.text)))

    def modifiers(self) -> List[AstNode]:
        mods = []
        while self.peek()[0] == "ident" and self.peek()[1] in MODIFIERS:
            mods.append(self.leaf("Modifier", self.advance()))
        return mods

    def member(self, top_level: bool = False) -> AstNode:
        start = self.peek()[2]
        mods = self.modifiers()
        if self.at("class"):
            self.advance()
            name = self.ident()
            members = self.member_list()
            return self.node("ClassDecl", mods + [name, members], start)
        if self.at_ident() and self.at("(", 1):
            name = self.ident()
            params = self.parameter_list()
            body = self.block()
            return self.node("CtorDecl", mods + [name, params, body], start)
        type_name = self.type_name()
        name = self.ident()
        if self.at("("):
            params = self.parameter_list()
            body = self.block()
            return self.node("MethodDecl", mods + [type_name, name, params, body], start)
        if self.at("{") and not top_level:
            accessors = self.accessor_list()
            return self.node("PropertyDecl", mods + [type_name, name, accessors], start)
        self.fail("expected member declaration")

    def member_list(self) -> AstNode:
        start = self.expect("{")[2]
        members = []
        while not self.at("}"):
            if self.peek()[0] == "eof":
                self.fail("unterminated class body")
            members.append(self.member())
        self.advance()
        return self.node("MemberList", members, start)

    def accessor_list(self) -> AstNode:
        start = self.expect("{")[2]
        accessors = []
        while not self.at("}"):
            tok_start = self.peek()[2]
            words = [m.token for m in self.modifiers()]
            if not (self.at("get") or self.at("set")):
                self.fail("expected 'get' or 'set'")
            words.append(self.advance()[1])
            end = self.expect(";")[3]
            accessors.append(AstNode("Accessor", " ".join(words), span=Span(tok_start, end)))
        self.advance()
        return self.node("AccessorList", accessors, start)

    def type_name(self) -> AstNode:
        if not self.at_ident():
            self.fail("expected type name")
        first = self.advance()
        text, end = first[1], first[3]
        while self.at(".") and self.at_ident(1):
            self.advance()
            tok = self.advance()
            text += "." + tok[1]
            end = tok[3]
        while self.at("[") and self.at("]", 1):
            self.advance()
            end = self.advance()[3]
            text += "[]"
        return AstNode("TypeName", text, span=Span(first[2], end))

    def parameter_list(self) -> AstNode:
        start = self.expect("(")[2]
        params = []
        if not self.at(")"):
            while True:
                p_start = self.peek()[2]
                type_name = self.type_name()
                name = self.ident()
                params.append(self.node("Parameter", [type_name, name], p_start))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        return self.node("ParameterList", params, start)

    # -- statements
    def block(self) -> AstNode:
        start = self.expect("{")[2]
        stmts = []
        while not self.at("}"):
            if self.peek()[0] == "eof":
                self.fail("unterminated block")
            stmts.append(self.statement())
        self.advance()
        return self.node("Block", stmts, start)

    def _looks_like_local_decl(self) -> bool:
        if not self.at_ident():
            return False
        k = 1
        while self.at(".", k) and self.at_ident(k + 1):
            k += 2
        while self.at("[", k) and self.at("]", k + 1):
            k += 2
        return self.at_ident(k) and (self.at("=", k + 1) or self.at(";", k + 1))

    def statement(self) -> AstNode:
        start = self.peek()[2]
        if self.at("return"):
            self.advance()
            children = [] if self.at(";") else [self.expression()]
            self.expect(";")
            return self.node("Return", children, start)
        if self.at("throw"):
            self.advance()
            value = self.expression()
            self.expect(";")
            return self.node("Throw", [value], start)
        if self._looks_like_local_decl():
            type_name = self.type_name()
            name = self.ident()
            children = [type_name, name]
            if self.at("="):
                self.advance()
                children.append(self.expression())
            self.expect(";")
            return self.node("LocalDecl", children, start)
        target = self.expression()
        if self.at("="):
            if target.label not in ("Identifier", "MemberAccess"):
                self.fail("invalid assignment target")
            self.advance()
            value = self.expression()
            self.expect(";")
            return self.node("Assign", [target, value], start)
        self.expect(";")
        return self.node("ExprStmt", [target], start)

    # -- expressions
    def expression(self, level: int = 0) -> AstNode:
        if level == len(_PRECEDENCE):
            return self.postfix()
        start = self.peek()[2]
        left = self.expression(level + 1)
        while self.peek()[0] == "op" and self.peek()[1] in _PRECEDENCE[level]:
            op = self.leaf("Binary", self.advance())
            right = self.expression(level + 1)
            left = self.node("Binary", [left, op, right], start)
        return left

    def postfix(self) -> AstNode:
        start = self.peek()[2]
        expr = self.primary()
        while True:
            if self.at("."):
                self.advance()
                name = self.ident()
                expr = self.node("MemberAccess", [expr, name], start)
            elif self.at("("):
                args = self.argument_list()
                expr = self.node("Invoke", [expr, args], start)
            else:
                return expr

    def argument_list(self) -> AstNode:
        start = self.expect("(")[2]
        args = []
        if not self.at(")"):
            while True:
                args.append(self.expression())
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        return self.node("ArgumentList", args, start)

    def primary(self) -> AstNode:
        kind, text, start, _ = self.peek()
        if kind == "num":
            return self.leaf("IntLit", self.advance())
        if kind == "str":
            return self.leaf("StrLit", self.advance())
        if text in ("true", "false") and kind == "ident":
            return self.leaf("BoolLit", self.advance())
        if self.at("new"):
            self.advance()
            type_name = self.type_name()
            args = self.argument_list()
            return self.node("New", [type_name, args], start)
        if self.at("("):
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        if self.at_ident():
            return self.ident()
        self.fail("expected expression")


def parse(src: str) -> AstNode:
    """Parse MiniSharp source into an AST with source spans.

    Raises :class:`SourceSyntaxError` (a ``SyntaxError``) carrying line and
    column on malformed input.
    """
    return _Parser(src).unit()


# -- pretty printer -----------------------------------------------------------

_INDENT = "    "


def unparse(n: AstNode) -> str:
    """Render an AST back to MiniSharp text; ``parse(unparse(n)) == n``."""
    if n.label == "CompilationUnit":
        return "".join(_decl(c, 0) for c in n.children)
    if n.label in _DECLS:
        return _decl(n, 0)
    if n.label in _STATEMENTS:
        return _stmt(n, 0)
    return _expr(n)


def _require(n: AstNode, label: str) -> AstNode:
    if n.label != label:
        raise UnknownLabel(f"expected {label}, got {n.label}")
    return n


def _split_modifiers(n: AstNode):
    mods = []
    rest = list(n.children)
    while rest and rest[0].label == "Modifier":
        mods.append(rest.pop(0).token)
    return mods, rest


def _prefix(mods) -> str:
    return "".join(m + " " for m in mods)


def _decl(n: AstNode, depth: int) -> str:
    pad = _INDENT * depth
    mods, rest = _split_modifiers(n)
    try:
        if n.label == "ClassDecl":
            name, members = rest
            body = "".join(_decl(m, depth + 1) for m in _require(members, "MemberList").children)
            return f"{pad}{_prefix(mods)}class {_require(name, 'Identifier').token} {{\n{body}{pad}}}\n"
        if n.label == "PropertyDecl":
            type_name, name, accessors = rest
            acc = " ".join(_require(a, "Accessor").token + ";" for a in _require(accessors, "AccessorList").children)
            acc = f"{{ {acc} }}" if acc else "{ }"
            return f"{pad}{_prefix(mods)}{_require(type_name, 'TypeName').token} {_require(name, 'Identifier').token} {acc}\n"
        if n.label == "CtorDecl":
            name, params, body = rest
            return f"{pad}{_prefix(mods)}{_require(name, 'Identifier').token}{_params(params)} {_block(body, depth)}\n"
        if n.label == "MethodDecl":
            type_name, name, params, body = rest
            return (
                f"{pad}{_prefix(mods)}{_require(type_name, 'TypeName').token} "
                f"{_require(name, 'Identifier').token}{_params(params)} {_block(body, depth)}\n"
            )
    except ValueError as exc:
        if isinstance(exc, UnknownLabel):
            raise
        raise UnknownLabel(f"malformed {n.label}") from exc
    raise UnknownLabel(n.label)


_DECLS = {"ClassDecl", "PropertyDecl", "CtorDecl", "MethodDecl"}
_STATEMENTS = {"LocalDecl", "Assign", "Return", "Throw", "ExprStmt"}


def _params(n: AstNode) -> str:
    parts = []
    for p in _require(n, "ParameterList").children:
        _require(p, "Parameter")
        if len(p.children) != 2:
            raise UnknownLabel("malformed Parameter")
        t, name = p.children
        parts.append(f"{_require(t, 'TypeName').token} {_require(name, 'Identifier').token}")
    return "(" + ", ".join(parts) + ")"


def _block(n: AstNode, depth: int) -> str:
    _require(n, "Block")
    if not n.children:
        return "{\n" + _INDENT * depth + "}"
    body = "".join(_stmt(s, depth + 1) for s in n.children)
    return "{\n" + body + _INDENT * depth + "}"


def _stmt(n: AstNode, depth: int) -> str:
    pad = _INDENT * depth
    c = n.children
    if n.label == "LocalDecl" and len(c) in (2, 3):
        head = f"{_require(c[0], 'TypeName').token} {_require(c[1], 'Identifier').token}"
        tail = f" = {_expr(c[2])}" if len(c) == 3 else ""
        return f"{pad}{head}{tail};\n"
    if n.label == "Assign" and len(c) == 2:
        if c[0].label not in ("Identifier", "MemberAccess"):
            raise UnknownLabel(f"invalid assignment target {c[0].label}")
        return f"{pad}{_expr(c[0])} = {_expr(c[1])};\n"
    if n.label == "Return" and len(c) <= 1:
        return f"{pad}return{' ' + _expr(c[0]) if c else ''};\n"
    if n.label == "Throw" and len(c) == 1:
        return f"{pad}throw {_expr(c[0])};\n"
    if n.label == "ExprStmt" and len(c) == 1:
        return f"{pad}{_expr(c[0])};\n"
    raise UnknownLabel(n.label)


def _expr(n: AstNode) -> str:
    c = n.children
    if n.label in ("Identifier", "IntLit", "StrLit", "BoolLit") and n.token is not None:
        return n.token
    if n.label == "MemberAccess" and len(c) == 2:
        return f"{_operand(c[0])}.{_require(c[1], 'Identifier').token}"
    if n.label == "Invoke" and len(c) == 2:
        return f"{_operand(c[0])}{_args(c[1])}"
    if n.label == "New" and len(c) == 2:
        return f"new {_require(c[0], 'TypeName').token}{_args(c[1])}"
    if n.label == "Binary" and len(c) == 3 and c[1].token in _BINARY_OPS:
        return f"{_operand(c[0])} {c[1].token} {_operand(c[2])}"
    raise UnknownLabel(n.label)


def _operand(n: AstNode) -> str:
    text = _expr(n)
    return f"({text})" if n.label == "Binary" else text


def _args(n: AstNode) -> str:
    return "(" + ", ".join(_expr(a) for a in _require(n, "ArgumentList").children) + ")"
