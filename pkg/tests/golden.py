"""Frozen expected patterns, written by hand from the worked examples."""
from editseq.ast import deserialize
from editseq.template import EditTemplate, Esp, IsKind, IsNotNull, Rel, parse_predicate


def _t(pre: str, post: str) -> EditTemplate:
    return EditTemplate(deserialize(pre), deserialize(post))


# add property -> add constructor parameter -> assign it, holes numbered in
# order of first appearance
ADD_PROPERTY_TEMPLATES = (
    _t(
        "(MemberList (Hole 1) (Hole 2))",
        '(MemberList (Hole 3) (PropertyDecl (Modifier "public") (Hole 4) (Hole 5)'
        ' (AccessorList (Accessor "get") (Accessor "set"))) (Hole 6))',
    ),
    _t("(ParameterList (Hole 7))", "(ParameterList (Hole 8) (Parameter (Hole 9) (Hole 10)))"),
    _t("(Block (Hole 11))", "(Block (Hole 12) (Assign (Hole 13) (Hole 14)))"),
)

# the links that make the pattern useful: members and statements are kept,
# the parameter type is the property type, the parameter name is the
# lower-cased property name and the assignment wires the two together
ADD_PROPERTY_PREDICATES = frozenset(
    parse_predicate(p)
    for p in (
        "rel 3 eq 1",
        "rel 6 eq 2",
        "rel 8 eq 7",
        "rel 9 eq 4",
        "rel 10 lower 5",
        "rel 12 eq 11",
        "rel 13 eq 5",
        "rel 14 eq 10",
        "kind 2 CtorDecl",
        "kind 4 TypeName",
        "kind 5 Identifier",
        "kind 9 TypeName",
        "kind 10 Identifier",
    )
)

ADD_PROPERTY = Esp(ADD_PROPERTY_TEMPLATES, ADD_PROPERTY_PREDICATES)

# expected v5 of the typed trace, as source
TYPED_V5 = "class Node {\n    public str Id {get;set;}\n    Node(str id) {\n        Id = id;\n    }\n}\n"


def delete_param_esp(link_args: bool = True, last_arg_kind: bool = True) -> Esp:
    """Delete a parameter, then delete the matching argument at every call
    site (starred). ``link_args`` keeps the kept-arguments equality,
    ``last_arg_kind`` pins the deleted argument to one identifier."""
    templates = (
        _t("(ParameterList (Hole 1) (Parameter (Hole 2) (Hole 3)))", "(ParameterList (Hole 4))"),
        _t("(ArgumentList (Hole 5) (Hole 6))", "(ArgumentList (Hole 7))"),
    )
    preds = {Rel("4", "eq", "1"), IsKind("2", "TypeName"), IsKind("3", "Identifier")}
    if link_args:
        preds.add(Rel("7", "eq", "5"))
    preds.add(IsKind("6", "Identifier") if last_arg_kind else IsNotNull("6"))
    return Esp(templates, frozenset(preds), starred=True)
