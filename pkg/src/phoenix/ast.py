"""Syntax tree for Phoenix programs.

Spans and the annotations written by semantic analysis are excluded from
equality, so two trees compare equal exactly when they are structurally
the same program.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Optional, Union

from .core import Span

NOSPAN = Span(0, 0, 1, 1)


class TypeName(str, Enum):
    NUM = "NUM"
    STR = "STR"
    NUMLIST = "NUMLIST"
    STRLIST = "STRLIST"
    ENTRY = "ENTRY"

    @property
    def is_array(self) -> bool:
        return self in (TypeName.NUMLIST, TypeName.STRLIST)

    @property
    def element(self) -> "TypeName":
        return TypeName.NUM if self is TypeName.NUMLIST else TypeName.STR


class Access(str, Enum):
    PUBLIC = "PUBLIC"
    PRIVATE = "PRIVATE"


def _span() -> Any:
    return field(default=NOSPAN, compare=False, repr=False)


def _note(default: Any = None) -> Any:
    return field(default=default, compare=False, repr=False)


class Node:
    span: Span


# ---- expressions -----------------------------------------------------------

@dataclass(eq=True)
class NumLit(Node):
    value: float
    span: Span = _span()
    ty: Any = _note()
    to_str: bool = _note(False)


@dataclass(eq=True)
class StrLit(Node):
    value: str
    span: Span = _span()
    ty: Any = _note()
    to_str: bool = _note(False)


@dataclass(eq=True)
class VarRef(Node):
    name: str
    span: Span = _span()
    ty: Any = _note()
    to_str: bool = _note(False)
    symbol: Any = _note()


@dataclass(eq=True)
class FieldRef(Node):
    obj: "Ref"
    name: str
    span: Span = _span()
    ty: Any = _note()
    to_str: bool = _note(False)
    symbol: Any = _note()


@dataclass(eq=True)
class IndexRef(Node):
    target: "Ref"
    index: "Expr"
    span: Span = _span()
    ty: Any = _note()
    to_str: bool = _note(False)


@dataclass(eq=True)
class Unary(Node):
    op: str
    operand: "Expr"
    span: Span = _span()
    ty: Any = _note()
    to_str: bool = _note(False)


@dataclass(eq=True)
class Binary(Node):
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: Span = _span()
    ty: Any = _note()
    to_str: bool = _note(False)


@dataclass(eq=True)
class CallExpr(Node):
    callee: "Ref"
    args: list["Expr"]
    span: Span = _span()
    ty: Any = _note()
    to_str: bool = _note(False)
    function: Any = _note()
    implicit_self: bool = _note(False)


Ref = Union[VarRef, FieldRef]
LValue = Union[VarRef, FieldRef, IndexRef]
Expr = Union[NumLit, StrLit, VarRef, FieldRef, IndexRef, Unary, Binary, CallExpr]


# ---- conditions ------------------------------------------------------------

@dataclass(eq=True)
class Cmp(Node):
    op: str
    lhs: Expr
    rhs: Expr
    span: Span = _span()


@dataclass(eq=True)
class And(Node):
    lhs: "BoolExpr"
    rhs: "BoolExpr"
    span: Span = _span()


@dataclass(eq=True)
class Or(Node):
    lhs: "BoolExpr"
    rhs: "BoolExpr"
    span: Span = _span()


@dataclass(eq=True)
class Paren(Node):
    inner: "BoolExpr"
    span: Span = _span()


BoolExpr = Union[Cmp, And, Or, Paren]


# ---- statements ------------------------------------------------------------

@dataclass(eq=True)
class Block(Node):
    stmts: list["Stmt"]
    span: Span = _span()
    scope: Any = _note()


@dataclass(eq=True)
class VarDecl(Node):
    type: TypeName
    name: str
    init: Expr
    span: Span = _span()
    symbol: Any = _note()


@dataclass(eq=True)
class ArrayDecl(Node):
    type: TypeName
    name: str
    size: float
    init: Optional[list[Union[NumLit, StrLit]]]
    span: Span = _span()
    symbol: Any = _note()


@dataclass(eq=True)
class ObjectDecl(Node):
    class_name: str
    name: str
    span: Span = _span()
    symbol: Any = _note()


@dataclass(eq=True)
class Assign(Node):
    target: LValue
    value: Expr
    span: Span = _span()


@dataclass(eq=True)
class If(Node):
    cond: BoolExpr
    then: Block
    else_: Optional[Block]
    span: Span = _span()


@dataclass(eq=True)
class While(Node):
    cond: BoolExpr
    body: Block
    span: Span = _span()


@dataclass(eq=True)
class Show(Node):
    expr: Expr
    span: Span = _span()


@dataclass(eq=True)
class Input(Node):
    target: LValue
    prompt: str
    span: Span = _span()
    ty: Any = _note()


@dataclass(eq=True)
class CallStmt(Node):
    call: CallExpr
    span: Span = _span()


@dataclass(eq=True)
class Return(Node):
    expr: Optional[Expr]
    span: Span = _span()


Decl = Union[VarDecl, ArrayDecl, ObjectDecl]
Stmt = Union[VarDecl, ArrayDecl, ObjectDecl, Assign, If, While, Show, Input, CallStmt, Return, Block]


# ---- top level -------------------------------------------------------------

@dataclass(eq=True)
class Param(Node):
    type: TypeName
    name: str
    span: Span = _span()
    symbol: Any = _note()


@dataclass(eq=True)
class FunctionDecl(Node):
    name: str
    params: list[Param]
    return_type: TypeName
    body: Block
    span: Span = _span()
    symbol: Any = _note()
    scope: Any = _note()
    slot_count: int = _note(0)


@dataclass(eq=True)
class Member(Node):
    access: Access
    decl: Union[VarDecl, ArrayDecl, ObjectDecl, FunctionDecl]
    span: Span = _span()


@dataclass(eq=True)
class ClassDecl(Node):
    name: str
    members: list[Member]
    span: Span = _span()
    symbol: Any = _note()
    scope: Any = _note()


@dataclass(eq=True)
class Program(Node):
    items: list[Union[FunctionDecl, ClassDecl, VarDecl, ArrayDecl, ObjectDecl]]
    span: Span = _span()


# ---- generic traversal -----------------------------------------------------

def children(node: Node) -> list[Node]:
    out: list[Node] = []
    for f in fields(node):
        if not f.compare:
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            out.append(value)
        elif isinstance(value, list):
            out.extend(v for v in value if isinstance(v, Node))
    return out


def walk(node: Node):
    yield node
    for child in children(node):
        yield from walk(child)


def _scalar(value: Any) -> str:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return value if value and " " not in value else repr(value)
    return str(value)


def dump(node: Node, indent: int = 0, label: str = "") -> str:
    """Indented tree, one node per line: ``NodeKind key=value ...``."""
    pad = "  " * indent
    attrs = []
    kids: list[tuple[str, Node]] = []
    for f in fields(node):
        if not f.compare:
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            kids.append((f.name, value))
        elif isinstance(value, list):
            if value and all(isinstance(v, Node) for v in value):
                kids.extend((f.name, v) for v in value)
            else:
                attrs.append(f"{f.name}={len(value) if value else '[]'}")
        elif value is None:
            attrs.append(f"{f.name}=-")
        else:
            attrs.append(f"{f.name}={_scalar(value)}")
    head = f"{pad}{label}{type(node).__name__}"
    if attrs:
        head += " " + " ".join(attrs)
    lines = [head]
    for name, kid in kids:
        lines.append(dump(kid, indent + 1, f"{name}: "))
    return "\n".join(lines)

