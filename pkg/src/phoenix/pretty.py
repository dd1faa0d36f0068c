"""Canonical source rendering of syntax trees; reparsing the output yields an equal tree."""

from __future__ import annotations

from decimal import Decimal

from . import ast as A
from .lexer import KEYWORD_TEXT, TokenKind as T

INDENT = "    "

TYPE_TEXT = {
    A.TypeName.NUM: KEYWORD_TEXT[T.KW_NUM],
    A.TypeName.STR: KEYWORD_TEXT[T.KW_STR],
    A.TypeName.NUMLIST: KEYWORD_TEXT[T.KW_NUMLIST],
    A.TypeName.STRLIST: KEYWORD_TEXT[T.KW_STRLIST],
    A.TypeName.ENTRY: KEYWORD_TEXT[T.KW_ENTRY],
}
ACCESS_TEXT = {A.Access.PUBLIC: KEYWORD_TEXT[T.KW_PUBLIC], A.Access.PRIVATE: KEYWORD_TEXT[T.KW_PRIVATE]}

PRECEDENCE = {"&": 1, "+": 2, "-": 2, "×": 3, "÷": 3, "%": 3}
UNARY_PREC = 4


def format_number(value: float) -> str:
    """Plain decimal notation (no exponent) that reads back to the same float."""
    if value == int(value) and abs(value) < 2**63:
        return str(int(value))
    text = format(Decimal(repr(value)), "f")
    return text


def _prec(e: A.Expr) -> int:
    if isinstance(e, A.Binary):
        return PRECEDENCE[e.op]
    if isinstance(e, A.Unary):
        return UNARY_PREC
    if isinstance(e, A.NumLit) and e.value < 0:
        return UNARY_PREC
    return 5


def expr(e: A.Expr) -> str:
    if isinstance(e, A.NumLit):
        return format_number(e.value)
    if isinstance(e, A.StrLit):
        return f'"{e.value}"'
    if isinstance(e, A.VarRef):
        return e.name
    if isinstance(e, A.FieldRef):
        return f"{expr(e.obj)}.{e.name}"
    if isinstance(e, A.IndexRef):
        return f"{expr(e.target)}[{expr(e.index)}]"
    if isinstance(e, A.CallExpr):
        return f"{KEYWORD_TEXT[T.KW_CALL]} {_call(e)}"
    if isinstance(e, A.Unary):
        inner = expr(e.operand)
        if _prec(e.operand) < UNARY_PREC:
            inner = f"({inner})"
        return e.op + inner
    if isinstance(e, A.Binary):
        p = PRECEDENCE[e.op]
        lhs, rhs = expr(e.lhs), expr(e.rhs)
        if _prec(e.lhs) < p:
            lhs = f"({lhs})"
        if _prec(e.rhs) <= p:
            rhs = f"({rhs})"
        return f"{lhs} {e.op} {rhs}"
    raise TypeError(f"not an expression: {e!r}")


def _call(c: A.CallExpr) -> str:
    args = ", ".join(expr(a) for a in c.args) if c.args else "-"
    return f"{expr(c.callee)}({args})"


def cond(c: A.BoolExpr) -> str:
    if isinstance(c, A.Cmp):
        return f"{expr(c.lhs)} {c.op} {expr(c.rhs)}"
    if isinstance(c, A.Paren):
        return f"({cond(c.inner)})"
    if isinstance(c, A.And):
        lhs = cond(c.lhs)
        rhs = cond(c.rhs)
        if isinstance(c.lhs, A.Or):
            lhs = f"({lhs})"
        if isinstance(c.rhs, (A.Or, A.And)):
            rhs = f"({rhs})"
        return f"{lhs} && {rhs}"
    if isinstance(c, A.Or):
        rhs = cond(c.rhs)
        if isinstance(c.rhs, A.Or):
            rhs = f"({rhs})"
        return f"{cond(c.lhs)} || {rhs}"
    raise TypeError(f"not a condition: {c!r}")


def _block(b: A.Block, depth: int) -> list[str]:
    pad = INDENT * depth
    lines = [pad + "{"]
    for s in b.stmts:
        lines.extend(stmt(s, depth + 1))
    lines.append(pad + "}")
    return lines


def _decl(d: A.Decl) -> str:
    if isinstance(d, A.VarDecl):
        return f"{TYPE_TEXT[d.type]} {d.name} = {expr(d.init)} ;"
    if isinstance(d, A.ArrayDecl):
        head = f"{TYPE_TEXT[d.type]} {d.name}[{format_number(d.size)}]"
        if d.init is None:
            return head + " ;"
        values = ", ".join(expr(v) for v in d.init)
        return f"{head} = {{ {values} }} ;" if values else f"{head} = {{ }} ;"
    return f"{d.class_name} {d.name} ;"


def stmt(s: A.Stmt, depth: int = 0) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, (A.VarDecl, A.ArrayDecl, A.ObjectDecl)):
        return [pad + _decl(s)]
    if isinstance(s, A.Assign):
        return [f"{pad}{expr(s.target)} = {expr(s.value)} ;"]
    if isinstance(s, A.Block):
        return _block(s, depth)
    if isinstance(s, A.If):
        lines = [f"{pad}{KEYWORD_TEXT[T.KW_IF]} : {cond(s.cond)}"] + _block(s.then, depth)
        if s.else_ is not None:
            lines.append(pad + KEYWORD_TEXT[T.KW_ELSE])
            lines.extend(_block(s.else_, depth))
        return lines
    if isinstance(s, A.While):
        return [f"{pad}{KEYWORD_TEXT[T.KW_WHILE]} : {cond(s.cond)}"] + _block(s.body, depth)
    if isinstance(s, A.Show):
        return [f"{pad}{KEYWORD_TEXT[T.KW_SHOW]} : {expr(s.expr)} ;"]
    if isinstance(s, A.Input):
        return [f'{pad}{KEYWORD_TEXT[T.KW_INPUT]} : {expr(s.target)}, "{s.prompt}" ;']
    if isinstance(s, A.CallStmt):
        return [f"{pad}{KEYWORD_TEXT[T.KW_CALL]} : {_call(s.call)} ;"]
    if isinstance(s, A.Return):
        if s.expr is None:
            return [f"{pad}{KEYWORD_TEXT[T.KW_RETURN]} ;"]
        return [f"{pad}{KEYWORD_TEXT[T.KW_RETURN]} : {expr(s.expr)} ;"]
    raise TypeError(f"not a statement: {s!r}")


def function(f: A.FunctionDecl, depth: int = 0, prefix: str = "") -> list[str]:
    pad = INDENT * depth
    params = ", ".join(f"{TYPE_TEXT[p.type]} {p.name}" for p in f.params) if f.params else "-"
    head = f"{pad}{prefix}{KEYWORD_TEXT[T.KW_FUNC]} {f.name} ({params}) : {TYPE_TEXT[f.return_type]}"
    return [head] + _block(f.body, depth) + [pad + KEYWORD_TEXT[T.KW_ENDFUNC]]


def klass(c: A.ClassDecl, depth: int = 0) -> list[str]:
    pad = INDENT * depth
    lines = [f"{pad}{KEYWORD_TEXT[T.KW_CLASS]} {c.name}", pad + "{"]
    for m in c.members:
        prefix = ACCESS_TEXT[m.access] + " "
        if isinstance(m.decl, A.FunctionDecl):
            lines.extend(function(m.decl, depth + 1, prefix))
        else:
            lines.append(INDENT * (depth + 1) + prefix + _decl(m.decl))
    lines.append(pad + "}")
    return lines


def pretty_print(node: A.Node) -> str:
    if isinstance(node, A.Program):
        chunks = []
        for item in node.items:
            if isinstance(item, A.FunctionDecl):
                chunks.append("\n".join(function(item)))
            elif isinstance(item, A.ClassDecl):
                chunks.append("\n".join(klass(item)))
            else:
                chunks.append(_decl(item))
        return "\n\n".join(chunks) + ("\n" if chunks else "")
    if isinstance(node, A.FunctionDecl):
        return "\n".join(function(node)) + "\n"
    if isinstance(node, A.ClassDecl):
        return "\n".join(klass(node)) + "\n"
    if isinstance(node, (A.Cmp, A.And, A.Or, A.Paren)):
        return cond(node)
    if isinstance(node, (A.NumLit, A.StrLit, A.VarRef, A.FieldRef, A.IndexRef, A.Unary, A.Binary, A.CallExpr)):
        return expr(node)
    return "\n".join(stmt(node)) + "\n"
