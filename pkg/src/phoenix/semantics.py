"""Symbol table construction, name resolution, type checking and
dead-declaration elimination.

Analysis runs as four passes; each later pass only runs when the earlier
ones reported no errors:

1. ``build_symbols``        declarations, scopes, duplicate and entry checks
2. ``check_use_before_decl`` resolve every name against the scope chain
3. ``check_calls``          callee resolution, arity, argument types, access
4. ``type_check``           expression typing and statement rules
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union

from . import ast as A
from .core import CompileFailed, Diagnostic, Phase, Span, error, warning

NUM, STR, NUMLIST, STRLIST, ENTRY = (
    A.TypeName.NUM, A.TypeName.STR, A.TypeName.NUMLIST, A.TypeName.STRLIST, A.TypeName.ENTRY,
)

MAX_ARRAY = 0xFFFF


class SymbolKind(str, Enum):
    VARIABLE = "variable"
    ARRAY = "array"
    OBJECT = "object"
    FUNCTION = "function"
    CLASS = "class"
    PARAMETER = "parameter"


class Storage(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"
    FIELD = "field"
    NONE = "none"


@dataclass(frozen=True)
class ObjectType:
    class_name: str

    def __str__(self) -> str:
        return self.class_name


class _Error:
    def __repr__(self) -> str:
        return "<error>"


ERROR = _Error()
Type = Union[A.TypeName, ObjectType, _Error]


@dataclass(eq=False)
class Symbol:
    name: str
    kind: SymbolKind
    data_type: Type
    decl_span: Span
    scope_id: int
    visible_from: int = 0
    storage: Storage = Storage.NONE
    used: bool = False
    param_types: list = field(default_factory=list)
    return_type: Optional[A.TypeName] = None
    access: Optional[A.Access] = None
    owner: Optional["ClassInfo"] = None
    slot: int = -1
    decl: object = field(default=None, repr=False)

    def __repr__(self) -> str:
        return f"Symbol({self.name}, {self.kind.value}, {self.data_type}, slot={self.slot})"


@dataclass(eq=False)
class Scope:
    id: int
    kind: str
    parent: Optional["Scope"]
    symbols: dict[str, Symbol] = field(default_factory=dict)
    owner_class: Optional["ClassInfo"] = None

    def chain(self) -> Iterator["Scope"]:
        s: Optional[Scope] = self
        while s is not None:
            yield s
            s = s.parent


@dataclass(eq=False)
class ClassInfo:
    decl: A.ClassDecl
    index: int
    scope: Scope
    fields: list[Symbol] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.decl.name


@dataclass(eq=False)
class ScopeStack:
    """All scopes of one program, rooted at the global scope."""

    global_scope: Scope
    scopes: list[Scope]
    functions: list[A.FunctionDecl] = field(default_factory=list)
    classes: dict[str, ClassInfo] = field(default_factory=dict)
    globals: list[Symbol] = field(default_factory=list)
    entry: Optional[A.FunctionDecl] = None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def new_scope(self, kind: str, parent: Optional[Scope], owner: Optional[ClassInfo] = None) -> Scope:
        scope = Scope(len(self.scopes), kind, parent, owner_class=owner)
        self.scopes.append(scope)
        return scope


@dataclass(eq=False)
class TypedProgram:
    program: A.Program
    scopes: ScopeStack
    warnings: list[Diagnostic] = field(default_factory=list)

    @property
    def functions(self) -> list[A.FunctionDecl]:
        return self.scopes.functions

    @property
    def classes(self) -> list[ClassInfo]:
        return sorted(self.scopes.classes.values(), key=lambda c: c.index)

    @property
    def globals(self) -> list[Symbol]:
        return self.scopes.globals

    @property
    def entry(self) -> A.FunctionDecl:
        assert self.scopes.entry is not None
        return self.scopes.entry

    def global_items(self) -> list[A.Decl]:
        return [i for i in self.program.items if isinstance(i, (A.VarDecl, A.ArrayDecl, A.ObjectDecl))]


def _err(code: str, message: str, span: Optional[Span]) -> Diagnostic:
    return error(Phase.SEMANTIC, code, message, span)


def is_literal(e: A.Expr) -> bool:
    if isinstance(e, A.Unary):
        return isinstance(e.operand, A.NumLit)
    return isinstance(e, (A.NumLit, A.StrLit))


def literal_value(e: A.Expr) -> Union[float, str]:
    if isinstance(e, A.Unary):
        v = e.operand.value
        return -v if e.op == "-" else v
    return e.value


def definitely_returns(stmts: list[A.Stmt]) -> bool:
    return any(stmt_returns(s) for s in stmts)


def stmt_returns(s: A.Stmt) -> bool:
    if isinstance(s, A.Return):
        return True
    if isinstance(s, A.Block):
        return definitely_returns(s.stmts)
    if isinstance(s, A.If) and s.else_ is not None:
        return definitely_returns(s.then.stmts) and definitely_returns(s.else_.stmts)
    return False


def type_of_decl(d: A.Decl) -> Type:
    if isinstance(d, A.ObjectDecl):
        return ObjectType(d.class_name)
    return d.type


def kind_of_decl(d: A.Decl) -> SymbolKind:
    if isinstance(d, A.ObjectDecl):
        return SymbolKind.OBJECT
    if isinstance(d, A.ArrayDecl) or d.type.is_array:
        return SymbolKind.ARRAY
    return SymbolKind.VARIABLE


# ---------------------------------------------------------------------------
# pass 1: declarations


class _SymbolBuilder:
    def __init__(self) -> None:
        gscope = Scope(0, "global", None)
        self.table = ScopeStack(gscope, [gscope])
        self.diags = self.table.diagnostics

    def declare(self, scope: Scope, sym: Symbol) -> Symbol:
        if sym.name in scope.symbols:
            prev = scope.symbols[sym.name]
            self.diags.append(_err(
                "E-SEM-004",
                f"'{sym.name}' is already declared in this scope (line {prev.decl_span.line})",
                sym.decl_span,
            ))
            return prev
        sym.scope_id = scope.id
        scope.symbols[sym.name] = sym
        return sym

    def run(self, program: A.Program) -> ScopeStack:
        g = self.table.global_scope
        # Classes first, so object declarations anywhere can name them.
        for item in program.items:
            if isinstance(item, A.ClassDecl):
                info = ClassInfo(item, len(self.table.classes), self.table.new_scope("class", g))
                info.scope.owner_class = info
                sym = Symbol(item.name, SymbolKind.CLASS, ObjectType(item.name), item.span, 0, decl=item)
                if self.declare(g, sym) is sym:
                    self.table.classes[item.name] = info
                item.symbol = sym
                item.scope = info.scope
        for item in program.items:
            if isinstance(item, A.FunctionDecl):
                self.declare_function(g, item, None)
            elif isinstance(item, A.ClassDecl):
                info = self.table.classes.get(item.name)
                if info is not None and info.decl is item:
                    self.declare_class_members(info)
            else:
                sym = self.declare_variable(g, item, Storage.GLOBAL)
                if sym.decl is item:
                    self.table.globals.append(sym)
                if isinstance(item, A.VarDecl) and any(isinstance(n, A.CallExpr) for n in A.walk(item.init)):
                    self.diags.append(_err("E-SEM-018", "global initializers may not call functions", item.span))
        self.check_composition()
        # Bodies after all signatures are known.
        for fn in self.table.functions:
            self.declare_body(fn)
        entries = [f for f in self.table.functions if f.return_type is ENTRY and f.symbol.owner is None]
        if len(entries) != 1:
            span = entries[1].span if len(entries) > 1 else program.span
            self.diags.append(_err(
                "E-SEM-011", f"a program needs exactly one entry function, found {len(entries)}", span,
            ))
        else:
            self.table.entry = entries[0]
            if entries[0].params:
                self.diags.append(_err("E-SEM-017", "the entry function takes no parameters", entries[0].span))
        return self.table

    def declare_function(self, scope: Scope, fn: A.FunctionDecl, owner: Optional[ClassInfo],
                         access: Optional[A.Access] = None) -> None:
        sym = Symbol(
            fn.name, SymbolKind.FUNCTION, fn.return_type, fn.span, scope.id,
            param_types=[p.type for p in fn.params], return_type=fn.return_type,
            access=access, owner=owner, decl=fn,
        )
        fn.symbol = self.declare(scope, sym)
        if fn.symbol is sym:
            sym.slot = len(self.table.functions)
            self.table.functions.append(fn)
        if owner is not None and fn.return_type is ENTRY:
            self.diags.append(_err("E-SEM-016", "methods cannot be marked as the entry function", fn.span))

    def declare_variable(self, scope: Scope, d: A.Decl, storage: Storage,
                         owner: Optional[ClassInfo] = None, access: Optional[A.Access] = None) -> Symbol:
        sym = Symbol(
            d.name, kind_of_decl(d), type_of_decl(d), d.span, scope.id,
            visible_from=d.span.end, storage=storage, owner=owner, access=access, decl=d,
        )
        if isinstance(d, A.ObjectDecl) and d.class_name not in self.table.classes:
            self.diags.append(_err("E-SEM-005", f"unknown class '{d.class_name}'", d.span))
            sym.data_type = ERROR
        if isinstance(d, A.ArrayDecl):
            size = d.size
            if size != int(size) or not 1 <= size <= MAX_ARRAY:
                self.diags.append(_err("E-SEM-015", f"array size must be a whole number in 1..{MAX_ARRAY}", d.span))
        d.symbol = self.declare(scope, sym)
        return d.symbol

    def declare_class_members(self, info: ClassInfo) -> None:
        for m in info.decl.members:
            d = m.decl
            if isinstance(d, A.FunctionDecl):
                self.declare_function(info.scope, d, info, m.access)
                continue
            sym = self.declare_variable(info.scope, d, Storage.FIELD, info, m.access)
            if sym.decl is d:
                sym.slot = len(info.fields)
                info.fields.append(sym)
            if isinstance(d, A.VarDecl) and not is_literal(d.init):
                self.diags.append(_err("E-SEM-012", "field initializers must be literals", d.init.span))

    def check_composition(self) -> None:
        # Depth-first search over "class X has a field of class Y".
        state: dict[str, int] = {}

        def visit(info: ClassInfo) -> bool:
            state[info.name] = 1
            for f in info.fields:
                if isinstance(f.data_type, ObjectType):
                    target = self.table.classes.get(f.data_type.class_name)
                    if target is None:
                        continue
                    mark = state.get(target.name, 0)
                    if mark == 1 or (mark == 0 and visit(target)):
                        if mark == 1:
                            self.diags.append(_err(
                                "E-SEM-013", f"class '{info.name}' contains itself through field '{f.name}'",
                                f.decl_span,
                            ))
                        return True
            state[info.name] = 2
            return False

        for info in self.table.classes.values():
            if state.get(info.name, 0) == 0:
                visit(info)

    def declare_body(self, fn: A.FunctionDecl) -> None:
        owner = fn.symbol.owner if fn.symbol is not None else None
        parent = owner.scope if owner is not None else self.table.global_scope
        scope = self.table.new_scope("function", parent, owner)
        fn.scope = scope
        for p in fn.params:
            kind = SymbolKind.ARRAY if p.type.is_array else SymbolKind.PARAMETER
            sym = Symbol(p.name, kind, p.type, p.span, scope.id, visible_from=fn.span.start,
                         storage=Storage.LOCAL, decl=p)
            p.symbol = self.declare(scope, sym)
        self.declare_block(fn.body, scope, owner, reuse=True)

    def declare_block(self, block: A.Block, scope: Scope, owner: Optional[ClassInfo], reuse: bool = False) -> None:
        if not reuse:
            scope = self.table.new_scope("block", scope, owner)
        block.scope = scope
        for s in block.stmts:
            self.declare_stmt(s, scope, owner)

    def declare_stmt(self, s: A.Stmt, scope: Scope, owner: Optional[ClassInfo]) -> None:
        if isinstance(s, (A.VarDecl, A.ArrayDecl, A.ObjectDecl)):
            self.declare_variable(scope, s, Storage.LOCAL)
        elif isinstance(s, A.Block):
            self.declare_block(s, scope, owner)
        elif isinstance(s, A.If):
            self.declare_block(s.then, scope, owner)
            if s.else_ is not None:
                self.declare_block(s.else_, scope, owner)
        elif isinstance(s, A.While):
            self.declare_block(s.body, scope, owner)


def build_symbols(program: A.Program) -> ScopeStack:
    return _SymbolBuilder().run(program)


# ---------------------------------------------------------------------------
# shared walking helpers


def iter_code(program: A.Program, scopes: ScopeStack) -> Iterator[tuple[Optional[A.FunctionDecl], A.Node, Scope]]:
    """Yield (enclosing function, statement, scope) for every statement and global declaration."""
    for item in program.items:
        if isinstance(item, A.FunctionDecl):
            yield from _iter_fn(item)
        elif isinstance(item, A.ClassDecl):
            for m in item.members:
                if isinstance(m.decl, A.FunctionDecl):
                    yield from _iter_fn(m.decl)
                else:
                    yield None, m.decl, item.scope
        else:
            yield None, item, scopes.global_scope


def _iter_fn(fn: A.FunctionDecl):
    yield from _iter_block(fn, fn.body)


def _iter_block(fn: A.FunctionDecl, block: A.Block):
    for s in block.stmts:
        yield fn, s, block.scope
        if isinstance(s, A.Block):
            yield from _iter_block(fn, s)
        elif isinstance(s, A.If):
            yield from _iter_block(fn, s.then)
            if s.else_ is not None:
                yield from _iter_block(fn, s.else_)
        elif isinstance(s, A.While):
            yield from _iter_block(fn, s.body)


def stmt_exprs(s: A.Node) -> list[A.Node]:
    """Direct expression/condition children of a statement (not nested blocks)."""
    if isinstance(s, A.VarDecl):
        return [s.init]
    if isinstance(s, A.ArrayDecl):
        return list(s.init or [])
    if isinstance(s, A.Assign):
        return [s.target, s.value]
    if isinstance(s, (A.If, A.While)):
        return [s.cond]
    if isinstance(s, A.Show):
        return [s.expr]
    if isinstance(s, A.Input):
        return [s.target]
    if isinstance(s, A.CallStmt):
        return [s.call]
    if isinstance(s, A.Return):
        return [s.expr] if s.expr is not None else []
    return []


# ---------------------------------------------------------------------------
# pass 2: name resolution


class _Resolver:
    def __init__(self, table: ScopeStack) -> None:
        self.table = table
        self.diags: list[Diagnostic] = []

    def lookup(self, name: str, scope: Scope, at: int) -> Optional[Symbol]:
        for s in scope.chain():
            sym = s.symbols.get(name)
            if sym is None:
                continue
            if sym.kind in (SymbolKind.FUNCTION, SymbolKind.CLASS) or s.kind == "class":
                return sym
            if sym.visible_from <= at:
                return sym
        return None

    def run(self, program: A.Program) -> list[Diagnostic]:
        for _fn, s, scope in iter_code(program, self.table):
            for e in stmt_exprs(s):
                self.resolve(e, scope)
        return self.diags

    def resolve(self, node: A.Node, scope: Scope) -> None:
        if isinstance(node, A.VarRef):
            sym = self.lookup(node.name, scope, node.span.start)
            if sym is None:
                self.diags.append(_err("E-SEM-001", f"'{node.name}' is used before it is declared", node.span))
            elif sym.kind in (SymbolKind.FUNCTION, SymbolKind.CLASS):
                self.diags.append(_err("E-SEM-003", f"'{node.name}' is a {sym.kind.value}, not a value", node.span))
            else:
                node.symbol = sym
                sym.used = True
            return
        if isinstance(node, A.FieldRef):
            self.resolve(node.obj, scope)
            return
        if isinstance(node, A.CallExpr):
            if isinstance(node.callee, A.FieldRef):
                self.resolve(node.callee.obj, scope)
            for a in node.args:
                self.resolve(a, scope)
            return
        for child in A.children(node):
            self.resolve(child, scope)


def check_use_before_decl(program: A.Program, scopes: ScopeStack) -> list[Diagnostic]:
    return _Resolver(scopes).run(program)


# ---------------------------------------------------------------------------
# pass 3: calls and member access


def _object_class(table: ScopeStack, ref: A.Node) -> Optional[ClassInfo]:
    """Class of an object-valued reference, resolving member chains on the way."""
    if isinstance(ref, A.VarRef):
        sym = ref.symbol
    elif isinstance(ref, A.FieldRef):
        sym = ref.symbol
    else:
        return None
    if sym is None or not isinstance(sym.data_type, ObjectType):
        return None
    return table.classes.get(sym.data_type.class_name)


class _CallChecker:
    def __init__(self, table: ScopeStack) -> None:
        self.table = table
        self.diags: list[Diagnostic] = []

    def run(self, program: A.Program) -> list[Diagnostic]:
        for fn, s, scope in iter_code(program, self.table):
            here = fn.symbol.owner if fn is not None and fn.symbol is not None else scope.owner_class
            for e in stmt_exprs(s):
                self.visit(e, scope, here)
        if not self.diags:
            # Argument types need every member resolved first.
            for _fn, s, scope in iter_code(program, self.table):
                for e in stmt_exprs(s):
                    for n in A.walk(e):
                        if isinstance(n, A.CallExpr) and n.function is not None:
                            self.check_arg_types(n, scope)
        return self.diags

    def member(self, ref: A.FieldRef, here: Optional[ClassInfo]) -> Optional[Symbol]:
        info = _object_class(self.table, ref.obj)
        if info is None:
            if ref.obj.symbol is not None:
                self.diags.append(_err("E-SEM-003", f"'{A_text(ref.obj)}' is not an object", ref.obj.span))
            return None
        sym = info.scope.symbols.get(ref.name)
        if sym is None:
            self.diags.append(_err("E-SEM-020", f"class '{info.name}' has no member '{ref.name}'", ref.span))
            return None
        if sym.access is A.Access.PRIVATE and here is not info:
            self.diags.append(_err(
                "E-SEM-008", f"member '{ref.name}' of class '{info.name}' is private", ref.span,
            ))
        return sym

    def visit(self, node: A.Node, scope: Scope, here: Optional[ClassInfo]) -> None:
        if isinstance(node, A.FieldRef):
            self.visit(node.obj, scope, here)
            sym = self.member(node, here)
            if sym is not None:
                if sym.kind is SymbolKind.FUNCTION:
                    self.diags.append(_err("E-SEM-003", f"method '{node.name}' is not a value", node.span))
                else:
                    node.symbol = sym
            return
        if isinstance(node, A.CallExpr):
            for a in node.args:
                self.visit(a, scope, here)
            self.resolve_callee(node, scope, here)
            return
        for child in A.children(node):
            self.visit(child, scope, here)

    def resolve_callee(self, call: A.CallExpr, scope: Scope, here: Optional[ClassInfo]) -> None:
        callee = call.callee
        sym: Optional[Symbol] = None
        if isinstance(callee, A.FieldRef):
            self.visit(callee.obj, scope, here)
            sym = self.member(callee, here)
            if sym is None:
                return
        else:
            for s in scope.chain():
                if callee.name in s.symbols:
                    sym = s.symbols[callee.name]
                    if sym.kind is SymbolKind.FUNCTION:
                        break
            if sym is None:
                self.diags.append(_err("E-SEM-007", f"unknown function '{callee.name}'", callee.span))
                return
            if sym.owner is not None:
                call.implicit_self = True
        if sym.kind is not SymbolKind.FUNCTION:
            self.diags.append(_err("E-SEM-007", f"'{sym.name}' is not a function", callee.span))
            return
        if sym.return_type is ENTRY:
            self.diags.append(_err("E-SEM-007", "the entry function cannot be called", callee.span))
            return
        call.function = sym
        sym.used = True
        if len(call.args) != len(sym.param_types):
            self.diags.append(_err(
                "E-SEM-002",
                f"'{sym.name}' takes {len(sym.param_types)} argument(s) but {len(call.args)} were given",
                call.span,
            ))

    def check_arg_types(self, call: A.CallExpr, scope: Scope) -> None:
        checker = _TypeChecker(self.table, [])
        sym = call.function
        for arg, want in zip(call.args, sym.param_types):
            got = checker.infer(arg, allow_aggregate=True)
            if got is not ERROR and got != want:
                self.diags.append(_err(
                    "E-SEM-006", f"argument of type {_tname(got)} where {_tname(want)} is expected", arg.span,
                ))


def A_text(ref: A.Node) -> str:
    from .pretty import expr

    return expr(ref)


def _tname(t: Type) -> str:
    return t.value if isinstance(t, A.TypeName) else str(t)


def check_calls(program: A.Program, scopes: ScopeStack) -> list[Diagnostic]:
    return _CallChecker(scopes).run(program)


# ---------------------------------------------------------------------------
# pass 4: types


ARITH = {"+", "-", "×", "÷", "%"}
ORDERING = {"<", ">", "<=", ">="}


class _TypeChecker:
    def __init__(self, table: ScopeStack, diags: list[Diagnostic]) -> None:
        self.table = table
        self.diags = diags

    def fail(self, code: str, message: str, span: Span) -> _Error:
        self.diags.append(_err(code, message, span))
        return ERROR

    def infer(self, e: A.Expr, allow_aggregate: bool = False) -> Type:
        t = self._infer(e)
        e.ty = t
        if not allow_aggregate and t is not ERROR and t not in (NUM, STR):
            return self.fail("E-SEM-003", f"a value of type {_tname(t)} cannot be used here", e.span)
        return t

    def _infer(self, e: A.Expr) -> Type:
        if isinstance(e, A.NumLit):
            return NUM
        if isinstance(e, A.StrLit):
            return STR
        if isinstance(e, (A.VarRef, A.FieldRef)):
            if isinstance(e, A.FieldRef):
                self.infer(e.obj, allow_aggregate=True)
            return e.symbol.data_type if e.symbol is not None else ERROR
        if isinstance(e, A.IndexRef):
            target = self.infer(e.target, allow_aggregate=True)
            index = self.infer(e.index)
            if index is not ERROR and index is not NUM:
                self.fail("E-SEM-003", "array index must be a number", e.index.span)
            if target is ERROR:
                return ERROR
            if not (isinstance(target, A.TypeName) and target.is_array):
                return self.fail("E-SEM-003", f"'{A_text(e.target)}' is not an array", e.target.span)
            return target.element
        if isinstance(e, A.Unary):
            t = self.infer(e.operand)
            if t is ERROR:
                return ERROR
            if t is not NUM:
                return self.fail("E-SEM-003", f"unary '{e.op}' needs a number", e.span)
            return NUM
        if isinstance(e, A.Binary):
            lt = self.infer(e.lhs)
            rt = self.infer(e.rhs)
            if e.op == "&":
                # Numbers are converted to text for concatenation.
                e.lhs.to_str = lt is NUM
                e.rhs.to_str = rt is NUM
                return STR
            if lt is ERROR or rt is ERROR:
                return ERROR
            if lt is not NUM or rt is not NUM:
                return self.fail("E-SEM-003", f"operator '{e.op}' needs numbers", e.span)
            return NUM
        if isinstance(e, A.CallExpr):
            if isinstance(e.callee, A.FieldRef):
                self.infer(e.callee.obj, allow_aggregate=True)
            for a in e.args:
                self.infer(a, allow_aggregate=True)
            if e.function is None:
                return ERROR
            return e.function.return_type
        raise TypeError(f"unknown expression {e!r}")

    def cond(self, c: A.BoolExpr) -> None:
        if isinstance(c, A.Cmp):
            lt = self.infer(c.lhs)
            rt = self.infer(c.rhs)
            if lt is ERROR or rt is ERROR:
                return
            if c.op in ORDERING:
                if lt is STR or rt is STR:
                    self.fail("E-SEM-010", f"'{c.op}' cannot compare strings", c.span)
                return
            if lt is not rt:
                self.fail("E-SEM-003", f"cannot compare {_tname(lt)} with {_tname(rt)}", c.span)
        elif isinstance(c, A.Paren):
            self.cond(c.inner)
        else:
            self.cond(c.lhs)
            self.cond(c.rhs)

    def assignable(self, target: Type, value: Type, expr: A.Expr, span: Span, what: str) -> None:
        if target is ERROR or value is ERROR:
            return
        if isinstance(target, ObjectType):
            self.fail("E-SEM-003", "objects cannot be assigned", span)
        elif target == value:
            return
        elif target is STR and value is NUM:
            expr.to_str = True
        else:
            self.fail("E-SEM-003", f"cannot assign {_tname(value)} to {what} of type {_tname(target)}", span)

    def stmt(self, s: A.Node, fn: Optional[A.FunctionDecl]) -> None:
        if isinstance(s, A.VarDecl):
            if s.symbol is None or s.symbol.decl is not s:
                return
            t = self.infer(s.init, allow_aggregate=True)
            self.assignable(s.type, t, s.init, s.init.span, f"'{s.name}'")
        elif isinstance(s, A.ArrayDecl):
            if s.init is not None:
                if len(s.init) != s.size:
                    self.fail("E-SEM-014", f"{len(s.init)} initial value(s) for an array of size "
                              f"{int(s.size) if s.size == int(s.size) else s.size}", s.span)
                for v in s.init:
                    vt = self.infer(v)
                    if vt is not s.type.element:
                        self.fail("E-SEM-003", f"array of {_tname(s.type.element)} cannot hold {_tname(vt)}", v.span)
        elif isinstance(s, A.Assign):
            target = self.lvalue(s.target)
            value = self.infer(s.value, allow_aggregate=True)
            self.assignable(target, value, s.value, s.span, f"'{A_text(s.target)}'")
        elif isinstance(s, (A.If, A.While)):
            self.cond(s.cond)
        elif isinstance(s, A.Show):
            t = self.infer(s.expr)
            s.expr.to_str = t is NUM
        elif isinstance(s, A.Input):
            t = self.lvalue(s.target)
            if t is not ERROR and t not in (NUM, STR):
                self.fail("E-SEM-003", "input needs a number or string target", s.target.span)
            s.ty = t
        elif isinstance(s, A.CallStmt):
            self.infer(s.call, allow_aggregate=True)
        elif isinstance(s, A.Return):
            assert fn is not None
            if fn.return_type is ENTRY:
                if s.expr is not None:
                    self.infer(s.expr, allow_aggregate=True)
                    self.fail("E-SEM-009", "the entry function cannot return a value", s.span)
            elif s.expr is None:
                self.fail("E-SEM-009", f"'{fn.name}' must return a value of type {_tname(fn.return_type)}", s.span)
            else:
                t = self.infer(s.expr, allow_aggregate=True)
                if t is not ERROR and t != fn.return_type:
                    self.fail("E-SEM-009", f"returning {_tname(t)} from a function declared "
                              f"{_tname(fn.return_type)}", s.span)

    def lvalue(self, target: A.LValue) -> Type:
        t = self.infer(target, allow_aggregate=True)
        if isinstance(target, A.VarRef) and target.symbol is not None and target.symbol.kind is SymbolKind.OBJECT:
            return self.fail("E-SEM-003", "objects cannot be assigned", target.span)
        return t


def type_check(program: A.Program, scopes: ScopeStack) -> TypedProgram:
    diags: list[Diagnostic] = []
    checker = _TypeChecker(scopes, diags)
    for fn, s, _scope in iter_code(program, scopes):
        checker.stmt(s, fn)
    for fn in scopes.functions:
        if fn.return_type is not ENTRY and not definitely_returns(fn.body.stmts):
            diags.append(_err("E-SEM-019", f"'{fn.name}' can finish without returning a value", fn.span))
    if diags:
        raise CompileFailed(diags)
    tp = TypedProgram(program, scopes)
    assign_slots(tp)
    return tp


# ---------------------------------------------------------------------------
# slots


def assign_slots(tp: TypedProgram) -> None:
    """Number locals per function in declaration order; globals in program order."""
    tp.scopes.globals = [d.symbol for d in tp.global_items()]
    for i, sym in enumerate(tp.scopes.globals):
        sym.slot = i
    for fn in tp.functions:
        counter = 1 if fn.symbol.owner is not None else 0
        for p in fn.params:
            p.symbol.slot = counter
            counter += 1
        for _fn, s, _scope in _iter_fn(fn):
            if isinstance(s, (A.VarDecl, A.ArrayDecl, A.ObjectDecl)):
                s.symbol.slot = counter
                counter += 1
        fn.slot_count = counter


# ---------------------------------------------------------------------------
# unused declarations


def _pure(e: A.Expr) -> bool:
    """Evaluation cannot fail and has no effects."""
    if isinstance(e, (A.NumLit, A.StrLit, A.VarRef, A.FieldRef)):
        return True
    if isinstance(e, A.Unary):
        return _pure(e.operand)
    if isinstance(e, A.Binary) and e.op == "&":
        return _pure(e.lhs) and _pure(e.rhs)
    return False


def _reads(tp: TypedProgram) -> dict[int, int]:
    """Count value reads of each symbol (by id); assignment targets are not reads."""
    counts: dict[int, int] = {}

    def note(sym: Optional[Symbol]) -> None:
        if sym is not None:
            counts[id(sym)] = counts.get(id(sym), 0) + 1

    def visit(node: A.Node) -> None:
        if isinstance(node, A.VarRef):
            note(node.symbol)
            return
        for child in A.children(node):
            visit(child)

    for _fn, s, _scope in iter_code(tp.program, tp.scopes):
        if isinstance(s, A.Assign):
            target = s.target
            if isinstance(target, A.VarRef):
                if target.symbol is not None and target.symbol.kind is SymbolKind.ARRAY:
                    note(target.symbol)
            else:
                visit(target)
            visit(s.value)
        elif isinstance(s, A.Input):
            # Input into a variable is an observable effect; count it as a use.
            visit(s.target)
        else:
            for e in stmt_exprs(s):
                visit(e)
    return counts


def _removable(tp: TypedProgram, counts: dict[int, int]) -> set[int]:
    candidates: dict[int, Symbol] = {}
    for _fn, s, _scope in iter_code(tp.program, tp.scopes):
        if isinstance(s, (A.VarDecl, A.ArrayDecl)) and s.symbol is not None and s.symbol.storage is not Storage.FIELD:
            sym = s.symbol
            if counts.get(id(sym), 0) == 0:
                if isinstance(s, A.ArrayDecl) or (sym.kind is SymbolKind.VARIABLE and _pure(s.init)):
                    candidates[id(sym)] = sym
    for _fn, s, _scope in iter_code(tp.program, tp.scopes):
        if isinstance(s, A.Assign) and isinstance(s.target, A.VarRef) and s.target.symbol is not None:
            if id(s.target.symbol) in candidates and not _pure(s.value):
                del candidates[id(s.target.symbol)]
    return set(candidates)


def _drop(block: A.Block, dead: set[int], removed: list[A.Node]) -> None:
    kept = []
    for s in block.stmts:
        if isinstance(s, (A.VarDecl, A.ArrayDecl)) and s.symbol is not None and id(s.symbol) in dead:
            removed.append(s)
            continue
        if isinstance(s, A.Assign) and isinstance(s.target, A.VarRef) and id(s.target.symbol) in dead:
            continue
        for sub in (getattr(s, "then", None), getattr(s, "else_", None), getattr(s, "body", None)):
            if isinstance(sub, A.Block):
                _drop(sub, dead, removed)
        if isinstance(s, A.Block):
            _drop(s, dead, removed)
        kept.append(s)
    block.stmts[:] = kept


def eliminate_unused(tp: TypedProgram) -> TypedProgram:
    """Return a copy of ``tp`` without variables that are never read.

    A declaration is removed only if its initializer and every assignment
    to it are side-effect free and cannot fail, so program output is
    unchanged.  Removal repeats until nothing else becomes dead.
    """
    tp = copy.deepcopy(tp)
    removed: list[A.Node] = []
    while True:
        dead = _removable(tp, _reads(tp))
        if not dead:
            break
        before = len(removed)
        for item in tp.program.items:
            if isinstance(item, A.FunctionDecl):
                _drop(item.body, dead, removed)
            elif isinstance(item, A.ClassDecl):
                for m in item.members:
                    if isinstance(m.decl, A.FunctionDecl):
                        _drop(m.decl.body, dead, removed)
        globals_kept = []
        for item in tp.program.items:
            if isinstance(item, (A.VarDecl, A.ArrayDecl)) and item.symbol is not None and id(item.symbol) in dead:
                removed.append(item)
            else:
                globals_kept.append(item)
        tp.program.items[:] = globals_kept
        if len(removed) == before:
            break
    for d in removed:
        tp.warnings.append(warning(Phase.SEMANTIC, "W-SEM-001", f"unused variable '{d.name}' removed", d.span))
    assign_slots(tp)
    return tp


# ---------------------------------------------------------------------------


def analyze(program: A.Program, eliminate: bool = True) -> TypedProgram:
    """Run every pass; raises CompileFailed with the first failing pass's errors."""
    scopes = build_symbols(program)
    if scopes.diagnostics:
        raise CompileFailed(scopes.diagnostics)
    for check in (check_use_before_decl, check_calls):
        diags = check(program, scopes)
        if diags:
            raise CompileFailed(diags)
    tp = type_check(program, scopes)
    if eliminate:
        tp = eliminate_unused(tp)
    return tp
