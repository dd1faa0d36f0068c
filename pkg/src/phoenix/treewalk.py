"""Direct interpreter over the typed tree, used as an oracle for the bytecode path.

It shares the value helpers of the VM (number formatting, arithmetic,
index checks, input parsing) but none of the code generation or
instruction dispatch, so agreement between the two exercises codegen,
linking and the machine loop.
"""

from __future__ import annotations

import sys
import threading
from typing import IO, Iterable, Optional, Union

from . import ast as A
from .semantics import Storage, TypedProgram, literal_value
from .vm import (
    DEFAULT_MAX_DEPTH, InputStream, Obj, RunResult, RuntimeFault, Transcript, check_index,
    default_steps, exec_arithmetic, exec_compare, exec_concat, num_to_str, parse_number,
)


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Halt(Exception):
    pass


class TreeWalker:
    def __init__(self, tp: TypedProgram, inp: InputStream, out: Transcript, *,
                 max_steps: Optional[int] = None, max_depth: int = DEFAULT_MAX_DEPTH):
        self.tp = tp
        self.inp = inp
        self.out = out
        self.max_steps = default_steps() if max_steps is None else max_steps
        self.max_depth = max_depth
        self.steps = 0
        self.depth = 1
        self.class_index = {c.name: c for c in tp.classes}
        self.globals: list = [0.0] * len(tp.globals)

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise RuntimeFault("R-006", f"step limit {self.max_steps} exceeded")

    # objects

    def new_object(self, class_name: str) -> Obj:
        info = self.class_index[class_name]
        fields = []
        for sym in info.fields:
            d = sym.decl
            if isinstance(d, A.VarDecl):
                fields.append(literal_value(d.init))
            elif isinstance(d, A.ObjectDecl):
                fields.append(self.new_object(d.class_name))
            elif d.init is not None:
                fields.append([v.value for v in d.init])
            else:
                fields.append([0.0 if d.type is A.TypeName.NUMLIST else ""] * int(d.size))
        return Obj(info.index, fields)

    # expressions

    def eval(self, e: A.Expr, frame: list):
        v = self._eval(e, frame)
        return num_to_str(v) if e.to_str else v

    def _eval(self, e: A.Expr, frame: list):
        self.tick()
        if isinstance(e, (A.NumLit, A.StrLit)):
            return e.value
        if isinstance(e, A.VarRef):
            sym = e.symbol
            if sym.storage is Storage.LOCAL:
                return frame[sym.slot]
            if sym.storage is Storage.GLOBAL:
                return self.globals[sym.slot]
            return frame[0].fields[sym.slot]
        if isinstance(e, A.FieldRef):
            return self.eval(e.obj, frame).fields[e.symbol.slot]
        if isinstance(e, A.IndexRef):
            arr = self.eval(e.target, frame)
            idx = self.eval(e.index, frame)
            return arr[check_index(arr, idx)]
        if isinstance(e, A.Unary):
            v = self.eval(e.operand, frame)
            return -v if e.op == "-" else v
        if isinstance(e, A.Binary):
            a = self.eval(e.lhs, frame)
            b = self.eval(e.rhs, frame)
            if e.op == "&":
                return exec_concat(a, b)
            return exec_arithmetic(e.op, a, b)
        if isinstance(e, A.CallExpr):
            return self.call(e, frame)
        raise TypeError(f"unknown expression {e!r}")

    def call(self, c: A.CallExpr, frame: list):
        fn = c.function.decl
        args = []
        if c.implicit_self:
            args.append(frame[0])
        elif isinstance(c.callee, A.FieldRef):
            args.append(self.eval(c.callee.obj, frame))
        args.extend(self.eval(a, frame) for a in c.args)
        if self.depth + 1 > self.max_depth:
            raise RuntimeFault("R-005", f"call depth limit {self.max_depth} exceeded")
        callee = args + [0.0] * (fn.slot_count - len(args))
        self.depth += 1
        try:
            self.block(fn.body.stmts, callee)
        except _Return as r:
            return r.value
        finally:
            self.depth -= 1
        raise AssertionError(f"{fn.name} finished without returning")

    def cond(self, c: A.BoolExpr, frame: list) -> bool:
        if isinstance(c, A.Cmp):
            a = self.eval(c.lhs, frame)
            b = self.eval(c.rhs, frame)
            return exec_compare(c.op, a, b)
        if isinstance(c, A.Paren):
            return self.cond(c.inner, frame)
        if isinstance(c, A.And):
            return self.cond(c.lhs, frame) and self.cond(c.rhs, frame)
        return self.cond(c.lhs, frame) or self.cond(c.rhs, frame)

    # statements

    def locate(self, target: A.LValue, frame: list):
        """Evaluate the parts of an assignment target that come before the value."""
        if isinstance(target, A.VarRef):
            return None
        if isinstance(target, A.FieldRef):
            return self.eval(target.obj, frame)
        return self.eval(target.target, frame), self.eval(target.index, frame)

    def store(self, target: A.LValue, where, value, frame: list) -> None:
        if isinstance(target, A.VarRef):
            sym = target.symbol
            if sym.storage is Storage.LOCAL:
                frame[sym.slot] = value
            elif sym.storage is Storage.GLOBAL:
                self.globals[sym.slot] = value
            else:
                frame[0].fields[sym.slot] = value
        elif isinstance(target, A.FieldRef):
            where.fields[target.symbol.slot] = value
        else:
            arr, idx = where
            arr[check_index(arr, idx)] = value

    def declare(self, d: A.Decl, frame: list) -> None:
        if isinstance(d, A.VarDecl):
            value = self.eval(d.init, frame)
        elif isinstance(d, A.ArrayDecl):
            if d.init is not None:
                value = [v.value for v in d.init]
            else:
                value = [0.0 if d.type is A.TypeName.NUMLIST else ""] * int(d.size)
        else:
            value = self.new_object(d.class_name)
        if d.symbol.storage is Storage.GLOBAL:
            self.globals[d.symbol.slot] = value
        else:
            frame[d.symbol.slot] = value

    def block(self, stmts: list[A.Stmt], frame: list) -> None:
        for s in stmts:
            self.stmt(s, frame)

    def stmt(self, s: A.Stmt, frame: list) -> None:
        self.tick()
        if isinstance(s, (A.VarDecl, A.ArrayDecl, A.ObjectDecl)):
            self.declare(s, frame)
        elif isinstance(s, A.Assign):
            where = self.locate(s.target, frame)
            self.store(s.target, where, self.eval(s.value, frame), frame)
        elif isinstance(s, A.Input):
            where = self.locate(s.target, frame)
            self.out.prompt(s.prompt)
            line = self.inp.read_line()
            if line is None:
                raise RuntimeFault("R-007", "end of input")
            value = parse_number(line) if s.ty is A.TypeName.NUM else line
            self.store(s.target, where, value, frame)
        elif isinstance(s, A.Show):
            self.out.show(self.eval(s.expr, frame))
        elif isinstance(s, A.CallStmt):
            self.call(s.call, frame)
        elif isinstance(s, A.Return):
            if s.expr is None:
                raise _Halt()
            raise _Return(self.eval(s.expr, frame))
        elif isinstance(s, A.Block):
            self.block(s.stmts, frame)
        elif isinstance(s, A.If):
            if self.cond(s.cond, frame):
                self.block(s.then.stmts, frame)
            elif s.else_ is not None:
                self.block(s.else_.stmts, frame)
        elif isinstance(s, A.While):
            while self.cond(s.cond, frame):
                self.block(s.body.stmts, frame)
                self.tick()
        else:
            raise TypeError(f"unknown statement {s!r}")

    def run(self) -> None:
        entry = self.tp.entry
        frame = [0.0] * entry.slot_count
        try:
            for d in self.tp.global_items():
                self.declare(d, frame)
            self.block(entry.body.stmts, frame)
        except _Halt:
            pass


def _deep(fn):
    """Run ``fn`` on a thread with room for deeply recursive Phoenix programs."""
    box: dict = {}

    def target():
        try:
            box["value"] = fn()
        except BaseException as exc:  # re-raised on the calling thread
            box["error"] = exc

    old_limit = sys.getrecursionlimit()
    old_size = threading.stack_size()
    sys.setrecursionlimit(max(old_limit, 400_000))
    threading.stack_size(1024 * 1024 * 1024)
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]
    return box.get("value")


def tree_walk_eval(tp: TypedProgram, input: Union[IO[str], Iterable[str], None] = None,
                   output: Optional[IO[str]] = None, *, max_steps: Optional[int] = None,
                   max_depth: int = DEFAULT_MAX_DEPTH) -> RunResult:
    transcript = Transcript(sink=output)
    walker = TreeWalker(tp, InputStream(input), transcript, max_steps=max_steps, max_depth=max_depth)

    def go() -> RunResult:
        try:
            walker.run()
        except RuntimeFault as fault:
            return RunResult(transcript, fault, walker.steps)
        return RunResult(transcript, None, walker.steps)

    return _deep(go)
