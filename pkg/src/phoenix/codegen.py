"""Bytecode generation, linking and the ``.phxc`` program image.

Image layout (all integers little-endian)::

    "PHXC"  u16 version (=1)
    u32 constant count, then per constant: u8 tag (0 num, 1 str);
        num: f64 | str: u32 byte length + UTF-8 bytes
    u16 global count, then per global: name, u8 kind
    u16 class count, then per class: name, u16 field count, per field:
        name, u8 kind, payload (see ``FieldSpec``)
    u16 function count, then per function: name, u8 param count,
        u16 local slot count, u32 code length, code
    u16 entry function index

Names are encoded like string constants (u32 length + UTF-8).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Union

from . import ast as A
from .core import CompileError, Phase, error
from .semantics import ObjectType, Storage, TypedProgram, literal_value, stmt_returns

MAGIC = b"PHXC"
VERSION = 1


class Op(IntEnum):
    PUSH_NUM = 0x01
    PUSH_STR = 0x02
    LOAD = 0x03
    STORE = 0x04
    LOAD_GLOBAL = 0x05
    STORE_GLOBAL = 0x06
    NEW_ARR = 0x07
    LOAD_IDX = 0x08
    STORE_IDX = 0x09
    ADD = 0x0A
    SUB = 0x0B
    MUL = 0x0C
    DIV = 0x0D
    MOD = 0x0E
    NEG = 0x0F
    CONCAT = 0x10
    NUM_TO_STR = 0x11
    CMP_EQ = 0x12
    CMP_NE = 0x13
    CMP_LT = 0x14
    CMP_GT = 0x15
    CMP_LE = 0x16
    CMP_GE = 0x17
    JMP = 0x18
    JMP_IF_FALSE = 0x19
    CALL = 0x1A
    RET = 0x1B
    SHOW = 0x1C
    INPUT = 0x1D
    NEW_OBJ = 0x1E
    GET_FIELD = 0x1F
    SET_FIELD = 0x20
    HALT = 0x21
    POP = 0x22


# struct formats of each opcode's operands
OPERANDS: dict[Op, str] = {
    Op.PUSH_NUM: "<H", Op.PUSH_STR: "<H", Op.LOAD: "<H", Op.STORE: "<H",
    Op.LOAD_GLOBAL: "<H", Op.STORE_GLOBAL: "<H", Op.NEW_ARR: "<BH",
    Op.JMP: "<i", Op.JMP_IF_FALSE: "<i", Op.CALL: "<HB", Op.INPUT: "<B",
    Op.NEW_OBJ: "<H", Op.GET_FIELD: "<H", Op.SET_FIELD: "<H",
}
OPERAND_SIZE = {op: struct.calcsize(fmt) for op, fmt in OPERANDS.items()}

ARR_STR = 0x01       # element type bit of NEW_ARR
ARR_FROM_STACK = 0x02  # NEW_ARR pops its initial elements

INPUT_NUM, INPUT_STR = 0, 1

BINARY_OPS = {"+": Op.ADD, "-": Op.SUB, "×": Op.MUL, "÷": Op.DIV, "%": Op.MOD, "&": Op.CONCAT}
CMP_OPS = {"==": Op.CMP_EQ, "!=": Op.CMP_NE, "<": Op.CMP_LT, ">": Op.CMP_GT, "<=": Op.CMP_LE, ">=": Op.CMP_GE}


class Kind(IntEnum):
    NUM = 0
    STR = 1
    NUMLIST = 2
    STRLIST = 3
    OBJ = 4


def _kind_of(t) -> Kind:
    if isinstance(t, ObjectType):
        return Kind.OBJ
    return Kind[t.value]


# ---------------------------------------------------------------------------
# image model


@dataclass
class FieldSpec:
    """A class field and how a fresh object initialises it.

    NUM/STR: ``const`` is the constant index of the initial value.
    NUMLIST/STRLIST: ``length`` elements, from ``init`` constants or zero-filled.
    OBJ: ``class_index`` of the nested object.
    """

    name: str
    kind: Kind
    const: int = 0
    length: int = 0
    init: Optional[list[int]] = None
    class_index: int = 0


@dataclass
class ClassSpec:
    name: str
    fields: list[FieldSpec] = field(default_factory=list)


@dataclass
class GlobalSpec:
    name: str
    kind: Kind


@dataclass
class FunctionChunk:
    name: str
    param_count: int
    local_slot_count: int
    code: bytes


@dataclass
class ProgramImage:
    constants: list[Union[float, str]]
    globals: list[GlobalSpec]
    classes: list[ClassSpec]
    functions: list[FunctionChunk]
    entry: int

    def to_bytes(self) -> bytes:
        out = bytearray(MAGIC)
        out += struct.pack("<H", VERSION)
        out += struct.pack("<I", len(self.constants))
        for c in self.constants:
            if isinstance(c, str):
                out += b"\x01" + _pack_str(c)
            else:
                out += b"\x00" + struct.pack("<d", c)
        out += struct.pack("<H", len(self.globals))
        for g in self.globals:
            out += _pack_str(g.name) + struct.pack("<B", g.kind)
        out += struct.pack("<H", len(self.classes))
        for cls in self.classes:
            out += _pack_str(cls.name) + struct.pack("<H", len(cls.fields))
            for f in cls.fields:
                out += _pack_str(f.name) + struct.pack("<B", f.kind)
                if f.kind in (Kind.NUM, Kind.STR):
                    out += struct.pack("<H", f.const)
                elif f.kind is Kind.OBJ:
                    out += struct.pack("<H", f.class_index)
                else:
                    out += struct.pack("<HB", f.length, f.init is not None)
                    for idx in f.init or ():
                        out += struct.pack("<H", idx)
        out += struct.pack("<H", len(self.functions))
        for fn in self.functions:
            out += _pack_str(fn.name)
            out += struct.pack("<BHI", fn.param_count, fn.local_slot_count, len(fn.code))
            out += fn.code
        out += struct.pack("<H", self.entry)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProgramImage":
        r = _Reader(data)
        if r.take(4) != MAGIC:
            raise _malformed("bad magic number")
        version = r.unpack("<H")[0]
        if version != VERSION:
            raise _malformed(f"unsupported image version {version}")
        constants: list[Union[float, str]] = []
        for _ in range(r.unpack("<I")[0]):
            tag = r.unpack("<B")[0]
            if tag == 0:
                constants.append(r.unpack("<d")[0])
            elif tag == 1:
                constants.append(r.string())
            else:
                raise _malformed(f"unknown constant tag {tag}")
        globals_ = [GlobalSpec(r.string(), r.kind()) for _ in range(r.unpack("<H")[0])]
        classes = []
        for _ in range(r.unpack("<H")[0]):
            spec = ClassSpec(r.string())
            for _ in range(r.unpack("<H")[0]):
                f = FieldSpec(r.string(), r.kind())
                if f.kind in (Kind.NUM, Kind.STR):
                    f.const = r.unpack("<H")[0]
                elif f.kind is Kind.OBJ:
                    f.class_index = r.unpack("<H")[0]
                else:
                    f.length, has_init = r.unpack("<HB")
                    if has_init:
                        f.init = [r.unpack("<H")[0] for _ in range(f.length)]
                spec.fields.append(f)
            classes.append(spec)
        functions = []
        for _ in range(r.unpack("<H")[0]):
            name = r.string()
            params, slots, size = r.unpack("<BHI")
            functions.append(FunctionChunk(name, params, slots, r.take(size)))
        entry = r.unpack("<H")[0]
        if r.pos != len(data):
            raise _malformed("trailing bytes after image")
        img = cls(constants, globals_, classes, functions, entry)
        _check_indices(img)
        try:
            verify_image(img)
        except StackError as exc:
            raise _malformed(str(exc)) from None
        return img


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _malformed(message: str) -> CompileError:
    return CompileError(error(Phase.LINK, "E-LNK-003", f"malformed image: {message}"))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise _malformed("truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        n = self.unpack("<I")[0]
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError:
            raise _malformed("invalid UTF-8 in string") from None

    def kind(self) -> Kind:
        k = self.unpack("<B")[0]
        try:
            return Kind(k)
        except ValueError:
            raise _malformed(f"unknown value kind {k}") from None


def _check_indices(img: ProgramImage) -> None:
    if not img.functions or img.entry >= len(img.functions):
        raise _malformed("entry index out of range")
    for cls in img.classes:
        for f in cls.fields:
            if f.kind is Kind.OBJ and f.class_index >= len(img.classes):
                raise _malformed(f"field {f.name} names class {f.class_index}")
            consts = [f.const] if f.kind in (Kind.NUM, Kind.STR) else (f.init or [])
            if any(c >= len(img.constants) for c in consts):
                raise _malformed(f"field {f.name} names a missing constant")
    for fn in img.functions:
        for _off, op, args in decode(fn.code):
            if op in (Op.PUSH_NUM, Op.PUSH_STR) and args[0] >= len(img.constants):
                raise _malformed(f"{fn.name}: constant {args[0]} out of range")
            if op is Op.CALL and args[0] >= len(img.functions):
                raise _malformed(f"{fn.name}: call to missing function {args[0]}")


def decode(code: bytes) -> list[tuple[int, Op, tuple]]:
    """Split a chunk into (offset, opcode, operands)."""
    out = []
    pos = 0
    while pos < len(code):
        try:
            op = Op(code[pos])
        except ValueError:
            raise _malformed(f"unknown opcode 0x{code[pos]:02x} at {pos}") from None
        fmt = OPERANDS.get(op)
        size = OPERAND_SIZE.get(op, 0)
        if pos + 1 + size > len(code):
            raise _malformed(f"truncated operand at {pos}")
        args = struct.unpack_from(fmt, code, pos + 1) if fmt else ()
        out.append((pos, op, args))
        pos += 1 + size
    return out


# ---------------------------------------------------------------------------
# assembler


class Label:
    __slots__ = ("pos", "fixups")

    def __init__(self) -> None:
        self.pos: Optional[int] = None
        self.fixups: list[int] = []


class Assembler:
    def __init__(self) -> None:
        self.code = bytearray()

    def emit(self, op: Op, *args: int) -> None:
        self.code.append(op)
        fmt = OPERANDS.get(op)
        if fmt:
            try:
                self.code += struct.pack(fmt, *args)
            except struct.error:
                raise CompileError(error(
                    Phase.CODEGEN, "E-GEN-002", f"operand {args} of {op.name} does not fit its encoding",
                )) from None

    def jump(self, op: Op, label: Label) -> None:
        self.code.append(op)
        label.fixups.append(len(self.code))
        self.code += b"\0\0\0\0"
        if label.pos is not None:
            self._patch(label, len(label.fixups) - 1)

    def bind(self, label: Label) -> None:
        label.pos = len(self.code)
        for i in range(len(label.fixups)):
            self._patch(label, i)

    def _patch(self, label: Label, i: int) -> None:
        at = label.fixups[i]
        rel = label.pos - (at + 4)
        if not -(2**31) <= rel < 2**31:
            raise CompileError(error(Phase.CODEGEN, "E-GEN-001", "jump displacement overflow"))
        struct.pack_into("<i", self.code, at, rel)


# ---------------------------------------------------------------------------
# generation


class ConstantPool:
    def __init__(self) -> None:
        self.values: list[Union[float, str]] = []
        self.index: dict[tuple, int] = {}

    def add(self, value: Union[float, str]) -> int:
        key = ("s", value) if isinstance(value, str) else ("n", struct.pack("<d", value))
        if key not in self.index:
            self.index[key] = len(self.values)
            self.values.append(value)
        return self.index[key]


class _FunctionGen:
    def __init__(self, gen: "Generator", fn: A.FunctionDecl):
        self.gen = gen
        self.fn = fn
        self.asm = Assembler()
        self.is_entry = fn.return_type is A.TypeName.ENTRY

    @property
    def pool(self) -> ConstantPool:
        return self.gen.pool

    def emit(self, op: Op, *args: int) -> None:
        self.asm.emit(op, *args)

    # expressions

    def expression(self, e: A.Expr) -> None:
        self._expression(e)
        if e.to_str:
            self.emit(Op.NUM_TO_STR)

    def _expression(self, e: A.Expr) -> None:
        if isinstance(e, A.NumLit):
            self.emit(Op.PUSH_NUM, self.pool.add(e.value))
        elif isinstance(e, A.StrLit):
            self.emit(Op.PUSH_STR, self.pool.add(e.value))
        elif isinstance(e, A.VarRef):
            sym = e.symbol
            if sym.storage is Storage.LOCAL:
                self.emit(Op.LOAD, sym.slot)
            elif sym.storage is Storage.GLOBAL:
                self.emit(Op.LOAD_GLOBAL, sym.slot)
            else:
                self.emit(Op.LOAD, 0)
                self.emit(Op.GET_FIELD, sym.slot)
        elif isinstance(e, A.FieldRef):
            self.expression(e.obj)
            self.emit(Op.GET_FIELD, e.symbol.slot)
        elif isinstance(e, A.IndexRef):
            self.expression(e.target)
            self.expression(e.index)
            self.emit(Op.LOAD_IDX)
        elif isinstance(e, A.Unary):
            self.expression(e.operand)
            if e.op == "-":
                self.emit(Op.NEG)
        elif isinstance(e, A.Binary):
            self.expression(e.lhs)
            self.expression(e.rhs)
            self.emit(BINARY_OPS[e.op])
        elif isinstance(e, A.CallExpr):
            self.call(e)
        else:
            raise TypeError(f"unknown expression {e!r}")

    def call(self, c: A.CallExpr) -> None:
        sym = c.function
        argc = len(c.args)
        if c.implicit_self:
            self.emit(Op.LOAD, 0)
            argc += 1
        elif isinstance(c.callee, A.FieldRef):
            self.expression(c.callee.obj)
            argc += 1
        for a in c.args:
            self.expression(a)
        self.emit(Op.CALL, sym.slot, argc)

    def condition(self, c: A.BoolExpr, on_false: Label) -> None:
        """Fall through when ``c`` holds, jump to ``on_false`` otherwise."""
        if isinstance(c, A.Cmp):
            self.expression(c.lhs)
            self.expression(c.rhs)
            self.emit(CMP_OPS[c.op])
            self.asm.jump(Op.JMP_IF_FALSE, on_false)
        elif isinstance(c, A.Paren):
            self.condition(c.inner, on_false)
        elif isinstance(c, A.And):
            self.condition(c.lhs, on_false)
            self.condition(c.rhs, on_false)
        else:
            try_rhs, passed = Label(), Label()
            self.condition(c.lhs, try_rhs)
            self.asm.jump(Op.JMP, passed)
            self.asm.bind(try_rhs)
            self.condition(c.rhs, on_false)
            self.asm.bind(passed)

    # statements

    def store(self, target: A.LValue) -> None:
        """Emit the store half of an assignment; ``prepare`` must have run first."""
        if isinstance(target, A.VarRef):
            sym = target.symbol
            if sym.storage is Storage.LOCAL:
                self.emit(Op.STORE, sym.slot)
            elif sym.storage is Storage.GLOBAL:
                self.emit(Op.STORE_GLOBAL, sym.slot)
            else:
                self.emit(Op.SET_FIELD, sym.slot)
        elif isinstance(target, A.FieldRef):
            self.emit(Op.SET_FIELD, target.symbol.slot)
        else:
            self.emit(Op.STORE_IDX)

    def prepare(self, target: A.LValue) -> None:
        """Push whatever the store needs beneath the value (object, array, index)."""
        if isinstance(target, A.VarRef):
            if target.symbol.storage is Storage.FIELD:
                self.emit(Op.LOAD, 0)
        elif isinstance(target, A.FieldRef):
            self.expression(target.obj)
        else:
            self.expression(target.target)
            self.expression(target.index)

    def declare(self, d: A.Decl) -> None:
        sym = d.symbol
        if isinstance(d, A.VarDecl):
            self.expression(d.init)
        elif isinstance(d, A.ArrayDecl):
            flags = ARR_STR if d.type is A.TypeName.STRLIST else 0
            if d.init is not None:
                for v in d.init:
                    self._expression(v)
                self.emit(Op.NEW_ARR, flags | ARR_FROM_STACK, len(d.init))
            else:
                self.emit(Op.NEW_ARR, flags, int(d.size))
        else:
            self.emit(Op.NEW_OBJ, self.gen.class_index[d.class_name])
        if sym.storage is Storage.GLOBAL:
            self.emit(Op.STORE_GLOBAL, sym.slot)
        else:
            self.emit(Op.STORE, sym.slot)

    def block(self, stmts: list[A.Stmt]) -> None:
        for s in stmts:
            self.statement(s)
            if stmt_returns(s):
                break

    def statement(self, s: A.Stmt) -> None:
        if isinstance(s, (A.VarDecl, A.ArrayDecl, A.ObjectDecl)):
            self.declare(s)
        elif isinstance(s, A.Assign):
            self.prepare(s.target)
            self.expression(s.value)
            self.store(s.target)
        elif isinstance(s, A.Input):
            self.prepare(s.target)
            self.emit(Op.PUSH_STR, self.pool.add(s.prompt))
            self.emit(Op.INPUT, INPUT_NUM if s.ty is A.TypeName.NUM else INPUT_STR)
            self.store(s.target)
        elif isinstance(s, A.Show):
            self.expression(s.expr)
            self.emit(Op.SHOW)
        elif isinstance(s, A.CallStmt):
            self.call(s.call)
            self.emit(Op.POP)
        elif isinstance(s, A.Return):
            if self.is_entry:
                self.emit(Op.HALT)
            else:
                self.expression(s.expr)
                self.emit(Op.RET)
        elif isinstance(s, A.Block):
            self.block(s.stmts)
        elif isinstance(s, A.If):
            else_label, end = Label(), Label()
            self.condition(s.cond, else_label)
            self.block(s.then.stmts)
            if s.else_ is not None:
                if not stmt_returns(s.then):
                    self.asm.jump(Op.JMP, end)
                self.asm.bind(else_label)
                self.block(s.else_.stmts)
                self.asm.bind(end)
            else:
                self.asm.bind(else_label)
        elif isinstance(s, A.While):
            top, exit_ = Label(), Label()
            self.asm.bind(top)
            self.condition(s.cond, exit_)
            self.block(s.body.stmts)
            self.asm.jump(Op.JMP, top)
            self.asm.bind(exit_)
        else:
            raise TypeError(f"unknown statement {s!r}")

    def chunk(self, global_decls: list[A.Decl]) -> FunctionChunk:
        if self.is_entry:
            for d in global_decls:
                self.declare(d)
        self.block(self.fn.body.stmts)
        if self.is_entry and not stmt_returns(self.fn.body):
            self.emit(Op.HALT)
        owner = self.fn.symbol.owner
        params = len(self.fn.params) + (1 if owner is not None else 0)
        return FunctionChunk(self.fn.name, params, self.fn.slot_count, bytes(self.asm.code))


class Generator:
    def __init__(self, tp: TypedProgram):
        self.tp = tp
        self.pool = ConstantPool()
        self.class_index = {c.name: c.index for c in tp.classes}

    def classes(self) -> list[ClassSpec]:
        specs = []
        for info in self.tp.classes:
            spec = ClassSpec(info.name)
            for sym in info.fields:
                d = sym.decl
                f = FieldSpec(sym.name, _kind_of(sym.data_type))
                if isinstance(d, A.VarDecl):
                    f.const = self.pool.add(literal_value(d.init))
                elif isinstance(d, A.ArrayDecl):
                    f.length = int(d.size)
                    if d.init is not None:
                        f.init = [self.pool.add(v.value) for v in d.init]
                else:
                    f.class_index = self.class_index[d.class_name]
                spec.fields.append(f)
            specs.append(spec)
        return specs

    def run(self) -> tuple[list[FunctionChunk], dict]:
        globals_ = [GlobalSpec(sym.name, _kind_of(sym.data_type)) for sym in self.tp.globals]
        classes = self.classes()
        chunks = [_FunctionGen(self, fn).chunk(self.tp.global_items()) for fn in self.tp.functions]
        tables = {
            "constants": self.pool.values,
            "globals": globals_,
            "classes": classes,
            "entry": self.tp.entry.symbol.slot,
        }
        return chunks, tables


def gen_program(tp: TypedProgram) -> tuple[list[FunctionChunk], dict]:
    return Generator(tp).run()


def link(chunks: list[FunctionChunk], tables: dict) -> ProgramImage:
    for fn in chunks:
        for _off, op, args in decode(fn.code):
            if op is Op.CALL and args[0] >= len(chunks):
                raise CompileError(error(
                    Phase.LINK, "E-LNK-001",
                    f"{fn.name}: call to function index {args[0]} but only {len(chunks)} exist",
                ))
    entry = tables.get("entry")
    if entry is None or not 0 <= entry < len(chunks):
        raise CompileError(error(Phase.LINK, "E-LNK-002", "no entry function"))
    return ProgramImage(
        list(tables["constants"]), list(tables["globals"]), list(tables["classes"]), list(chunks), entry,
    )


# ---------------------------------------------------------------------------
# inspection


def _operand_text(img: ProgramImage, off: int, op: Op, args: tuple) -> str:
    if op in (Op.JMP, Op.JMP_IF_FALSE):
        target = off + 5 + args[0]
        return f"{args[0]:+d} (-> {target:04x})"
    if op is Op.NEW_ARR:
        kind = "str" if args[0] & ARR_STR else "num"
        src = " from-stack" if args[0] & ARR_FROM_STACK else ""
        return f"{kind} {args[1]}{src}"
    if op is Op.INPUT:
        return "num" if args[0] == INPUT_NUM else "str"
    text = " ".join(str(a) for a in args)
    if op in (Op.PUSH_NUM, Op.PUSH_STR) and args[0] < len(img.constants):
        c = img.constants[args[0]]
        text += f"    ; {c!r}" if isinstance(c, float) else f'    ; "{c}"'
    elif op is Op.CALL and args[0] < len(img.functions):
        text += f"    ; {img.functions[args[0]].name}"
    return text


def disassemble(img: Union[ProgramImage, bytes]) -> str:
    if isinstance(img, (bytes, bytearray)):
        img = ProgramImage.from_bytes(bytes(img))
    lines = []
    for i, fn in enumerate(img.functions):
        mark = " entry" if i == img.entry else ""
        lines.append(f"function {i} {fn.name} params={fn.param_count} locals={fn.local_slot_count}{mark}")
        for off, op, args in decode(fn.code):
            operands = _operand_text(img, off, op, args)
            lines.append(f"{off:04x}: {op.name}" + (f" {operands}" if operands else ""))
        lines.append("")
    return "\n".join(lines)


def count_opcodes(img: ProgramImage) -> dict[Op, int]:
    counts: dict[Op, int] = {}
    for fn in img.functions:
        for _off, op, _args in decode(fn.code):
            counts[op] = counts.get(op, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# static stack verification


class StackError(Exception):
    pass


_EFFECT = {
    Op.PUSH_NUM: 1, Op.PUSH_STR: 1, Op.LOAD: 1, Op.STORE: -1, Op.LOAD_GLOBAL: 1,
    Op.STORE_GLOBAL: -1, Op.LOAD_IDX: -1, Op.STORE_IDX: -3, Op.ADD: -1, Op.SUB: -1,
    Op.MUL: -1, Op.DIV: -1, Op.MOD: -1, Op.NEG: 0, Op.CONCAT: -1, Op.NUM_TO_STR: 0,
    Op.CMP_EQ: -1, Op.CMP_NE: -1, Op.CMP_LT: -1, Op.CMP_GT: -1, Op.CMP_LE: -1, Op.CMP_GE: -1,
    Op.JMP: 0, Op.JMP_IF_FALSE: -1, Op.SHOW: -1, Op.INPUT: 0, Op.NEW_OBJ: 1,
    Op.GET_FIELD: 0, Op.SET_FIELD: -2, Op.POP: -1,
}
_NEEDS = {
    Op.STORE: 1, Op.STORE_GLOBAL: 1, Op.LOAD_IDX: 2, Op.STORE_IDX: 3, Op.NEG: 1,
    Op.NUM_TO_STR: 1, Op.JMP_IF_FALSE: 1, Op.SHOW: 1, Op.INPUT: 1, Op.GET_FIELD: 1,
    Op.SET_FIELD: 2, Op.POP: 1, Op.RET: 1,
}


def verify_chunk(fn: FunctionChunk) -> dict[int, int]:
    """Check stack discipline of one chunk; returns the depth before each reachable offset.

    Depth never drops below zero, agrees at every join point, is 1 before
    RET (the return value) and 0 before HALT; jumps land on opcode boundaries
    and control never runs off the end of the chunk.
    """
    instrs = decode(fn.code)
    index = {off: i for i, (off, _op, _a) in enumerate(instrs)}
    depth_at: dict[int, int] = {}
    work = [(0, 0)] if instrs else []
    if not instrs:
        raise StackError(f"{fn.name}: empty chunk")
    while work:
        off, depth = work.pop()
        if off not in index:
            raise StackError(f"{fn.name}: control reaches {off:04x}, not an opcode boundary")
        seen = depth_at.get(off)
        if seen is not None:
            if seen != depth:
                raise StackError(f"{fn.name}: depth {seen} vs {depth} at join {off:04x}")
            continue
        depth_at[off] = depth
        _o, op, args = instrs[index[off]]
        need = _NEEDS.get(op, 0)
        if op in (Op.ADD, Op.SUB, Op.MUL, Op.DIV, Op.MOD, Op.CONCAT) or op.name.startswith("CMP_"):
            need = 2
        if op is Op.CALL:
            need = args[1]
            effect = 1 - args[1]
        elif op is Op.NEW_ARR:
            need = args[1] if args[0] & ARR_FROM_STACK else 0
            effect = 1 - need
        else:
            effect = _EFFECT.get(op, 0)
        if depth < need:
            raise StackError(f"{fn.name}: stack underflow at {off:04x} ({op.name})")
        nxt = off + 1 + OPERAND_SIZE.get(op, 0)
        if op is Op.RET:
            if depth != 1:
                raise StackError(f"{fn.name}: depth {depth} before RET at {off:04x}")
            continue
        if op is Op.HALT:
            if depth != 0:
                raise StackError(f"{fn.name}: depth {depth} before HALT at {off:04x}")
            continue
        after = depth + effect
        if op is Op.JMP:
            work.append((nxt + args[0], after))
            continue
        if op is Op.JMP_IF_FALSE:
            work.append((nxt + args[0], after))
        if nxt >= len(fn.code):
            raise StackError(f"{fn.name}: control runs off the end after {off:04x}")
        work.append((nxt, after))
    return depth_at


def verify_image(img: ProgramImage) -> None:
    for fn in img.functions:
        verify_chunk(fn)
        last = decode(fn.code)[-1][1]
        if last not in (Op.RET, Op.HALT):
            raise StackError(f"{fn.name}: chunk ends in {last.name}")
