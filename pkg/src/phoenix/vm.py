"""Stack virtual machine for linked program images."""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Union

from .codegen import ARR_FROM_STACK, ARR_STR, INPUT_NUM, OPERAND_SIZE, Kind, Op, ProgramImage, decode

DEFAULT_MAX_STEPS = 50_000_000
DEFAULT_MAX_DEPTH = 10_000
STEPS_ENV = "PHOENIX_MAX_STEPS"

RUNTIME_LABEL = "خطأ وقت التشغيل"  # "runtime error"
PROMPT_PREFIX = "? "

_ARABIC_DIGITS = str.maketrans("٠١٢٣٤٥٦٧٨٩", "0123456789")
_NUMBER_INPUT = re.compile(r"[+-]?[0-9]+(\.[0-9]+)?")


class RuntimeFault(Exception):
    """A runtime error carrying its R-code."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message

    def render(self) -> str:
        return f"{RUNTIME_LABEL} {self.code}: {self.message}"


class Obj:
    """A class instance; fields are stored by slot."""

    __slots__ = ("cls", "fields")

    def __init__(self, cls: int, fields: list):
        self.cls = cls
        self.fields = fields

    def __repr__(self) -> str:
        return f"Obj({self.cls}, {self.fields!r})"


# Runtime values: float (NUM), str (STR), list (arrays, shared by reference), Obj.
Value = Union[float, str, list, Obj]


def default_steps() -> int:
    raw = os.environ.get(STEPS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return DEFAULT_MAX_STEPS


# ---------------------------------------------------------------------------
# value semantics shared with the tree walker


def num_to_str(n: float) -> str:
    """Integral values print without a fractional part; others use the shortest round-trip form."""
    if math.isnan(n):
        return "nan"
    if math.isinf(n):
        return "inf" if n > 0 else "-inf"
    if n == int(n) and abs(n) < 2**53:
        return str(int(n))
    return repr(n)


def _checked(r: float) -> float:
    if r != r:
        raise RuntimeFault("R-008", "arithmetic result is undefined")
    return r


def exec_arithmetic(op: str, a: float, b: float) -> float:
    if op == "+":
        return _checked(a + b)
    if op == "-":
        return _checked(a - b)
    if op == "×":
        return _checked(a * b)
    if op == "÷":
        if b == 0:
            raise RuntimeFault("R-001", "division by zero")
        return _checked(a / b)
    if op == "%":
        if b == 0:
            raise RuntimeFault("R-002", "modulo by zero")
        return _checked(math.fmod(a, b))
    raise ValueError(f"unknown arithmetic operator {op!r}")


def exec_concat(a: str, b: str) -> str:
    return a + b


def exec_compare(op: str, a, b) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    return a >= b


def check_index(arr: list, idx: float) -> int:
    if math.isnan(idx) or math.isinf(idx) or idx != int(idx):
        raise RuntimeFault("R-003", f"array index {num_to_str(idx)} is not an integer")
    i = int(idx)
    if not 0 <= i < len(arr):
        raise RuntimeFault("R-003", f"array index {i} out of bounds for length {len(arr)}")
    return i


def parse_number(line: str) -> float:
    text = line.strip().translate(_ARABIC_DIGITS)
    if not _NUMBER_INPUT.fullmatch(text):
        raise RuntimeFault("R-004", f"input {line.strip()!r} is not a number")
    return float(text)


class InputStream:
    """Line source for input statements; accepts a text stream or any iterable of lines."""

    def __init__(self, source: Union[IO[str], Iterable[str], None]):
        self._it: Iterator[str] = iter(source if source is not None else ())

    def read_line(self) -> Optional[str]:
        try:
            line = next(self._it)
        except StopIteration:
            return None
        return line.rstrip("\n").rstrip("\r")


def exec_input(kind: int, inp: InputStream) -> Value:
    line = inp.read_line()
    if line is None:
        raise RuntimeFault("R-007", "end of input")
    if kind == INPUT_NUM:
        return parse_number(line)
    return line


@dataclass
class Transcript:
    """Everything a run wrote: shown lines and prompts, in order."""

    events: list[tuple[str, str]] = field(default_factory=list)
    sink: Optional[IO[str]] = None

    def show(self, text: str) -> None:
        self.events.append(("show", text))
        if self.sink is not None:
            self.sink.write(text + "\n")

    def prompt(self, text: str) -> None:
        self.events.append(("prompt", text))
        if self.sink is not None:
            self.sink.write(PROMPT_PREFIX + text + "\n")
            self.sink.flush()

    @property
    def shown(self) -> list[str]:
        return [t for k, t in self.events if k == "show"]

    @property
    def lines(self) -> list[str]:
        return [t if k == "show" else PROMPT_PREFIX + t for k, t in self.events]


@dataclass
class RunResult:
    transcript: Transcript
    fault: Optional[RuntimeFault] = None
    steps: int = 0

    @property
    def ok(self) -> bool:
        return self.fault is None

    @property
    def output(self) -> list[str]:
        return self.transcript.shown

    @property
    def exit_code(self) -> int:
        return 0 if self.fault is None else 2


# ---------------------------------------------------------------------------
# machine


class _Chunk:
    __slots__ = ("name", "params", "slots", "ops", "args")

    def __init__(self, name: str, params: int, slots: int, ops: list, args: list):
        self.name = name
        self.params = params
        self.slots = slots
        self.ops = ops
        self.args = args


def _predecode(fn, constants) -> _Chunk:
    """Turn a byte chunk into parallel opcode/operand lists with jump targets as instruction indexes."""
    instrs = decode(fn.code)
    at = {off: i for i, (off, _op, _a) in enumerate(instrs)}
    at[len(fn.code)] = len(instrs)
    ops, args = [], []
    for off, op, a in instrs:
        if op in (Op.JMP, Op.JMP_IF_FALSE):
            a = at[off + 1 + OPERAND_SIZE[op] + a[0]]
        elif op in (Op.PUSH_NUM, Op.PUSH_STR):
            a = constants[a[0]]
        elif len(a) == 1:
            a = a[0]
        ops.append(int(op))
        args.append(a)
    return _Chunk(fn.name, fn.param_count, fn.local_slot_count, ops, args)


class Machine:
    def __init__(self, img: ProgramImage, *, max_steps: Optional[int] = None,
                 max_depth: int = DEFAULT_MAX_DEPTH, trace: Optional[IO[str]] = None):
        self.img = img
        self.max_steps = default_steps() if max_steps is None else max_steps
        self.max_depth = max_depth
        self.trace = trace
        self.chunks = [_predecode(fn, img.constants) for fn in img.functions]
        self.globals: list[Value] = [_zero(g.kind) for g in img.globals]
        self.steps = 0

    def new_object(self, index: int) -> Obj:
        fields: list[Value] = []
        for f in self.img.classes[index].fields:
            if f.kind in (Kind.NUM, Kind.STR):
                fields.append(self.img.constants[f.const])
            elif f.kind is Kind.OBJ:
                fields.append(self.new_object(f.class_index))
            elif f.init is not None:
                fields.append([self.img.constants[c] for c in f.init])
            else:
                fields.append([0.0 if f.kind is Kind.NUMLIST else ""] * f.length)
        return Obj(index, fields)

    def run(self, inp: InputStream, out: Transcript) -> int:
        """Execute from the entry function; returns the step count or raises RuntimeFault."""
        steps = 0
        max_steps = self.max_steps
        stack: list = []
        push = stack.append
        pop = stack.pop
        g = self.globals
        chunks = self.chunks
        chunk = chunks[self.img.entry]
        ops, args = chunk.ops, chunk.args
        slots: list = [0.0] * chunk.slots
        frames: list = []
        ip = 0
        trace = self.trace
        O = Op
        try:
            while True:
                op = ops[ip]
                a = args[ip]
                steps += 1
                if steps > max_steps:
                    raise RuntimeFault("R-006", f"step limit {max_steps} exceeded")
                if trace is not None:
                    trace.write(f"{chunk.name}:{ip} {O(op).name} {a if a != () else ''} depth={len(stack)}\n")
                ip += 1
                if op == 0x03:  # LOAD
                    push(slots[a])
                elif op == 0x01 or op == 0x02:  # PUSH_NUM / PUSH_STR
                    push(a)
                elif op == 0x04:  # STORE
                    slots[a] = pop()
                elif op == 0x19:  # JMP_IF_FALSE
                    if not pop():
                        ip = a
                elif op == 0x18:  # JMP
                    ip = a
                elif op == 0x0A:
                    b = pop()
                    r = pop() + b
                    if r != r:
                        raise RuntimeFault("R-008", "arithmetic result is undefined")
                    push(r)
                elif op == 0x0B:
                    b = pop()
                    r = pop() - b
                    if r != r:
                        raise RuntimeFault("R-008", "arithmetic result is undefined")
                    push(r)
                elif op == 0x14:
                    b = pop()
                    push(pop() < b)
                elif op == 0x17:
                    b = pop()
                    push(pop() >= b)
                elif op == 0x16:
                    b = pop()
                    push(pop() <= b)
                elif op == 0x15:
                    b = pop()
                    push(pop() > b)
                elif op == 0x12:
                    b = pop()
                    push(pop() == b)
                elif op == 0x13:
                    b = pop()
                    push(pop() != b)
                elif op == 0x0C or op == 0x0D or op == 0x0E:
                    b = pop()
                    push(exec_arithmetic("×" if op == 0x0C else "÷" if op == 0x0D else "%", pop(), b))
                elif op == 0x0F:
                    push(-pop())
                elif op == 0x10:
                    b = pop()
                    push(pop() + b)
                elif op == 0x11:
                    push(num_to_str(pop()))
                elif op == 0x05:
                    push(g[a])
                elif op == 0x06:
                    g[a] = pop()
                elif op == 0x08:  # LOAD_IDX
                    idx = pop()
                    arr = pop()
                    push(arr[check_index(arr, idx)])
                elif op == 0x09:  # STORE_IDX
                    val = pop()
                    idx = pop()
                    arr = pop()
                    arr[check_index(arr, idx)] = val
                elif op == 0x1F:
                    push(pop().fields[a])
                elif op == 0x20:
                    val = pop()
                    pop().fields[a] = val
                elif op == 0x1A:  # CALL
                    fidx, argc = a
                    if len(frames) + 1 >= self.max_depth:
                        raise RuntimeFault("R-005", f"call depth limit {self.max_depth} exceeded")
                    frames.append((chunk, ip, slots))
                    chunk = chunks[fidx]
                    ops, args = chunk.ops, chunk.args
                    if argc:
                        slots = stack[-argc:]
                        del stack[-argc:]
                    else:
                        slots = []
                    if chunk.slots > argc:
                        slots.extend([0.0] * (chunk.slots - argc))
                    ip = 0
                elif op == 0x1B:  # RET
                    chunk, ip, slots = frames.pop()
                    ops, args = chunk.ops, chunk.args
                elif op == 0x1C:
                    out.show(pop())
                elif op == 0x1D:
                    out.prompt(pop())
                    push(exec_input(a, inp))
                elif op == 0x07:  # NEW_ARR
                    flags, n = a
                    if flags & ARR_FROM_STACK:
                        if n:
                            items = stack[-n:]
                            del stack[-n:]
                        else:
                            items = []
                        push(items)
                    else:
                        push([("" if flags & ARR_STR else 0.0)] * n)
                elif op == 0x1E:
                    push(self.new_object(a))
                elif op == 0x22:
                    pop()
                elif op == 0x21:  # HALT
                    return steps
                else:
                    raise RuntimeFault("R-000", f"bad opcode 0x{op:02x}")
        except RuntimeFault:
            self.steps = steps
            raise


def _zero(kind: Kind) -> Value:
    if kind is Kind.NUM:
        return 0.0
    if kind is Kind.STR:
        return ""
    if kind is Kind.OBJ:
        return Obj(-1, [])
    return []


def run(img: Union[ProgramImage, bytes], input: Union[IO[str], Iterable[str], None] = None,
        output: Optional[IO[str]] = None, *, max_steps: Optional[int] = None,
        max_depth: int = DEFAULT_MAX_DEPTH, trace: Optional[IO[str]] = None) -> RunResult:
    """Run an image to completion.

    Shown lines and prompts go to ``output`` as they happen (if given) and
    are always recorded in the result's transcript.  Runtime faults are
    returned, not raised.
    """
    if isinstance(img, (bytes, bytearray)):
        img = ProgramImage.from_bytes(bytes(img))
    transcript = Transcript(sink=output)
    machine = Machine(img, max_steps=max_steps, max_depth=max_depth, trace=trace)
    try:
        steps = machine.run(InputStream(input), transcript)
    except RuntimeFault as fault:
        return RunResult(transcript, fault, machine.steps)
    return RunResult(transcript, None, steps)
