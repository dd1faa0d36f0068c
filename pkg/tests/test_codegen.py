import random
import struct

import pytest

from phoenix.codegen import (
    ARR_FROM_STACK, Assembler, FunctionChunk, Label, MAGIC, Op, ProgramImage, StackError,
    count_opcodes, decode, disassemble, gen_program, link, verify_chunk, verify_image,
)
from phoenix.compiler import compile_source
from phoenix.core import CompileError
from phoenix.vm import run

from generators import typed_program
from samples import AVERAGE, BOUNDS, CLASSES, DEPTH, EMPTY_ENTRY, FACTORIAL, entry

CORPUS = [AVERAGE, BOUNDS, CLASSES, DEPTH, EMPTY_ENTRY, FACTORIAL]


def image(text: str) -> ProgramImage:
    return compile_source(text).image


def ops(fn: FunctionChunk) -> list[Op]:
    return [op for _off, op, _a in decode(fn.code)]


def entry_ops(text: str) -> list[Op]:
    img = image(text)
    return ops(img.functions[img.entry])


def lnk_code(exc: pytest.ExceptionInfo) -> str:
    return exc.value.diagnostic.code


def test_average_shape():
    img = image(AVERAGE)
    assert len(img.functions) == 1 and img.entry == 0
    fn = img.functions[0]
    assert (fn.param_count, fn.local_slot_count) == (0, 3)
    seq = ops(fn)
    assert seq[-1] is Op.HALT
    counts = count_opcodes(img)
    assert counts[Op.DIV] == 1 and counts[Op.CONCAT] == 1
    assert counts[Op.INPUT] == 1 and counts[Op.JMP] == 1 and counts[Op.JMP_IF_FALSE] == 1
    # the loop: test, exit jump, body, back edge
    assert seq[6:10] == [Op.LOAD, Op.PUSH_NUM, Op.CMP_LT, Op.JMP_IF_FALSE]


def test_empty_entry_is_single_halt():
    assert disassemble(image(EMPTY_ENTRY)) == "function 0 بداية params=0 locals=0 entry\n0000: HALT\n"


def test_expression_is_postfix():
    seq = entry_ops(entry("رقم س = 2 ;\nأعرض : 1 + س × 3 ;"))
    assert seq == [Op.PUSH_NUM, Op.STORE, Op.PUSH_NUM, Op.LOAD, Op.PUSH_NUM, Op.MUL, Op.ADD,
                   Op.NUM_TO_STR, Op.SHOW, Op.HALT]


def test_unary_minus():
    assert Op.NEG in entry_ops(entry("رقم س = 2 ;\nأعرض : -س ;"))
    assert Op.NEG not in entry_ops(entry("رقم س = 2 ;\nأعرض : +س ;"))


def test_short_circuit_and_or():
    text = entry('رقم س = 2 ;\nإذا : س > 1 && س < 4 || س == 9 { أعرض : "ن" ; } أما عدا ذلك { أعرض : "ل" ; }')
    seq = entry_ops(text)
    assert seq.count(Op.JMP_IF_FALSE) == 3
    for value, expect in ((2, "ن"), (9, "ن"), (5, "ل"), (1, "ل")):
        result = run(image(text.replace("رقم س = 2", f"رقم س = {value}")))
        assert result.output == [expect]


def test_call_statement_discards_result():
    fn = "وظيفة د (-) : رقم { عودة : 1 ; } نهاية الوظيفة\n"
    seq = entry_ops(entry("إستدعاء : د(-) ;", before=fn))
    assert seq == [Op.CALL, Op.POP, Op.HALT]


def test_method_call_passes_object_first():
    img = image(CLASSES)
    names = [f.name for f in img.functions]
    move = img.functions[names.index("حرك")]
    assert move.param_count == 2
    calls = [a for _o, op, a in decode(img.functions[img.entry].code) if op is Op.CALL]
    assert (names.index("حرك"), 2) in calls


def test_array_initializer_from_stack():
    img = image(BOUNDS)
    arr = [a for _o, op, a in decode(img.functions[0].code) if op is Op.NEW_ARR]
    assert arr == [(ARR_FROM_STACK, 5)]


def test_globals_initialised_before_entry_body():
    img = image(entry("أعرض : ع ;", before="رقم ع = 7 ;"))
    assert [g.name for g in img.globals] == ["ع"]
    assert entry_ops(entry("أعرض : ع ;", before="رقم ع = 7 ;"))[:2] == [Op.PUSH_NUM, Op.STORE_GLOBAL]


def test_entry_return_halts():
    seq = entry_ops(entry('أعرض : "أ" ;\nعودة ;\nأعرض : "ب" ;'))
    assert seq == [Op.PUSH_STR, Op.SHOW, Op.HALT]


def test_code_after_return_dropped():
    fn = "وظيفة د (-) : رقم { عودة : 1 ; أعرض : 2 ; } نهاية الوظيفة\n"
    img = image(entry("أعرض : إستدعاء د(-) ;", before=fn))
    assert ops(img.functions[0]) == [Op.PUSH_NUM, Op.RET]


def test_constant_pool_is_deduplicated():
    img = image(entry('أعرض : 1 + 1 + 1 ;\nأعرض : "أ" & "أ" ;\nأعرض : 1 ;'))
    assert sorted(map(str, img.constants)) == ["1.0", "أ"]
    img = image(AVERAGE)
    assert len(img.constants) == len(set(map(repr, img.constants)))


def test_deterministic_bytes():
    for text in CORPUS:
        assert image(text).to_bytes() == image(text).to_bytes()


@pytest.mark.parametrize("text", CORPUS)
def test_image_round_trip(text):
    img = image(text)
    data = img.to_bytes()
    assert data[:4] == MAGIC and struct.unpack_from("<H", data, 4) == (1,)
    again = ProgramImage.from_bytes(data)
    assert again == img
    assert again.to_bytes() == data


def test_generated_images_round_trip_and_verify():
    rng = random.Random(11)
    for _ in range(60):
        source, _inputs = typed_program(rng)
        img = image(source)
        verify_image(img)
        assert ProgramImage.from_bytes(img.to_bytes()) == img


def test_disassembly_format():
    text = disassemble(image(AVERAGE))
    lines = text.splitlines()
    assert lines[0] == "function 0 معدل params=0 locals=3 entry"
    assert "0018: CMP_LT" in lines
    assert any(line.startswith("0019: JMP_IF_FALSE +33 (-> 003f)") for line in lines)
    assert '; "المعدل هو "' in text
    assert lines[-1] == "004c: HALT" and text.endswith("\n")
    assert disassemble(image(AVERAGE).to_bytes()) == text


# ---- linking ---------------------------------------------------------------

def _tables(text: str):
    return gen_program(compile_source(text).typed)


def test_link_rejects_missing_function():
    chunks, tables = _tables(EMPTY_ENTRY)
    a = Assembler()
    a.emit(Op.CALL, 99, 0)
    a.emit(Op.POP)
    a.emit(Op.HALT)
    chunks.append(FunctionChunk("خارجي", 0, 0, bytes(a.code)))
    with pytest.raises(CompileError) as exc:
        link(chunks, tables)
    assert lnk_code(exc) == "E-LNK-001"


def test_link_requires_entry():
    chunks, tables = _tables(EMPTY_ENTRY)
    tables = dict(tables, entry=None)
    with pytest.raises(CompileError) as exc:
        link(chunks, tables)
    assert lnk_code(exc) == "E-LNK-002"
    with pytest.raises(CompileError) as exc:
        link(chunks, dict(tables, entry=5))
    assert lnk_code(exc) == "E-LNK-002"


# ---- loading damaged images ------------------------------------------------

def _load_code(data: bytes) -> str:
    with pytest.raises(CompileError) as exc:
        ProgramImage.from_bytes(data)
    return lnk_code(exc)


def test_bad_magic():
    data = image(AVERAGE).to_bytes()
    assert _load_code(b"XHPC" + data[4:]) == "E-LNK-003"


def test_bad_version():
    data = image(AVERAGE).to_bytes()
    assert _load_code(data[:4] + struct.pack("<H", 2) + data[6:]) == "E-LNK-003"


def test_every_truncation_rejected():
    data = image(CLASSES).to_bytes()
    for n in range(len(data)):
        assert _load_code(data[:n]) == "E-LNK-003"
    assert _load_code(data + b"\0") == "E-LNK-003"


def test_bad_operands_rejected():
    img = image(EMPTY_ENTRY)
    for code in (bytes([Op.PUSH_NUM, 9, 0, Op.POP, Op.HALT]),  # missing constant
                 bytes([Op.CALL, 4, 0, 0, Op.POP, Op.HALT]),    # missing function
                 bytes([0xEE, Op.HALT]),                       # unknown opcode
                 bytes([Op.POP, Op.HALT]),                     # underflow
                 bytes([Op.PUSH_NUM])):                        # truncated operand
        img.constants = [1.0]
        img.functions[0] = FunctionChunk("بداية", 0, 0, code)
        assert _load_code(img.to_bytes()) == "E-LNK-003"


# ---- stack verifier --------------------------------------------------------

def chunk(*parts) -> FunctionChunk:
    a = Assembler()
    for p in parts:
        a.emit(*p) if isinstance(p, tuple) else a.emit(p)
    return FunctionChunk("ف", 0, 1, bytes(a.code))


def test_verifier_accepts_corpus():
    for text in CORPUS:
        img = image(text)
        verify_image(img)
        for fn in img.functions:
            depths = verify_chunk(fn)
            assert depths[0] == 0
            for off, op, _a in decode(fn.code):
                if op is Op.HALT:
                    assert depths[off] == 0
                if op is Op.RET:
                    assert depths[off] == 1


@pytest.mark.parametrize("parts", [
    [Op.ADD, Op.HALT],
    [(Op.PUSH_NUM, 0), Op.HALT],
    [Op.RET],
    [(Op.PUSH_NUM, 0), (Op.PUSH_NUM, 0), Op.RET],
    [(Op.PUSH_NUM, 0)],
    [(Op.CALL, 0, 1), Op.POP, Op.HALT],
    [(Op.JMP, 1), Op.HALT],
])
def test_verifier_rejects(parts):
    with pytest.raises(StackError):
        verify_chunk(chunk(*parts))


def test_verifier_rejects_unbalanced_join():
    a = Assembler()
    done = Label()
    a.emit(Op.PUSH_NUM, 0)
    a.emit(Op.PUSH_NUM, 0)
    a.emit(Op.CMP_EQ)
    a.jump(Op.JMP_IF_FALSE, done)
    a.emit(Op.PUSH_NUM, 0)  # only pushed on one path
    a.bind(done)
    a.emit(Op.HALT)
    with pytest.raises(StackError):
        verify_chunk(FunctionChunk("ف", 0, 0, bytes(a.code)))


def test_assembler_operand_overflow():
    with pytest.raises(CompileError) as exc:
        Assembler().emit(Op.LOAD, 70_000)
    assert exc.value.diagnostic.code == "E-GEN-002"


def test_label_backward_and_forward():
    a = Assembler()
    top, end = Label(), Label()
    a.bind(top)
    a.jump(Op.JMP, end)
    a.jump(Op.JMP, top)
    a.bind(end)
    a.emit(Op.HALT)
    assert decode(bytes(a.code)) == [(0, Op.JMP, (5,)), (5, Op.JMP, (-10,)), (10, Op.HALT, ())]


def _distinct_literals(text: str) -> int:
    from phoenix import ast as A
    from phoenix.parser import parse_source

    seen = set()
    for item in parse_source(text).items:
        for n in A.walk(item):
            if isinstance(n, A.StrLit):
                seen.add(("s", n.value))
            elif isinstance(n, A.Input):
                seen.add(("s", n.prompt))
            elif isinstance(n, A.NumLit):
                seen.add(("n", n.value))
    return len(seen)


def test_pool_never_exceeds_distinct_literals():
    rng = random.Random(5)
    sources = CORPUS + [typed_program(rng)[0] for _ in range(80)]
    for text in sources:
        assert len(image(text).constants) <= _distinct_literals(text)
