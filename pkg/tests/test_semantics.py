import pytest

from phoenix import ast as A
from phoenix.core import CompileFailed
from phoenix.parser import parse_source
from phoenix.semantics import Storage, SymbolKind, analyze, build_symbols

from samples import AVERAGE, AVERAGE_WITH_UNUSED, CLASSES, FACTORIAL, entry
from support import codes, compile_diagnostics


def analyzed(text: str, eliminate: bool = True):
    return analyze(parse_source(text), eliminate=eliminate)


def test_average_symbols():
    tp = analyzed(AVERAGE)
    fn = tp.entry
    assert fn.name == "معدل"
    names = {s.name: s for s in fn.scope.symbols.values()}
    assert set(names) == {"علامة", "مجموع", "عداد"}
    assert all(s.data_type is A.TypeName.NUM for s in names.values())
    assert [names[n].slot for n in ("علامة", "مجموع", "عداد")] == [0, 1, 2]
    assert fn.slot_count == 3
    assert tp.warnings == []


def test_concat_marks_number_conversion():
    tp = analyzed(AVERAGE)
    show = tp.entry.body.stmts[-1]
    assert show.expr.ty is A.TypeName.STR
    assert show.expr.rhs.to_str and not show.expr.lhs.to_str


def test_duplicate_in_scope():
    assert codes(entry("رقم س = 1 ;\nرقم س = 2 ;")) == ["E-SEM-004"]


def test_shadowing_in_inner_block_allowed():
    assert codes(entry("رقم س = 1 ;\n{ كلمة س = \"أ\" ; أعرض : س ; }\nأعرض : س ;")) == []


def test_global_shadowed_by_local():
    text = entry("رقم س = 2 ;\nأعرض : س ;", before="كلمة س = \"عام\" ;")
    assert codes(text) == []


def test_unknown_class():
    assert codes(entry("سيارة س ;")) == ["E-SEM-005"]


def test_use_before_declare():
    d = compile_diagnostics(entry("مجموع = 5 ;\nرقم مجموع = 0 ;"))
    assert [x.code for x in d] == ["E-SEM-001"]
    assert d[0].span.line == 4


def test_self_reference_in_initializer():
    assert codes(entry("رقم س = س + 1 ;")) == ["E-SEM-001"]


def test_variable_from_closed_block():
    assert codes(entry("{ رقم س = 1 ; }\nأعرض : س ;")) == ["E-SEM-001"]


def test_recursion_and_forward_calls_allowed():
    assert codes(FACTORIAL) == []
    text = """
وظيفة بداية (-) : البداية { أعرض : إستدعاء زوجي(4) ; } نهاية الوظيفة
وظيفة زوجي (رقم ن) : رقم { إذا : ن == 0 { عودة : 1 ; } عودة : إستدعاء فردي(ن - 1) ; } نهاية الوظيفة
وظيفة فردي (رقم ن) : رقم { إذا : ن == 0 { عودة : 0 ; } عودة : إستدعاء زوجي(ن - 1) ; } نهاية الوظيفة
"""
    assert codes(text) == []


TWO_PARAMS = "وظيفة جمع (رقم أ ، رقم ب) : رقم { عودة : أ + ب ; } نهاية الوظيفة\n"


def test_arity():
    assert codes(entry("أعرض : إستدعاء جمع(1) ;", before=TWO_PARAMS)) == ["E-SEM-002"]


def test_argument_type():
    assert codes(entry('أعرض : إستدعاء جمع(1 ، "س") ;', before=TWO_PARAMS)) == ["E-SEM-006"]


def test_unknown_function():
    assert codes(entry("إستدعاء : مجهول (-) ;")) == ["E-SEM-007"]


def test_entry_cannot_be_called():
    assert codes(entry("إستدعاء : بداية (-) ;")) == ["E-SEM-007"]


PRIVATE_CLASS = "صنف ص { خاص رقم سر = 1 ; عام رقم علن = 2 ; }\n"


def test_private_member_outside_class():
    assert codes(entry("ص ك ;\nأعرض : ك.سر ;", before=PRIVATE_CLASS)) == ["E-SEM-008"]
    assert codes(entry("ص ك ;\nأعرض : ك.علن ;", before=PRIVATE_CLASS)) == []


def test_unknown_member():
    assert codes(entry("ص ك ;\nأعرض : ك.مجهول ;", before=PRIVATE_CLASS)) == ["E-SEM-020"]


def test_type_mismatch():
    assert codes(entry('رقم س = "نص" ;')) == ["E-SEM-003"]
    assert codes(entry('أعرض : 1 + "س" ;')) == ["E-SEM-003"]
    assert codes(entry('إذا : 1 == "س" { }')) == ["E-SEM-003"]
    assert codes(entry('قائمة-رقم ق[2] ;\nأعرض : ق["س"] ;')) == ["E-SEM-003"]


def test_number_to_string_assignment_is_implicit():
    tp = analyzed(entry("كلمة س = 5 ;\nس = 6 ;\nأعرض : س ;"))
    decl, assign, _ = tp.entry.body.stmts
    assert decl.init.to_str and assign.value.to_str


def test_return_type():
    assert codes("وظيفة د (-) : رقم { عودة : \"س\" ; } نهاية الوظيفة\n" + entry("")) == ["E-SEM-009"]
    assert codes(entry("عودة : 1 ;")) == ["E-SEM-009"]


def test_string_ordering():
    assert codes(entry('إذا : "أ" < "ب" { }')) == ["E-SEM-010"]
    assert codes(entry('إذا : "أ" == "ب" { }')) == []


def test_entry_count():
    assert codes("وظيفة د (-) : رقم { عودة : 1 ; } نهاية الوظيفة") == ["E-SEM-011"]
    second = "وظيفة ثانية (-) : البداية { } نهاية الوظيفة\n"
    assert codes(entry("") + second) == ["E-SEM-011"]


def test_field_initializers_are_literals():
    assert codes(entry("", before="صنف ص { عام رقم س = 1 + 1 ; }")) == ["E-SEM-012"]


def test_composition_cycle():
    text = entry("", before="صنف أ { عام ب ف ; }\nصنف ب { عام أ ف ; }")
    assert codes(text) == ["E-SEM-013"]


def test_array_initializer_length():
    assert codes(entry("قائمة-رقم ق[3] = { 1 ، 2 } ;")) == ["E-SEM-014"]


def test_array_size():
    assert codes(entry("قائمة-رقم ق[0] ;")) == ["E-SEM-015"]
    assert codes(entry("قائمة-رقم ق[1.5] ;")) == ["E-SEM-015"]


def test_method_cannot_be_entry():
    text = "صنف ص { عام وظيفة م (-) : البداية { } نهاية الوظيفة }\n" + entry("")
    assert codes(text) == ["E-SEM-016"]


def test_entry_parameters():
    assert codes("وظيفة بداية (رقم س) : البداية { } نهاية الوظيفة") == ["E-SEM-017"]


def test_global_initializer_calls():
    text = entry("", before="رقم ع = إستدعاء د(-) ;\nوظيفة د (-) : رقم { عودة : 1 ; } نهاية الوظيفة")
    assert codes(text) == ["E-SEM-018"]


def test_missing_return_path():
    text = "وظيفة د (رقم س) : رقم { إذا : س > 0 { عودة : 1 ; } } نهاية الوظيفة\n" + entry("")
    assert codes(text) == ["E-SEM-019"]
    ok = "وظيفة د (رقم س) : رقم { إذا : س > 0 { عودة : 1 ; } أما عدا ذلك { عودة : 2 ; } } نهاية الوظيفة\n"
    assert codes(ok + entry("")) == []


def test_classes_sample_resolves():
    tp = analyzed(CLASSES)
    point = next(c for c in tp.classes if c.name == "نقطة")
    assert [f.name for f in point.fields] == ["س", "ص"]
    assert [f.slot for f in point.fields] == [0, 1]
    move = next(f for f in tp.functions if f.name == "حرك")
    assert move.params[0].symbol.slot == 1  # slot 0 holds the object
    calls = [n for n in A.walk(move.body) if isinstance(n, A.CallExpr)]
    assert calls and all(c.implicit_self for c in calls)


def test_errors_from_one_pass_are_all_reported():
    text = entry("رقم س = 1 ;\nرقم س = 2 ;\nكلمة ص = 1 ;\nكلمة ص = 3 ;")
    assert codes(text) == ["E-SEM-004", "E-SEM-004"]


def test_every_name_resolved_and_typed():
    tp = analyzed(CLASSES)
    for item in tp.program.items:
        callees = {id(n.callee) for n in A.walk(item) if isinstance(n, A.CallExpr)}
        for n in A.walk(item):
            if isinstance(n, A.CallExpr):
                assert n.function is not None
            elif isinstance(n, A.VarRef) and id(n) not in callees:
                assert n.symbol is not None
            if id(n) not in callees and isinstance(
                    n, (A.NumLit, A.StrLit, A.VarRef, A.FieldRef, A.IndexRef, A.Unary, A.Binary, A.CallExpr)):
                assert n.ty is not None


def test_symbol_table_order_and_kinds():
    table = build_symbols(parse_source(CLASSES))
    assert list(table.global_scope.symbols) == ["نقطة", "خط", "رئيسي"]
    assert table.global_scope.symbols["نقطة"].kind is SymbolKind.CLASS
    assert table.globals == []


# ---- unused declarations -----------------------------------------------------

def test_unused_variable_removed_with_warning():
    tp = analyzed(AVERAGE_WITH_UNUSED)
    assert [w.code for w in tp.warnings] == ["W-SEM-001"]
    assert tp.entry.slot_count == 3
    assert all(getattr(s, "name", None) != "زائد" for s in tp.entry.body.stmts)


def test_elimination_keeps_original_tree():
    program = parse_source(AVERAGE_WITH_UNUSED)
    analyze(program)
    assert any(getattr(s, "name", None) == "زائد" for s in program.items[0].body.stmts)


def test_no_removal_without_flag():
    tp = analyzed(AVERAGE_WITH_UNUSED, eliminate=False)
    assert tp.warnings == [] and tp.entry.slot_count == 4


def test_write_only_variable_removed():
    tp = analyzed(entry("رقم س = 1 ;\nس = 2 ;\nأعرض : 3 ;"))
    assert [w.code for w in tp.warnings] == ["W-SEM-001"]
    assert [type(s).__name__ for s in tp.entry.body.stmts] == ["Show"]
    kept = analyzed(entry("رقم س = 1 ;\nس = س + 1 ;\nأعرض : 3 ;"))
    assert kept.warnings == []  # a read on the right-hand side counts as a use


def test_chain_of_dead_variables():
    tp = analyzed(entry("رقم أ = 1 ;\nرقم ب = أ ;\nأعرض : 0 ;"))
    assert len(tp.warnings) == 2


def test_effectful_initializer_kept():
    text = entry("رقم س = 1 ÷ 0 ;\nأعرض : 0 ;")
    assert analyzed(text).warnings == []


def test_input_target_is_kept():
    text = entry('رقم س = 0 ;\nأدخل : س ، "س" ;')
    assert analyzed(text).warnings == []


def test_unused_global_removed():
    tp = analyzed(entry("أعرض : 1 ;", before="رقم ع = 3 ;"))
    assert [w.code for w in tp.warnings] == ["W-SEM-001"]
    assert tp.globals == []


def test_global_slots():
    tp = analyzed(entry("أعرض : ع & ك ;", before="رقم ع = 3 ;\nكلمة ك = \"س\" ;"))
    assert [(g.name, g.slot, g.storage) for g in tp.globals] == [("ع", 0, Storage.GLOBAL), ("ك", 1, Storage.GLOBAL)]


def test_analyze_raises_collected_failure():
    with pytest.raises(CompileFailed):
        analyzed(entry("أعرض : مجهول ;"))
