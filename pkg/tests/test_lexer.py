import random

import pytest
from hypothesis import given, settings, strategies as st

from phoenix.core import CompileError, SourceFile
from phoenix.lexer import (
    ACCEPTING, KEYWORDS, TRANSITIONS, CharClass, State, TokenKind as T, dump_tokens, tokenize,
)
from phoenix.preprocessor import preprocess

from generators import lexer_input
from reference_lexer import ReferenceReject, reference_tokenize
from samples import AVERAGE


def lex(text: str):
    return tokenize(preprocess(SourceFile("t", text)))


def kinds(text: str):
    return [t.kind for t in lex(text)]


def lex_error(text: str) -> str:
    with pytest.raises(CompileError) as info:
        lex(text)
    return info.value.diagnostic.code


def test_identifier():
    tok = lex("علامة")[0]
    assert (tok.kind, tok.lexeme) == (T.IDENT, "علامة")


def test_single_letter_identifier():
    assert kinds("س") == [T.IDENT, T.EOF]


def test_hyphenated_keyword():
    toks = lex("قائمة-رقم")
    assert [t.kind for t in toks] == [T.KW_NUMLIST, T.EOF]
    assert toks[0].span.end == len("قائمة-رقم")


def test_three_word_keyword():
    toks = lex("أما عدا ذلك")
    assert [t.kind for t in toks] == [T.KW_ELSE, T.EOF]
    assert toks[0].lexeme == "أما عدا ذلك"


def test_compound_needs_whole_words():
    assert kinds("قائمة-رقمي") == [T.IDENT, T.MINUS, T.IDENT, T.EOF]
    assert kinds("أما عدا") == [T.IDENT, T.IDENT, T.EOF]
    assert kinds("نهاية\nالوظيفة") == [T.IDENT, T.IDENT, T.EOF]


def test_end_marker_with_extra_spaces():
    assert kinds("نهاية   الوظيفة") == [T.KW_ENDFUNC, T.EOF]


def test_loop_keyword_with_diacritics():
    toks = lex("كُرّر")
    assert toks[0].kind is T.KW_WHILE and toks[0].lexeme == "كرر"


def test_misspelled_loop_keyword_is_identifier():
    assert kinds("كزر") == [T.IDENT, T.EOF]


def test_numbers():
    assert lex("3.14")[0].num_value == 3.14
    assert lex("0")[0].num_value == 0
    assert lex("٤٢")[0].num_value == 42


def test_dangling_point():
    assert lex_error("5.") == "E-LEX-002"
    assert lex_error("5.س") == "E-LEX-002"


def test_sign_is_not_part_of_number():
    assert kinds("-5") == [T.MINUS, T.NUM, T.EOF]


def test_strings():
    tok = lex('"أدخل علامتك"')[0]
    assert tok.kind is T.STRING and tok.str_value == "أدخل علامتك"
    assert lex('"المعدل هو "')[0].str_value == "المعدل هو "


def test_unterminated_string():
    assert lex_error('"abc\nس') == "E-LEX-003"
    assert lex_error('"abc') == "E-LEX-003"


def test_latin_letter_rejected():
    assert lex_error("x") == "E-LEX-001"


def test_lone_bang_and_bar_rejected():
    assert lex_error("!") == "E-LEX-001"
    assert lex_error("|") == "E-LEX-001"


def test_maximal_munch_operators():
    assert kinds("&&") == [T.AND, T.EOF]
    assert kinds("& &") == [T.CONCAT, T.CONCAT, T.EOF]
    assert kinds("== = <= < >= > != ||") == [
        T.EQ, T.ASSIGN, T.LE, T.LT, T.GE, T.GT, T.NEQ, T.OR, T.EOF]


def test_ascii_operator_aliases():
    assert kinds("× * ÷ /") == [T.MUL, T.MUL, T.DIV, T.DIV, T.EOF]


def test_parenthesized_division():
    assert kinds("(مجموع÷عداد)") == [T.LPAREN, T.IDENT, T.DIV, T.IDENT, T.RPAREN, T.EOF]


def test_declaration_tokens():
    toks = lex("رقم علامة = 0 ;")
    assert [t.kind for t in toks] == [T.KW_NUM, T.IDENT, T.ASSIGN, T.NUM, T.SEMI, T.EOF]


def test_empty_input():
    assert kinds("") == [T.EOF]


def test_average_program_tokens():
    toks = lex(AVERAGE)
    assert 55 <= len(toks) <= 65
    assert toks[-1].kind is T.EOF
    assert sum(t.kind is T.KW_WHILE for t in toks) == 1
    assert sum(t.kind is T.KW_SHOW for t in toks) == 1
    assert sum(t.kind is T.KW_ENTRY for t in toks) == 1


def test_keyword_table():
    assert len(KEYWORDS) == 17
    assert KEYWORDS["البداية"] is T.KW_ENTRY
    assert "كزر" not in KEYWORDS


def test_transition_table_is_total():
    for state in State:
        assert set(TRANSITIONS[state]) == set(CharClass)
        for nxt in TRANSITIONS[state].values():
            assert isinstance(nxt, State)
    assert all(nxt is State.REJECT for nxt in TRANSITIONS[State.REJECT].values())
    assert State.REJECT not in ACCEPTING and State.START not in ACCEPTING


def test_dump_format():
    assert dump_tokens(lex("رقم س")) == "KW_NUM\tرقم\t1:1\nIDENT\tس\t1:5\nEOF\t\t1:6\n"


def test_spans_report_line_and_column():
    toks = lex("رقم\n  س")
    assert (toks[1].span.line, toks[1].span.col) == (2, 3)


def _compare(text: str) -> None:
    pre = preprocess(SourceFile("t", text))
    try:
        expected = reference_tokenize(pre.codepoints)
        expected_err = None
    except ReferenceReject as exc:
        expected, expected_err = None, (exc.code, exc.offset)
    try:
        got = [(t.kind.name, t.lexeme, t.span.start, t.span.end) for t in tokenize(pre)]
        got_err = None
    except CompileError as exc:
        got, got_err = None, (exc.diagnostic.code, exc.diagnostic.span.start)
    assert got == expected and got_err == expected_err, repr(text)


def test_agrees_with_reference_on_generated_strings():
    for seed in range(300):
        _compare(lexer_input(random.Random(seed)))


@settings(max_examples=200)
@given(st.lists(st.sampled_from(list("سصرقم0159.\"&|=<>!-+×÷*/%(){}[],;: \n\t\u064e\u0651") +
                                ["أما عدا ذلك", "قائمة-رقم", "نهاية الوظيفة", "كرر"]), max_size=25).map("".join))
def test_agrees_with_reference_property(text):
    _compare(text)


@settings(max_examples=200)
@given(st.integers(0, 10_000))
def test_lexemes_and_gaps_rebuild_preprocessed_text(seed):
    text = lexer_input(random.Random(seed))
    pre = preprocess(SourceFile("t", text))
    try:
        toks = tokenize(pre)
    except CompileError:
        return
    pos = 0
    rebuilt = []
    for t in toks:
        gap = pre.codepoints[pos:t.span.start]
        assert gap.strip(" \t\r\n\f\v\u200b\u200e\u200f") == ""
        rebuilt.append(gap + pre.codepoints[t.span.start:t.span.end])
        assert t.span.start >= pos
        pos = t.span.end
    assert "".join(rebuilt) + pre.codepoints[pos:] == pre.codepoints


def test_deterministic():
    assert lex(AVERAGE) == lex(AVERAGE)
