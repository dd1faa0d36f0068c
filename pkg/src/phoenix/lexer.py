"""Table-driven DFA scanner for Phoenix source.

The automaton recognises one token at a time with maximal munch.  Compound
keywords (``نهاية الوظيفة``, ``أما عدا ذلك``, ``قائمة-رقم``, ``قائمة-كلمة``)
are resolved after an identifier word is accepted, by trying to extend it
across horizontal whitespace or a hyphen.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto
from typing import Optional

from .core import CompileError, Phase, Span, error
from .preprocessor import SKIP_MARK, PreprocessedSource, is_arabic_letter


class TokenKind(Enum):
    KW_NUM = auto()
    KW_STR = auto()
    KW_NUMLIST = auto()
    KW_STRLIST = auto()
    KW_FUNC = auto()
    KW_ENDFUNC = auto()
    KW_CLASS = auto()
    KW_PUBLIC = auto()
    KW_PRIVATE = auto()
    KW_IF = auto()
    KW_ELSE = auto()
    KW_WHILE = auto()
    KW_SHOW = auto()
    KW_INPUT = auto()
    KW_CALL = auto()
    KW_RETURN = auto()
    KW_ENTRY = auto()
    NUM = auto()
    STRING = auto()
    IDENT = auto()
    PLUS = auto()
    MINUS = auto()
    MUL = auto()
    DIV = auto()
    MOD = auto()
    CONCAT = auto()
    ASSIGN = auto()
    EQ = auto()
    NEQ = auto()
    LT = auto()
    GT = auto()
    LE = auto()
    GE = auto()
    AND = auto()
    OR = auto()
    LPAREN = auto()
    RPAREN = auto()
    LBRACE = auto()
    RBRACE = auto()
    LBRACKET = auto()
    RBRACKET = auto()
    COMMA = auto()
    SEMI = auto()
    COLON = auto()
    DOT = auto()
    EOF = auto()


KEYWORDS: dict[str, TokenKind] = {
    "رقم": TokenKind.KW_NUM,
    "كلمة": TokenKind.KW_STR,
    "قائمة-رقم": TokenKind.KW_NUMLIST,
    "قائمة-كلمة": TokenKind.KW_STRLIST,
    "وظيفة": TokenKind.KW_FUNC,
    "نهاية الوظيفة": TokenKind.KW_ENDFUNC,
    "صنف": TokenKind.KW_CLASS,
    "عام": TokenKind.KW_PUBLIC,
    "خاص": TokenKind.KW_PRIVATE,
    "إذا": TokenKind.KW_IF,
    "أما عدا ذلك": TokenKind.KW_ELSE,
    "كرر": TokenKind.KW_WHILE,
    "أعرض": TokenKind.KW_SHOW,
    "أدخل": TokenKind.KW_INPUT,
    "إستدعاء": TokenKind.KW_CALL,
    "عودة": TokenKind.KW_RETURN,
    "البداية": TokenKind.KW_ENTRY,
}

KEYWORD_TEXT = {kind: text for text, kind in KEYWORDS.items()}


def _split_compound(text: str) -> tuple[str, ...]:
    # ("قائمة", "-", "رقم") / ("أما", " ", "عدا", " ", "ذلك")
    parts: list[str] = []
    word = ""
    for ch in text:
        if ch in " -":
            parts.extend([word, ch])
            word = ""
        else:
            word += ch
    parts.append(word)
    return tuple(parts)


COMPOUND_KEYWORDS = sorted(
    (_split_compound(text) for text in KEYWORDS if " " in text or "-" in text),
    key=len,
    reverse=True,
)

WHITESPACE = frozenset(" \t\r\n\f\v\u200e\u200f" + SKIP_MARK)
HSPACE = frozenset(" \t" + SKIP_MARK)


class State(Enum):
    START = auto()
    IDENT = auto()
    INT = auto()
    AFTER_DOT = auto()
    FRAC = auto()
    STRING = auto()
    STRING_END = auto()
    BANG = auto()
    BAR = auto()
    EQ1 = auto()
    LT1 = auto()
    GT1 = auto()
    AMP1 = auto()
    OP_DONE = auto()
    REJECT = auto()


class CharClass(Enum):
    LETTER = auto()
    DIGIT = auto()
    DOT = auto()
    QUOTE = auto()
    NEWLINE = auto()
    SKIP = auto()
    EQUALS = auto()
    BANG = auto()
    LESS = auto()
    GREATER = auto()
    AMP = auto()
    BAR = auto()
    SIMPLE_OP = auto()
    OTHER = auto()


SIMPLE_OPS: dict[str, TokenKind] = {
    "+": TokenKind.PLUS,
    "-": TokenKind.MINUS,
    "×": TokenKind.MUL,
    "*": TokenKind.MUL,
    "÷": TokenKind.DIV,
    "/": TokenKind.DIV,
    "%": TokenKind.MOD,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    "{": TokenKind.LBRACE,
    "}": TokenKind.RBRACE,
    "[": TokenKind.LBRACKET,
    "]": TokenKind.RBRACKET,
    ",": TokenKind.COMMA,
    ";": TokenKind.SEMI,
    ":": TokenKind.COLON,
}

_SPECIAL_CLASSES = {
    ".": CharClass.DOT,
    '"': CharClass.QUOTE,
    "\n": CharClass.NEWLINE,
    SKIP_MARK: CharClass.SKIP,
    "=": CharClass.EQUALS,
    "!": CharClass.BANG,
    "<": CharClass.LESS,
    ">": CharClass.GREATER,
    "&": CharClass.AMP,
    "|": CharClass.BAR,
}


def classify(ch: str) -> CharClass:
    cls = _SPECIAL_CLASSES.get(ch)
    if cls is not None:
        return cls
    if "0" <= ch <= "9":
        return CharClass.DIGIT
    if is_arabic_letter(ch):
        return CharClass.LETTER
    if ch in SIMPLE_OPS:
        return CharClass.SIMPLE_OP
    return CharClass.OTHER


def _build_table() -> dict[State, dict[CharClass, State]]:
    table = {s: {c: State.REJECT for c in CharClass} for s in State}
    start = table[State.START]
    start[CharClass.LETTER] = State.IDENT
    start[CharClass.DIGIT] = State.INT
    start[CharClass.QUOTE] = State.STRING
    start[CharClass.EQUALS] = State.EQ1
    start[CharClass.BANG] = State.BANG
    start[CharClass.LESS] = State.LT1
    start[CharClass.GREATER] = State.GT1
    start[CharClass.AMP] = State.AMP1
    start[CharClass.BAR] = State.BAR
    start[CharClass.SIMPLE_OP] = State.OP_DONE
    start[CharClass.DOT] = State.OP_DONE
    for c in (CharClass.LETTER, CharClass.DIGIT, CharClass.SKIP):
        table[State.IDENT][c] = State.IDENT
    table[State.INT][CharClass.DIGIT] = State.INT
    table[State.INT][CharClass.DOT] = State.AFTER_DOT
    table[State.AFTER_DOT][CharClass.DIGIT] = State.FRAC
    table[State.FRAC][CharClass.DIGIT] = State.FRAC
    for c in CharClass:
        if c not in (CharClass.QUOTE, CharClass.NEWLINE):
            table[State.STRING][c] = State.STRING
    table[State.STRING][CharClass.QUOTE] = State.STRING_END
    for s in (State.EQ1, State.BANG, State.LT1, State.GT1):
        table[s][CharClass.EQUALS] = State.OP_DONE
    table[State.AMP1][CharClass.AMP] = State.OP_DONE
    table[State.BAR][CharClass.BAR] = State.OP_DONE
    return table


TRANSITIONS = _build_table()

ACCEPTING = frozenset(
    {State.IDENT, State.INT, State.FRAC, State.STRING_END, State.EQ1,
     State.LT1, State.GT1, State.AMP1, State.OP_DONE}
)

_TWO_CHAR_OPS = {
    "==": TokenKind.EQ,
    "!=": TokenKind.NEQ,
    "<=": TokenKind.LE,
    ">=": TokenKind.GE,
    "&&": TokenKind.AND,
    "||": TokenKind.OR,
    "=": TokenKind.ASSIGN,
    "<": TokenKind.LT,
    ">": TokenKind.GT,
    "&": TokenKind.CONCAT,
    ".": TokenKind.DOT,
}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: Span
    num_value: Optional[float] = None
    str_value: Optional[str] = None

    def __str__(self) -> str:
        return f"{self.kind.name}\t{self.lexeme}\t{self.span.line}:{self.span.col}"


def skeleton(text: str) -> str:
    return text.replace(SKIP_MARK, "")


class Lexer:
    def __init__(self, src: PreprocessedSource):
        self.src = src
        self.text = src.codepoints
        self.pos = 0

    def _span(self, start: int, end: int) -> Span:
        return self.src.source.span(start, end)

    def _fail(self, code: str, message: str, start: int, end: int) -> CompileError:
        return CompileError(error(Phase.LEX, code, message, self._span(start, end)))

    def _run_dfa(self, start: int) -> tuple[int, State, int, State]:
        """Returns (last_accept_end, last_accept_state, stop_pos, stop_state)."""
        text = self.text
        state = State.START
        pos = start
        accept_end, accept_state = -1, State.REJECT
        while pos < len(text):
            nxt = TRANSITIONS[state][classify(text[pos])]
            if nxt is State.REJECT:
                break
            state = nxt
            pos += 1
            if state in ACCEPTING:
                accept_end, accept_state = pos, state
        return accept_end, accept_state, pos, state

    def _scan_word(self, start: int) -> Optional[int]:
        if start >= len(self.text) or classify(self.text[start]) is not CharClass.LETTER:
            return None
        end, state, _, _ = self._run_dfa(start)
        return end if state is State.IDENT else None

    def scan_identifier_or_keyword(self, start: int) -> Token:
        end = self._scan_word(start)
        assert end is not None
        word = skeleton(self.text[start:end])
        for parts in COMPOUND_KEYWORDS:
            if parts[0] != word:
                continue
            stop = self._match_compound(parts, end)
            if stop is not None:
                text = "".join(parts)
                return Token(KEYWORDS[text], text, self._span(start, stop))
        kind = KEYWORDS.get(word, TokenKind.IDENT)
        return Token(kind, word, self._span(start, end))

    def _match_compound(self, parts: tuple[str, ...], pos: int) -> Optional[int]:
        text = self.text
        for i in range(1, len(parts), 2):
            sep, word = parts[i], parts[i + 1]
            if sep == "-":
                if pos >= len(text) or text[pos] != "-":
                    return None
                pos += 1
            else:
                gap = pos
                while gap < len(text) and text[gap] in HSPACE:
                    gap += 1
                if gap == pos:
                    return None
                pos = gap
            end = self._scan_word(pos)
            if end is None or skeleton(text[pos:end]) != word:
                return None
            pos = end
        return pos

    def scan_number(self, start: int) -> Token:
        end, _, stop, state = self._run_dfa(start)
        if state is State.AFTER_DOT:
            raise self._fail("E-LEX-002", "expected a digit after the decimal point", start, stop)
        lexeme = self.text[start:end]
        return Token(TokenKind.NUM, lexeme, self._span(start, end), num_value=float(lexeme))

    def scan_string(self, start: int) -> Token:
        end, state, stop, _ = self._run_dfa(start)
        if state is not State.STRING_END:
            raise self._fail("E-LEX-003", "unterminated string literal", start, stop)
        lexeme = self.text[start:end]
        return Token(TokenKind.STRING, lexeme, self._span(start, end), str_value=lexeme[1:-1])

    def _scan_operator(self, start: int) -> Token:
        end, state, stop, _ = self._run_dfa(start)
        if state is State.REJECT:
            raise self._fail("E-LEX-001", f"unexpected character {self.text[start]!r}", start, max(stop, start + 1))
        lexeme = self.text[start:end]
        kind = _TWO_CHAR_OPS.get(lexeme) or SIMPLE_OPS[lexeme]
        return Token(kind, lexeme, self._span(start, end))

    def next_token(self) -> Token:
        text = self.text
        pos = self.pos
        while pos < len(text) and text[pos] in WHITESPACE:
            pos += 1
        if pos >= len(text):
            self.pos = pos
            return Token(TokenKind.EOF, "", self._span(pos, pos))
        cls = classify(text[pos])
        if cls is CharClass.LETTER:
            tok = self.scan_identifier_or_keyword(pos)
        elif cls is CharClass.DIGIT:
            tok = self.scan_number(pos)
        elif cls is CharClass.QUOTE:
            tok = self.scan_string(pos)
        elif TRANSITIONS[State.START][cls] is State.REJECT:
            raise self._fail("E-LEX-001", f"unexpected character {text[pos]!r}", pos, pos + 1)
        else:
            tok = self._scan_operator(pos)
        self.pos = tok.span.end
        return tok


def tokenize(src: PreprocessedSource) -> list[Token]:
    lexer = Lexer(src)
    tokens = []
    while True:
        tok = lexer.next_token()
        tokens.append(tok)
        if tok.kind is TokenKind.EOF:
            return tokens


def dump_tokens(tokens: list[Token]) -> str:
    return "".join(f"{tok}\n" for tok in tokens)
