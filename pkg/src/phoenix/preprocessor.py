"""Comment blanking and character normalization.

Every pass is a 1:1 codepoint substitution, so offsets into the
preprocessed text are valid offsets into the original file.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import SourceFile

# Lexer-invisible placeholder for a diacritic erased from inside a word.
SKIP_MARK = "\u200b"

ARABIC_INDIC_DIGITS = {chr(0x0660 + i): str(i) for i in range(10)}
PUNCTUATION = {"\u060c": ",", "\u061b": ";"}
TATWEEL = "\u0640"


def is_arabic_letter(ch: str) -> bool:
    return "\u0621" <= ch <= "\u064a" and ch != TATWEEL


def is_diacritic(ch: str) -> bool:
    return "\u064b" <= ch <= "\u0652" or ch == TATWEEL


@dataclass(frozen=True)
class PreprocessedSource:
    source: SourceFile
    codepoints: str
    normalization_log: tuple[tuple[int, str, str], ...] = field(default=())

    def __len__(self) -> int:
        return len(self.codepoints)


def _string_mask(text: str) -> list[bool]:
    """True for every codepoint that sits inside a string literal, quotes included."""
    mask = [False] * len(text)
    in_string = False
    for i, ch in enumerate(text):
        if in_string:
            mask[i] = True
            if ch == '"':
                in_string = False
            elif ch == "\n":
                mask[i] = False
                in_string = False
        elif ch == '"':
            mask[i] = True
            in_string = True
    return mask


def _blank_comments(text: str) -> str:
    out = list(text)
    in_string = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if in_string:
            if ch == '"' or ch == "\n":
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                out[i] = " "
                i += 1
            continue
        i += 1
    return "".join(out)


def strip_comments(src: SourceFile | PreprocessedSource) -> PreprocessedSource:
    if isinstance(src, PreprocessedSource):
        return PreprocessedSource(src.source, _blank_comments(src.codepoints), src.normalization_log)
    return PreprocessedSource(src, _blank_comments(src.text))


def normalize_chars(src: PreprocessedSource) -> PreprocessedSource:
    text = src.codepoints
    mask = _string_mask(text)
    out = list(text)
    log = list(src.normalization_log)
    in_word = False
    for i, ch in enumerate(text):
        if mask[i]:
            in_word = False
            continue
        repl = None
        if ch in ARABIC_INDIC_DIGITS:
            repl = ARABIC_INDIC_DIGITS[ch]
        elif ch in PUNCTUATION:
            repl = PUNCTUATION[ch]
        elif is_diacritic(ch):
            repl = SKIP_MARK if in_word else " "
        if repl is not None:
            out[i] = repl
            log.append((i, ch, repl))
        # A skip mark keeps the current word open.
        in_word = is_arabic_letter(ch) or (in_word and (repl == SKIP_MARK or ch == SKIP_MARK))
    return PreprocessedSource(src.source, "".join(out), tuple(log))


def preprocess(src: SourceFile) -> PreprocessedSource:
    return normalize_chars(strip_comments(src))
