"""Source text model, spans and diagnostics shared by every compiler stage."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class Phase(str, Enum):
    PREPROCESS = "preprocess"
    LEX = "lex"
    PARSE = "parse"
    SEMANTIC = "semantic"
    CODEGEN = "codegen"
    LINK = "link"
    RUNTIME = "runtime"


@dataclass(frozen=True)
class SourceFile:
    """Source text in logical order; a Python str indexes by codepoint."""

    path: str
    text: str
    line_starts: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        text = self.text
        if text.startswith("\ufeff"):
            text = text[1:]
            object.__setattr__(self, "text", text)
        starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                starts.append(i + 1)
        object.__setattr__(self, "line_starts", tuple(starts))

    @classmethod
    def from_path(cls, path: str | Path) -> "SourceFile":
        data = Path(path).read_bytes()
        return cls(str(path), data.decode("utf-8"))

    @classmethod
    def from_bytes(cls, path: str, data: bytes) -> "SourceFile":
        return cls(path, data.decode("utf-8"))

    @property
    def codepoints(self) -> str:
        return self.text

    def __len__(self) -> int:
        return len(self.text)

    def line_col(self, offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(self.line_starts, offset)
        return line, offset - self.line_starts[line - 1] + 1

    def offset(self, line: int, col: int) -> int:
        return self.line_starts[line - 1] + col - 1

    def line_text(self, line: int) -> str:
        start = self.line_starts[line - 1]
        end = self.text.find("\n", start)
        if end < 0:
            end = len(self.text)
        return self.text[start:end].rstrip("\r")

    def span(self, start: int, end: int) -> "Span":
        line, col = self.line_col(start)
        return Span(start, end, line, col)


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int = 1
    col: int = 1

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"span start {self.start} after end {self.end}")

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end


def span_merge(a: Span, b: Span) -> Span:
    first = a if (a.start, a.line, a.col) <= (b.start, b.line, b.col) else b
    return Span(first.start, max(a.end, b.end), first.line, first.col)


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    phase: Phase
    code: str
    message: str
    span: Optional[Span] = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR


def error(phase: Phase, code: str, message: str, span: Optional[Span] = None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, phase, code, message, span)


def warning(phase: Phase, code: str, message: str, span: Optional[Span] = None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, phase, code, message, span)


def render_diagnostic(d: Diagnostic, src: Optional[SourceFile] = None) -> str:
    if d.span is None:
        return f"{d.phase.value} {d.code} {d.message}"
    header = f"{d.phase.value} {d.code} {d.span.line}:{d.span.col} {d.message}"
    if src is None:
        return header
    return header + "\n" + src.line_text(d.span.line)


def sort_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: (d.span.start if d.span else -1))


class CompileError(Exception):
    """Raised by a stage that stops at its first error."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(f"{diagnostic.code}: {diagnostic.message}")
        self.diagnostic = diagnostic


class CompileFailed(Exception):
    """Raised by a stage that collected one or more errors."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = sort_diagnostics(diagnostics)
        first = self.diagnostics[0]
        super().__init__(f"{first.code}: {first.message}")
