"""Source-to-image pipeline used by the command line and the tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from . import ast as A
from .codegen import ProgramImage, gen_program, link, verify_image
from .core import Diagnostic, SourceFile
from .lexer import Token, tokenize
from .parser import parse_program
from .preprocessor import preprocess
from .semantics import TypedProgram, analyze


@dataclass
class Compilation:
    source: SourceFile
    tokens: list[Token]
    program: A.Program
    typed: TypedProgram
    image: ProgramImage
    warnings: list[Diagnostic] = field(default_factory=list)


def front_end(source: SourceFile) -> tuple[list[Token], A.Program]:
    tokens = tokenize(preprocess(source))
    return tokens, parse_program(tokens)


def compile_file(source: SourceFile, eliminate: bool = True) -> Compilation:
    """Run every phase; raises CompileError or CompileFailed on the first failing one."""
    tokens, program = front_end(source)
    typed = analyze(program, eliminate=eliminate)
    chunks, tables = gen_program(typed)
    image = link(chunks, tables)
    verify_image(image)
    return Compilation(source, tokens, program, typed, image, list(typed.warnings))


def compile_source(text: str, path: Union[str, Path] = "<string>", eliminate: bool = True) -> Compilation:
    return compile_file(SourceFile(str(path), text), eliminate=eliminate)
