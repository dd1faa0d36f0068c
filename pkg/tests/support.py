"""Small helpers shared by the test modules."""

from __future__ import annotations

from phoenix.compiler import compile_source
from phoenix.core import CompileError, CompileFailed, Diagnostic
from phoenix.treewalk import tree_walk_eval
from phoenix.vm import RunResult, run


def compile_diagnostics(text: str) -> list[Diagnostic]:
    """Errors from compiling ``text``; empty when it compiles."""
    try:
        compile_source(text)
    except CompileError as exc:
        return [exc.diagnostic]
    except CompileFailed as exc:
        return exc.diagnostics
    return []


def codes(text: str) -> list[str]:
    return [d.code for d in compile_diagnostics(text)]


def run_source(text: str, inputs=(), **kwargs) -> RunResult:
    return run(compile_source(text).image, list(inputs), **kwargs)


def both(text: str, inputs=(), eliminate: bool = True) -> tuple[RunResult, RunResult]:
    comp = compile_source(text, eliminate=eliminate)
    return run(comp.image, list(inputs)), tree_walk_eval(comp.typed, list(inputs))


def outcome(result: RunResult) -> tuple[list[str], str | None, str | None]:
    fault = result.fault
    return result.transcript.lines, fault and fault.code, fault and fault.message
