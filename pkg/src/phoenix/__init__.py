"""Phoenix: an Arabic-keyword language compiled to portable bytecode and run on a stack VM."""

from .compiler import Compilation, compile_file, compile_source
from .core import CompileError, CompileFailed, Diagnostic, SourceFile, Span
from .vm import RunResult, RuntimeFault, run

__all__ = [
    "Compilation", "compile_file", "compile_source", "CompileError", "CompileFailed",
    "Diagnostic", "SourceFile", "Span", "RunResult", "RuntimeFault", "run",
]
__version__ = "0.1.0"
