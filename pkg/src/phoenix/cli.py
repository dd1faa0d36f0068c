"""Command-line driver: ``phoenix {build,run,lex,parse,check,disasm} PATH``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import ast as A
from .codegen import ProgramImage, disassemble
from .compiler import compile_file, front_end
from .core import CompileError, CompileFailed, Diagnostic, SourceFile, render_diagnostic
from .lexer import dump_tokens, tokenize
from .preprocessor import preprocess
from .semantics import analyze
from .vm import run

EXIT_OK = 0
EXIT_COMPILE = 1
EXIT_RUNTIME = 2
EXIT_USAGE = 64
EXIT_IO = 66

IMAGE_SUFFIX = ".phxc"


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise _Usage(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phoenix", description="Compile and run Phoenix programs.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    b = sub.add_parser("build", help="compile a source file to a program image")
    b.add_argument("path")
    b.add_argument("-o", "--output", help="image path (default: source path with .phxc)")

    r = sub.add_parser("run", help="run a source file or a program image")
    r.add_argument("path")
    r.add_argument("--input-script", metavar="FILE", help="read input lines from FILE instead of stdin")
    r.add_argument("--trace", action="store_true", help="trace executed instructions to stderr")
    r.add_argument("--max-steps", type=int, metavar="N", help="instruction limit (default from PHOENIX_MAX_STEPS or 50M)")

    for name, text in (("lex", "print the token stream"), ("parse", "print the syntax tree"),
                       ("check", "run semantic analysis"), ("disasm", "print the bytecode listing")):
        sub.add_parser(name, help=text).add_argument("path")
    return p


class _IOFailure(Exception):
    pass


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _IOFailure(f"phoenix: cannot read {path}: {exc.strerror or exc}") from None


def _read_source(path: str) -> SourceFile:
    data = _read_bytes(path)
    try:
        return SourceFile.from_bytes(path, data)
    except UnicodeDecodeError:
        raise _IOFailure(f"phoenix: {path} is not valid UTF-8") from None


def _print_diags(diags: Sequence[Diagnostic], src: Optional[SourceFile]) -> None:
    for d in diags:
        print(render_diagnostic(d, src), file=sys.stderr)


def _load_image(path: str) -> ProgramImage:
    return ProgramImage.from_bytes(_read_bytes(path))


def _image_for(path: str) -> tuple[ProgramImage, Optional[SourceFile]]:
    if path.endswith(IMAGE_SUFFIX):
        return _load_image(path), None
    src = _read_source(path)
    comp = compile_file(src)
    _print_diags(comp.warnings, src)
    return comp.image, src


def cmd_build(path: str, output: Optional[str]) -> int:
    src = _read_source(path)
    comp = compile_file(src)
    _print_diags(comp.warnings, src)
    out = output or str(Path(path).with_suffix(IMAGE_SUFFIX))
    try:
        Path(out).write_bytes(comp.image.to_bytes())
    except OSError as exc:
        raise _IOFailure(f"phoenix: cannot write {out}: {exc.strerror or exc}") from None
    return EXIT_OK


def cmd_run(path: str, input_script: Optional[str], trace: bool, max_steps: Optional[int]) -> int:
    img, _src = _image_for(path)
    if input_script is not None:
        lines = _read_bytes(input_script).decode("utf-8", errors="replace").splitlines()
        inp = iter(lines)
    else:
        inp = sys.stdin
    result = run(img, inp, sys.stdout, max_steps=max_steps, trace=sys.stderr if trace else None)
    sys.stdout.flush()
    if result.fault is not None:
        print(result.fault.render(), file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_inspect(command: str, path: str) -> int:
    if command == "disasm":
        img, _src = _image_for(path)
        sys.stdout.write(disassemble(img))
        return EXIT_OK
    src = _read_source(path)
    if command == "lex":
        sys.stdout.write(dump_tokens(tokenize(preprocess(src))))
    elif command == "parse":
        _tokens, program = front_end(src)
        print(A.dump(program))
    else:
        _tokens, program = front_end(src)
        tp = analyze(program)
        _print_diags(tp.warnings, src)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"phoenix: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE

    src_for_diag: Optional[SourceFile] = None
    try:
        if not args.path.endswith(IMAGE_SUFFIX):
            try:
                src_for_diag = _read_source(args.path)
            except _IOFailure:
                pass
        if args.command == "build":
            return cmd_build(args.path, args.output)
        if args.command == "run":
            if args.max_steps is not None and args.max_steps < 1:
                print("phoenix: --max-steps must be positive", file=sys.stderr)
                return EXIT_USAGE
            return cmd_run(args.path, args.input_script, args.trace, args.max_steps)
        return cmd_inspect(args.command, args.path)
    except _IOFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_IO
    except CompileError as exc:
        _print_diags([exc.diagnostic], src_for_diag)
        return EXIT_COMPILE
    except CompileFailed as exc:
        _print_diags(exc.diagnostics, src_for_diag)
        return EXIT_COMPILE


if __name__ == "__main__":
    sys.exit(main())
