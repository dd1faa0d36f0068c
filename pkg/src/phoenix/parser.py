"""Recursive-descent parser producing the syntax tree.

Parsing stops at the first syntax error; there is no recovery.
"""

from __future__ import annotations

from typing import Iterable, Optional

from . import ast as A
from .core import CompileError, Phase, Span, error, span_merge
from .lexer import KEYWORD_TEXT, Token, TokenKind as T

TYPE_KEYWORDS = {
    T.KW_NUM: A.TypeName.NUM,
    T.KW_STR: A.TypeName.STR,
    T.KW_NUMLIST: A.TypeName.NUMLIST,
    T.KW_STRLIST: A.TypeName.STRLIST,
}
RETURN_TYPES = {**TYPE_KEYWORDS, T.KW_ENTRY: A.TypeName.ENTRY}

RELOPS = {T.EQ: "==", T.NEQ: "!=", T.LT: "<", T.GT: ">", T.LE: "<=", T.GE: ">="}
ADDOPS = {T.PLUS: "+", T.MINUS: "-"}
MULOPS = {T.MUL: "×", T.DIV: "÷", T.MOD: "%"}
ARITH_FOLLOW = set(RELOPS) | set(ADDOPS) | set(MULOPS) | {T.CONCAT}

_PUNCT_TEXT = {
    T.LPAREN: "(", T.RPAREN: ")", T.LBRACE: "{", T.RBRACE: "}",
    T.LBRACKET: "[", T.RBRACKET: "]", T.COMMA: ",", T.SEMI: ";",
    T.COLON: ":", T.ASSIGN: "=", T.DOT: ".", T.EOF: "end of file",
}


def describe(kind: T) -> str:
    if kind in KEYWORD_TEXT:
        return KEYWORD_TEXT[kind]
    if kind in _PUNCT_TEXT:
        return _PUNCT_TEXT[kind]
    return kind.name


class Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind is not T.EOF:
            end = tokens[-1].span if tokens else Span(0, 0)
            tokens = list(tokens) + [Token(T.EOF, "", Span(end.end, end.end, end.line, end.col))]
        self.tokens = tokens
        self.i = 0

    # ---- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, n: int = 1) -> Token:
        return self.tokens[min(self.i + n, len(self.tokens) - 1)]

    def at(self, *kinds: T) -> bool:
        return self.tok.kind in kinds

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind is not T.EOF:
            self.i += 1
        return tok

    def fail(self, expected: Iterable[T] | str, code: str = "E-PAR-001") -> CompileError:
        if isinstance(expected, str):
            want = expected
        else:
            want = " | ".join(describe(k) for k in expected)
        found = self.tok.lexeme or describe(self.tok.kind)
        return CompileError(error(Phase.PARSE, code, f"expected {want}, found {found}", self.tok.span))

    def expect(self, kind: T, code: str = "E-PAR-001") -> Token:
        if self.tok.kind is not kind:
            raise self.fail([kind], code)
        return self.advance()

    def semi(self) -> Token:
        return self.expect(T.SEMI, "E-PAR-002")

    def _from(self, start: Token) -> Span:
        return span_merge(start.span, self.tokens[self.i - 1].span)

    # ---- top level --------------------------------------------------------

    def parse_program(self) -> A.Program:
        items = []
        first = self.tok
        while not self.at(T.EOF):
            if self.at(T.KW_FUNC):
                items.append(self.parse_function_decl())
            elif self.at(T.KW_CLASS):
                items.append(self.parse_class_decl())
            elif self.at(*TYPE_KEYWORDS) or (self.at(T.IDENT) and self.peek().kind is T.IDENT):
                items.append(self.parse_declaration())
            else:
                raise self.fail([T.KW_FUNC, T.KW_CLASS, *TYPE_KEYWORDS])
        span = self._from(first) if items else first.span
        return A.Program(items, span)

    def parse_function_decl(self) -> A.FunctionDecl:
        start = self.expect(T.KW_FUNC)
        name = self.expect(T.IDENT).lexeme
        self.expect(T.LPAREN)
        params: list[A.Param] = []
        if self.at(T.MINUS) and self.peek().kind is T.RPAREN:
            self.advance()
        else:
            while True:
                if not self.at(*TYPE_KEYWORDS):
                    raise self.fail("parameter type or -", "E-PAR-004")
                ptok = self.advance()
                if not self.at(T.IDENT):
                    raise self.fail("parameter name", "E-PAR-004")
                pname = self.advance().lexeme
                params.append(A.Param(TYPE_KEYWORDS[ptok.kind], pname, self._from(ptok)))
                if not self.at(T.COMMA):
                    break
                self.advance()
            if not self.at(T.RPAREN):
                raise self.fail("',' or ')' in parameter list", "E-PAR-004")
        self.expect(T.RPAREN)
        self.expect(T.COLON)
        if not self.at(*RETURN_TYPES):
            raise self.fail(list(RETURN_TYPES))
        ret = RETURN_TYPES[self.advance().kind]
        body = self.parse_block()
        self.expect(T.KW_ENDFUNC, "E-PAR-003")
        return A.FunctionDecl(name, params, ret, body, self._from(start))

    def parse_class_decl(self) -> A.ClassDecl:
        start = self.expect(T.KW_CLASS)
        name = self.expect(T.IDENT).lexeme
        self.expect(T.LBRACE)
        members = []
        while not self.at(T.RBRACE):
            if not self.at(T.KW_PUBLIC, T.KW_PRIVATE):
                raise self.fail([T.KW_PUBLIC, T.KW_PRIVATE, T.RBRACE])
            mtok = self.advance()
            access = A.Access.PUBLIC if mtok.kind is T.KW_PUBLIC else A.Access.PRIVATE
            if self.at(T.KW_FUNC):
                decl = self.parse_function_decl()
            elif self.at(*TYPE_KEYWORDS) or (self.at(T.IDENT) and self.peek().kind is T.IDENT):
                decl = self.parse_declaration()
            else:
                raise self.fail([T.KW_FUNC, *TYPE_KEYWORDS])
            members.append(A.Member(access, decl, self._from(mtok)))
        self.expect(T.RBRACE)
        return A.ClassDecl(name, members, self._from(start))

    # ---- statements -------------------------------------------------------

    def parse_block(self) -> A.Block:
        start = self.expect(T.LBRACE)
        stmts = []
        while not self.at(T.RBRACE):
            if self.at(T.EOF):
                raise self.fail([T.RBRACE])
            stmts.append(self.parse_statement())
        self.advance()
        return A.Block(stmts, self._from(start))

    def parse_declaration(self) -> A.Decl:
        start = self.tok
        if self.at(T.IDENT):
            cls = self.advance().lexeme
            name = self.expect(T.IDENT).lexeme
            self.semi()
            return A.ObjectDecl(cls, name, self._from(start))
        ty = TYPE_KEYWORDS[self.advance().kind]
        name = self.expect(T.IDENT).lexeme
        if self.at(T.LBRACKET):
            self.advance()
            size = self.expect(T.NUM).num_value
            self.expect(T.RBRACKET)
            init = None
            if self.at(T.ASSIGN):
                self.advance()
                init = self.parse_value_list()
            self.semi()
            return A.ArrayDecl(ty, name, size, init, self._from(start))
        self.expect(T.ASSIGN)
        value = self.parse_expression()
        self.semi()
        return A.VarDecl(ty, name, value, self._from(start))

    def parse_value_list(self) -> list:
        self.expect(T.LBRACE)
        values: list = []
        if self.at(T.RBRACE):
            self.advance()
            return values
        while True:
            start = self.tok
            if self.at(T.STRING):
                values.append(A.StrLit(self.advance().str_value, start.span))
            else:
                sign = 1.0
                if self.at(T.MINUS, T.PLUS):
                    sign = -1.0 if self.advance().kind is T.MINUS else 1.0
                num = self.expect(T.NUM)
                values.append(A.NumLit(sign * num.num_value, self._from(start)))
            if not self.at(T.COMMA):
                break
            self.advance()
        self.expect(T.RBRACE)
        return values

    def parse_statement(self) -> A.Stmt:
        tok = self.tok
        kind = tok.kind
        if kind in TYPE_KEYWORDS:
            return self.parse_declaration()
        if kind is T.IDENT:
            if self.peek().kind is T.IDENT:
                return self.parse_declaration()
            target = self.parse_lvalue()
            self.expect(T.ASSIGN)
            value = self.parse_expression()
            self.semi()
            return A.Assign(target, value, self._from(tok))
        if kind is T.LBRACE:
            return self.parse_block()
        if kind is T.KW_IF:
            self.advance()
            self.expect(T.COLON)
            cond = self.parse_bool_expression()
            then = self.parse_block()
            else_ = None
            if self.at(T.KW_ELSE):
                self.advance()
                else_ = self.parse_block()
            return A.If(cond, then, else_, self._from(tok))
        if kind is T.KW_WHILE:
            self.advance()
            self.expect(T.COLON)
            cond = self.parse_bool_expression()
            body = self.parse_block()
            return A.While(cond, body, self._from(tok))
        if kind is T.KW_SHOW:
            self.advance()
            self.expect(T.COLON)
            expr = self.parse_expression()
            self.semi()
            return A.Show(expr, self._from(tok))
        if kind is T.KW_INPUT:
            self.advance()
            self.expect(T.COLON)
            target = self.parse_lvalue()
            self.expect(T.COMMA)
            prompt = self.expect(T.STRING).str_value
            self.semi()
            return A.Input(target, prompt, self._from(tok))
        if kind is T.KW_CALL:
            self.advance()
            self.expect(T.COLON)
            call = self._call_tail(tok)
            self.semi()
            return A.CallStmt(call, self._from(tok))
        if kind is T.KW_RETURN:
            self.advance()
            expr = None
            if self.at(T.COLON):
                self.advance()
                expr = self.parse_expression()
            self.semi()
            return A.Return(expr, self._from(tok))
        raise self.fail("a statement")

    def _ref(self) -> A.Ref:
        start = self.expect(T.IDENT)
        ref: A.Ref = A.VarRef(start.lexeme, start.span)
        while self.at(T.DOT):
            self.advance()
            name = self.expect(T.IDENT).lexeme
            ref = A.FieldRef(ref, name, self._from(start))
        return ref

    def parse_lvalue(self) -> A.LValue:
        start = self.tok
        ref = self._ref()
        if self.at(T.LBRACKET):
            self.advance()
            index = self.parse_expression()
            self.expect(T.RBRACKET)
            return A.IndexRef(ref, index, self._from(start))
        return ref

    def _call_tail(self, start: Token) -> A.CallExpr:
        callee = self._ref()
        self.expect(T.LPAREN)
        args: list[A.Expr] = []
        if self.at(T.MINUS) and self.peek().kind is T.RPAREN:
            self.advance()
        elif self.at(T.RPAREN):
            raise self.fail("argument or -", "E-PAR-004")
        else:
            args.append(self.parse_expression())
            while self.at(T.COMMA):
                self.advance()
                args.append(self.parse_expression())
        self.expect(T.RPAREN)
        return A.CallExpr(callee, args, self._from(start))

    # ---- expressions ------------------------------------------------------

    def parse_expression(self) -> A.Expr:
        start = self.tok
        lhs = self._additive()
        while self.at(T.CONCAT):
            self.advance()
            rhs = self._additive()
            lhs = A.Binary("&", lhs, rhs, self._from(start))
        return lhs

    def _additive(self) -> A.Expr:
        start = self.tok
        lhs = self._multiplicative()
        while self.tok.kind in ADDOPS:
            op = ADDOPS[self.advance().kind]
            rhs = self._multiplicative()
            lhs = A.Binary(op, lhs, rhs, self._from(start))
        return lhs

    def _multiplicative(self) -> A.Expr:
        start = self.tok
        lhs = self._unary()
        while self.tok.kind in MULOPS:
            op = MULOPS[self.advance().kind]
            rhs = self._unary()
            lhs = A.Binary(op, lhs, rhs, self._from(start))
        return lhs

    def _unary(self) -> A.Expr:
        if self.tok.kind in ADDOPS:
            start = self.advance()
            operand = self._unary()
            return A.Unary(ADDOPS[start.kind], operand, self._from(start))
        return self._primary()

    def _primary(self) -> A.Expr:
        tok = self.tok
        if tok.kind is T.NUM:
            self.advance()
            return A.NumLit(tok.num_value, tok.span)
        if tok.kind is T.STRING:
            self.advance()
            return A.StrLit(tok.str_value, tok.span)
        if tok.kind is T.LPAREN:
            self.advance()
            inner = self.parse_expression()
            self.expect(T.RPAREN)
            return inner
        if tok.kind is T.KW_CALL:
            self.advance()
            return self._call_tail(tok)
        if tok.kind is T.IDENT:
            return self.parse_lvalue()
        raise self.fail("an expression")

    # ---- conditions -------------------------------------------------------

    def parse_bool_expression(self) -> A.BoolExpr:
        start = self.tok
        lhs = self._and()
        while self.at(T.OR):
            self.advance()
            rhs = self._and()
            lhs = A.Or(lhs, rhs, self._from(start))
        return lhs

    def _and(self) -> A.BoolExpr:
        start = self.tok
        lhs = self._bool_atom()
        while self.at(T.AND):
            self.advance()
            rhs = self._bool_atom()
            lhs = A.And(lhs, rhs, self._from(start))
        return lhs

    def _matching_paren(self) -> Optional[int]:
        depth = 0
        for j in range(self.i, len(self.tokens)):
            kind = self.tokens[j].kind
            if kind is T.LPAREN:
                depth += 1
            elif kind is T.RPAREN:
                depth -= 1
                if depth == 0:
                    return j
        return None

    def _bool_atom(self) -> A.BoolExpr:
        start = self.tok
        if self.at(T.LPAREN):
            close = self._matching_paren()
            after = self.tokens[close + 1].kind if close is not None and close + 1 < len(self.tokens) else None
            if after not in ARITH_FOLLOW:
                self.advance()
                inner = self.parse_bool_expression()
                self.expect(T.RPAREN)
                return A.Paren(inner, self._from(start))
        lhs = self.parse_expression()
        if self.tok.kind not in RELOPS:
            raise self.fail(list(RELOPS), "E-PAR-005")
        op = RELOPS[self.advance().kind]
        rhs = self.parse_expression()
        return A.Cmp(op, lhs, rhs, self._from(start))


def parse_program(tokens: list[Token]) -> A.Program:
    return Parser(tokens).parse_program()


def parse_source(text: str, path: str = "<string>") -> A.Program:
    from .core import SourceFile
    from .lexer import tokenize
    from .preprocessor import preprocess

    return parse_program(tokenize(preprocess(SourceFile(path, text))))
