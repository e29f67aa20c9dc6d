"""Recursive-descent parser producing :class:`~ingrepair.petit.ast.Program`
and :class:`TestSuite` values.

Syntax errors carry file, line, and column. Duplicate type names (program
wide) and duplicate ``(name, arity)`` fn signatures or field names (within
one type) are rejected here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ast
from . import lexer
from .lexer import (
    CHAR,
    EOF,
    FLOAT,
    IDENT,
    INT,
    KW,
    OP,
    STR,
    PetitSyntaxError,
    Token,
    literal_value,
    tokenize,
)

TYPE_NAMES = set(ast.PRIMITIVE_TYPES)


@dataclass
class TestCase:
    name: str
    body: list[ast.Stmt]
    path: str = "<test>"


@dataclass
class AssertStmt(ast.Stmt):
    """``assert(expr);`` — only valid inside test bodies."""

    cond: ast.Expr = None  # type: ignore[assignment]
    sid: object = None
    span: ast.Span = field(default=ast.Span(0, 0), compare=False)


@dataclass
class TestSuite:
    tests: list[TestCase]

    def names(self) -> list[str]:
        return [t.name for t in self.tests]


class _Parser:
    def __init__(self, text: str, path: str):
        self.path = path
        self.tokens = tokenize(text, path)
        self.pos = 0

    # -- token helpers ------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def check(self, kind: str, lexeme: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (lexeme is None or tok.lexeme == lexeme)

    def match(self, kind: str, lexeme: str | None = None) -> Token | None:
        if self.check(kind, lexeme):
            return self.advance()
        return None

    def expect(self, kind: str, lexeme: str | None = None, what: str | None = None) -> Token:
        tok = self.peek()
        if self.check(kind, lexeme):
            return self.advance()
        expected = what or (lexeme if lexeme is not None else kind)
        raise self.err(f"expected {expected!r}, found {tok.lexeme or '<eof>'!r}", tok)

    def err(self, msg: str, tok: Token | None = None) -> PetitSyntaxError:
        tok = tok or self.peek()
        return PetitSyntaxError(msg, self.path, tok.line, tok.col)

    # -- declarations --------------------------------------------------

    def parse_file(self) -> ast.File:
        types: list[ast.TypeDecl] = []
        while not self.check(EOF):
            if self.check(KW, "return"):
                raise self.err("'return' outside a fn")
            self.expect(KW, "type", what="type declaration")
            types.append(self.type_decl())
        return ast.File(self.path, types)

    def type_decl(self) -> ast.TypeDecl:
        name_tok = self.expect(IDENT, what="type name")
        span = ast.Span(name_tok.line, name_tok.col)
        self.expect(OP, "{")
        fields: list[ast.FieldDecl] = []
        fns: list[ast.FnDecl] = []
        while not self.match(OP, "}"):
            if self.check(KW, "let"):
                fields.append(self.field_decl())
            elif self.check(KW, "fn"):
                fns.append(self.fn_decl())
            else:
                raise self.err("expected 'let' field or 'fn' declaration")
        decl = ast.TypeDecl(name_tok.lexeme, fields, fns, span=span)
        seen_fields = set()
        for fld in decl.fields:
            if fld.name in seen_fields:
                raise PetitSyntaxError(
                    f"duplicate field {fld.name!r} in type {decl.name!r}",
                    self.path,
                    fld.span.line,
                    fld.span.col,
                )
            seen_fields.add(fld.name)
        seen_fns = set()
        for fn in decl.fns:
            key = (fn.name, len(fn.params))
            if key in seen_fns:
                raise PetitSyntaxError(
                    f"duplicate fn {fn.name!r}/{len(fn.params)} in type {decl.name!r}",
                    self.path,
                    fn.span.line,
                    fn.span.col,
                )
            seen_fns.add(key)
        return decl

    def field_decl(self) -> ast.FieldDecl:
        let_tok = self.expect(KW, "let")
        name = self.expect(IDENT, what="field name").lexeme
        self.expect(OP, ":")
        decl_type = self.type_name()
        self.expect(OP, "=")
        value = self.literal()
        self.expect(OP, ";")
        return ast.FieldDecl(name, decl_type, value, span=ast.Span(let_tok.line, let_tok.col))

    def fn_decl(self) -> ast.FnDecl:
        fn_tok = self.expect(KW, "fn")
        name = self.expect(IDENT, what="fn name").lexeme
        self.expect(OP, "(")
        params: list[ast.Param] = []
        if not self.check(OP, ")"):
            while True:
                pname = self.expect(IDENT, what="parameter name").lexeme
                self.expect(OP, ":")
                params.append(ast.Param(pname, self.type_name()))
                if not self.match(OP, ","):
                    break
        self.expect(OP, ")")
        self.expect(OP, "->")
        ret = self.type_name()
        body = self.block(allow_return=True, allow_assert=False)
        return ast.FnDecl(name, params, ret, body, span=ast.Span(fn_tok.line, fn_tok.col))

    def type_name(self) -> str:
        tok = self.peek()
        if tok.kind == KW and tok.lexeme in TYPE_NAMES:
            return self.advance().lexeme
        raise self.err(f"expected a type name, found {tok.lexeme!r}")

    def literal(self) -> ast.Expr:
        tok = self.peek()
        span = ast.Span(tok.line, tok.col)
        if tok.kind == INT:
            self.advance()
            return ast.IntLit(int(tok.lexeme), span)
        if tok.kind == FLOAT:
            self.advance()
            return ast.FloatLit(float(tok.lexeme), span)
        if tok.kind == KW and tok.lexeme in ("true", "false"):
            self.advance()
            return ast.BoolLit(tok.lexeme == "true", span)
        if tok.kind == STR:
            self.advance()
            return ast.StrLit(literal_value(tok, self.path), span)
        if tok.kind == CHAR:
            self.advance()
            return ast.CharLit(literal_value(tok, self.path), span)
        raise self.err("expected a literal")

    # -- statements ----------------------------------------------------

    def block(self, allow_return: bool, allow_assert: bool) -> list[ast.Stmt]:
        self.expect(OP, "{")
        body: list[ast.Stmt] = []
        while not self.match(OP, "}"):
            body.append(self.statement(allow_return, allow_assert))
        return body

    def statement(self, allow_return: bool, allow_assert: bool) -> ast.Stmt:
        tok = self.peek()
        span = ast.Span(tok.line, tok.col)
        if self.check(KW, "let"):
            self.advance()
            name = self.expect(IDENT, what="variable name").lexeme
            self.expect(OP, ":")
            decl_type = self.type_name()
            self.expect(OP, "=")
            value = self.expression()
            self.expect(OP, ";")
            return ast.LetStmt(name, decl_type, value, span=span)
        if self.check(KW, "if"):
            self.advance()
            self.expect(OP, "(")
            cond = self.expression()
            self.expect(OP, ")")
            then_body = self.block(allow_return, allow_assert)
            else_body = None
            if self.match(KW, "else"):
                else_body = self.block(allow_return, allow_assert)
            return ast.IfStmt(cond, then_body, else_body, span=span)
        if self.check(KW, "while"):
            self.advance()
            self.expect(OP, "(")
            cond = self.expression()
            self.expect(OP, ")")
            body = self.block(allow_return, allow_assert)
            return ast.WhileStmt(cond, body, span=span)
        if self.check(KW, "return"):
            if not allow_return:
                raise self.err("'return' outside a fn")
            self.advance()
            value = self.expression()
            self.expect(OP, ";")
            return ast.ReturnStmt(value, span=span)
        if self.check(KW, "assert"):
            if not allow_assert:
                raise self.err("'assert' is only valid in tests")
            self.advance()
            self.expect(OP, "(")
            cond = self.expression()
            self.expect(OP, ")")
            self.expect(OP, ";")
            return AssertStmt(cond, span=span)
        if self.check(IDENT) and self.tokens[self.pos + 1].kind == OP and self.tokens[self.pos + 1].lexeme == "=":
            name = self.advance().lexeme
            self.advance()  # '='
            value = self.expression()
            self.expect(OP, ";")
            return ast.AssignStmt(name, value, span=span)
        expr = self.expression()
        if not isinstance(expr, ast.Call):
            raise self.err("only call expressions may stand alone as statements", tok)
        self.expect(OP, ";")
        return ast.ExprStmt(expr, span=span)

    # -- expressions (precedence climbing) ------------------------------

    def expression(self) -> ast.Expr:
        return self.or_expr()

    def _binary_level(self, sub, ops) -> ast.Expr:
        left = sub()
        while True:
            tok = self.peek()
            if tok.kind == OP and tok.lexeme in ops:
                self.advance()
                right = sub()
                left = ast.Binary(tok.lexeme, left, right, span=ast.Span(tok.line, tok.col))
            else:
                return left

    def or_expr(self) -> ast.Expr:
        return self._binary_level(self.and_expr, ("||",))

    def and_expr(self) -> ast.Expr:
        return self._binary_level(self.equality, ("&&",))

    def equality(self) -> ast.Expr:
        return self._binary_level(self.comparison, ("==", "!="))

    def comparison(self) -> ast.Expr:
        return self._binary_level(self.additive, ("<", "<=", ">", ">="))

    def additive(self) -> ast.Expr:
        return self._binary_level(self.multiplicative, ("+", "-"))

    def multiplicative(self) -> ast.Expr:
        return self._binary_level(self.unary, ("*", "/", "%"))

    def unary(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind == OP and tok.lexeme in ("!", "-"):
            self.advance()
            operand = self.unary()
            return ast.Unary(tok.lexeme, operand, span=ast.Span(tok.line, tok.col))
        return self.primary()

    def primary(self) -> ast.Expr:
        tok = self.peek()
        span = ast.Span(tok.line, tok.col)
        if tok.kind in (INT, FLOAT, STR, CHAR) or (tok.kind == KW and tok.lexeme in ("true", "false")):
            return self.literal()
        if tok.kind == OP and tok.lexeme == "(":
            self.advance()
            inner = self.expression()
            self.expect(OP, ")")
            return inner
        if tok.kind == IDENT:
            self.advance()
            if self.check(OP, "."):
                self.advance()
                fn_name = self.expect(IDENT, what="fn name").lexeme
                return ast.Call(tok.lexeme, fn_name, self.call_args(), span=span)
            if self.check(OP, "("):
                return ast.Call(None, tok.lexeme, self.call_args(), span=span)
            return ast.Name(tok.lexeme, span)
        raise self.err(f"expected an expression, found {tok.lexeme or '<eof>'!r}")

    def call_args(self) -> list[ast.Expr]:
        self.expect(OP, "(")
        args: list[ast.Expr] = []
        if not self.check(OP, ")"):
            while True:
                args.append(self.expression())
                if not self.match(OP, ","):
                    break
        self.expect(OP, ")")
        return args

    # -- tests -----------------------------------------------------------

    def parse_tests(self) -> list[TestCase]:
        tests: list[TestCase] = []
        while not self.check(EOF):
            if self.check(KW, "return"):
                raise self.err("'return' outside a fn")
            self.expect(KW, "test", what="test declaration")
            name = self.expect(IDENT, what="test name").lexeme
            body = self.block(allow_return=False, allow_assert=True)
            tests.append(TestCase(name, body, self.path))
        return tests


def parse(source_tree: dict[str, str]) -> ast.Program:
    """Parse a map of path → Petit source text into a Program.

    Files are ordered by path; duplicate type names across the whole
    program are rejected.
    """
    files = [_Parser(source_tree[path], path).parse_file() for path in sorted(source_tree)]
    program = ast.Program(files)
    seen: dict[str, str] = {}
    for f in program.files:
        for t in f.types:
            if t.name in seen:
                raise PetitSyntaxError(
                    f"duplicate type {t.name!r} (first declared in {seen[t.name]})",
                    f.path,
                    t.span.line,
                    t.span.col,
                )
            seen[t.name] = f.path
    ast.assign_statement_ids(program)
    return program


def parse_tests(source_tree: dict[str, str]) -> TestSuite:
    """Parse a map of path → test file text into a TestSuite (path order)."""
    tests: list[TestCase] = []
    seen: dict[str, str] = {}
    for path in sorted(source_tree):
        for case in _Parser(source_tree[path], path).parse_tests():
            if case.name in seen:
                raise PetitSyntaxError(
                    f"duplicate test {case.name!r} (first declared in {seen[case.name]})",
                    path,
                    1,
                    1,
                )
            seen[case.name] = path
            tests.append(case)
    return TestSuite(tests)
