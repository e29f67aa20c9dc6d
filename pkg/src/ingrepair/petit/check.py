"""Static name and type resolution for Petit.

``typecheck`` is the engine's stand-in for compilation: a program variant
is "compilable" when it re-parses and every name and type resolves. The
same scope rules feed ``scope_at``, which reports the variable context
visible at a statement (parameters, lexically prior locals, enclosing
type's fields; innermost binding wins).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast
from .parser import AssertStmt, TestSuite

#: name → declared type, innermost binding winning.
VariableContext = dict[str, str]

_ARITH = {"+", "-", "*", "/", "%"}
_CMP = {"<", "<=", ">", ">="}
_EQ = {"==", "!="}
_LOGIC = {"&&", "||"}


@dataclass
class Diagnostic:
    path: str
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.path}:{self.line}:{self.col}: {self.message}"


class _Checker:
    def __init__(self, program: ast.Program):
        self.program = program
        self.diags: list[Diagnostic] = []
        self.fn_index: dict[tuple[str, str, int], ast.FnDecl] = {}
        for _f, t, fn in program.iter_fns():
            self.fn_index[(t.name, fn.name, len(fn.params))] = fn

    def error(self, path: str, span: ast.Span, message: str) -> None:
        self.diags.append(Diagnostic(path, span.line, span.col, message))

    # -- program ---------------------------------------------------------

    def check_program(self) -> None:
        for f in self.program.files:
            for t in f.types:
                for fld in t.fields:
                    lit_type = ast.LITERAL_TYPES.get(type(fld.value))
                    if lit_type != fld.decl_type:
                        self.error(
                            f.path,
                            fld.span,
                            f"field {fld.name!r} declared {fld.decl_type} but initialized with {lit_type}",
                        )
                for fn in t.fns:
                    self.check_fn(f.path, t, fn)

    def check_fn(self, path: str, tdecl: ast.TypeDecl, fn: ast.FnDecl) -> None:
        fields = {fld.name: fld.decl_type for fld in tdecl.fields}
        params = {p.name: p.decl_type for p in fn.params}
        if len(params) != len(fn.params):
            self.error(path, fn.span, f"duplicate parameter name in fn {fn.name!r}")
        scopes = [fields, params, {}]
        self.check_block(path, tdecl, fn, fn.body, scopes)

    def check_block(self, path, tdecl, fn, body, scopes) -> None:
        for stmt in body:
            self.check_stmt(path, tdecl, fn, stmt, scopes)

    def check_stmt(self, path, tdecl, fn, stmt, scopes) -> None:
        if isinstance(stmt, ast.LetStmt):
            value_type = self.expr_type(path, tdecl, stmt.value, scopes)
            if value_type is not None and value_type != stmt.decl_type:
                self.error(path, stmt.span, f"let {stmt.name!r} declared {stmt.decl_type} but assigned {value_type}")
            if stmt.name in scopes[-1]:
                self.error(path, stmt.span, f"{stmt.name!r} already declared in this block")
            scopes[-1][stmt.name] = stmt.decl_type
        elif isinstance(stmt, ast.AssignStmt):
            decl_type = self.lookup(stmt.name, scopes)
            if decl_type is None:
                self.error(path, stmt.span, f"assignment to undeclared name {stmt.name!r}")
            value_type = self.expr_type(path, tdecl, stmt.value, scopes)
            if None not in (decl_type, value_type) and decl_type != value_type:
                self.error(path, stmt.span, f"cannot assign {value_type} to {stmt.name!r} of type {decl_type}")
        elif isinstance(stmt, ast.IfStmt):
            self.check_cond(path, tdecl, stmt.cond, scopes)
            scopes.append({})
            self.check_block(path, tdecl, fn, stmt.then_body, scopes)
            scopes.pop()
            if stmt.else_body is not None:
                scopes.append({})
                self.check_block(path, tdecl, fn, stmt.else_body, scopes)
                scopes.pop()
        elif isinstance(stmt, ast.WhileStmt):
            self.check_cond(path, tdecl, stmt.cond, scopes)
            scopes.append({})
            self.check_block(path, tdecl, fn, stmt.body, scopes)
            scopes.pop()
        elif isinstance(stmt, ast.ReturnStmt):
            if fn is None:
                self.error(path, stmt.span, "'return' outside a fn")
                return
            value_type = self.expr_type(path, tdecl, stmt.value, scopes)
            if value_type is not None and value_type != fn.ret_type:
                self.error(path, stmt.span, f"fn {fn.name!r} returns {fn.ret_type}, not {value_type}")
        elif isinstance(stmt, ast.ExprStmt):
            self.expr_type(path, tdecl, stmt.call, scopes)
        elif isinstance(stmt, AssertStmt):
            self.check_cond(path, tdecl, stmt.cond, scopes)
        else:
            raise TypeError(f"unknown statement: {stmt!r}")

    def check_cond(self, path, tdecl, cond, scopes) -> None:
        cond_type = self.expr_type(path, tdecl, cond, scopes)
        if cond_type is not None and cond_type != "bool":
            self.error(path, cond.span, f"condition must be bool, not {cond_type}")

    # -- expressions -------------------------------------------------------

    @staticmethod
    def lookup(name: str, scopes) -> str | None:
        for scope in reversed(scopes):
            if name in scope:
                return scope[name]
        return None

    def expr_type(self, path, tdecl, expr, scopes) -> str | None:
        lit = ast.LITERAL_TYPES.get(type(expr))
        if lit is not None:
            return lit
        if isinstance(expr, ast.Name):
            decl_type = self.lookup(expr.ident, scopes)
            if decl_type is None:
                self.error(path, expr.span, f"unresolved name {expr.ident!r}")
            return decl_type
        if isinstance(expr, ast.Unary):
            operand = self.expr_type(path, tdecl, expr.operand, scopes)
            if operand is None:
                return None
            if expr.op == "!":
                if operand != "bool":
                    self.error(path, expr.span, f"'!' needs bool, not {operand}")
                    return None
                return "bool"
            if operand not in ("int", "float"):
                self.error(path, expr.span, f"unary '-' needs int or float, not {operand}")
                return None
            return operand
        if isinstance(expr, ast.Binary):
            left = self.expr_type(path, tdecl, expr.left, scopes)
            right = self.expr_type(path, tdecl, expr.right, scopes)
            if left is None or right is None:
                return None
            if left != right:
                self.error(path, expr.span, f"operand types differ: {left} {expr.op} {right}")
                return None
            op = expr.op
            if op in _LOGIC:
                if left != "bool":
                    self.error(path, expr.span, f"{op!r} needs bool operands, not {left}")
                    return None
                return "bool"
            if op in _EQ:
                return "bool"
            if op in _CMP:
                if left == "bool":
                    self.error(path, expr.span, f"{op!r} cannot compare bool values")
                    return None
                return "bool"
            # arithmetic
            if op == "+" and left == "str":
                return "str"
            if op == "%" and left != "int":
                self.error(path, expr.span, f"'%' needs int operands, not {left}")
                return None
            if left not in ("int", "float"):
                self.error(path, expr.span, f"{op!r} needs numeric operands, not {left}")
                return None
            return left
        if isinstance(expr, ast.Call):
            arg_types = [self.expr_type(path, tdecl, a, scopes) for a in expr.args]
            if expr.type_name is None:
                if tdecl is None:
                    self.error(path, expr.span, f"call {expr.fn_name!r} has no enclosing type; use T.{expr.fn_name}(...)")
                    return None
                owner = tdecl.name
            else:
                owner = expr.type_name
                if self.program.find_type(owner) is None:
                    self.error(path, expr.span, f"unknown type {owner!r}")
                    return None
            fn = self.fn_index.get((owner, expr.fn_name, len(expr.args)))
            if fn is None:
                self.error(path, expr.span, f"no fn {expr.fn_name!r}/{len(expr.args)} in type {owner!r}")
                return None
            for arg_type, param, arg in zip(arg_types, fn.params, expr.args):
                if arg_type is not None and arg_type != param.decl_type:
                    self.error(path, arg.span, f"argument {param.name!r} expects {param.decl_type}, got {arg_type}")
            return fn.ret_type
        raise TypeError(f"unknown expression: {expr!r}")

    # -- tests --------------------------------------------------------------

    def check_suite(self, suite: TestSuite) -> None:
        for case in suite.tests:
            scopes = [{}]
            for stmt in case.body:
                self.check_stmt(case.path, None, None, stmt, scopes)


def typecheck(program: ast.Program, suite: TestSuite | None = None) -> list[Diagnostic]:
    """Resolve every name and type; returns diagnostics (empty = well typed)."""
    checker = _Checker(program)
    checker.check_program()
    if suite is not None:
        checker.check_suite(suite)
    return checker.diags


def scope_at(program: ast.Program, sid: ast.StatementId) -> VariableContext:
    """Visible (name, declared type) pairs at a statement.

    Includes the enclosing type's fields, the fn's parameters, and locals
    bound lexically before the statement in enclosing blocks; bindings
    introduced by the statement itself or later are excluded.
    """
    for f, t, fn in program.iter_fns():
        if f.path != sid.path or t.name != sid.type_name or fn.signature != sid.fn_sig:
            continue
        fields = {fld.name: fld.decl_type for fld in t.fields}
        params = {p.name: p.decl_type for p in fn.params}
        scopes = [fields, params, {}]
        found = _scope_walk(fn.body, sid.index, _Counter(), scopes)
        if found is not None:
            return found
        raise KeyError(f"unknown statement id: {sid}")
    raise KeyError(f"unknown statement id: {sid}")


class _Counter:
    __slots__ = ("value",)

    def __init__(self):
        self.value = 0


def _scope_walk(body, target: int, counter: _Counter, scopes) -> VariableContext | None:
    for stmt in body:
        if counter.value == target:
            flat: VariableContext = {}
            for scope in scopes:
                flat.update(scope)
            return flat
        counter.value += 1
        if isinstance(stmt, ast.LetStmt):
            scopes[-1][stmt.name] = stmt.decl_type
        elif isinstance(stmt, ast.IfStmt):
            scopes.append({})
            found = _scope_walk(stmt.then_body, target, counter, scopes)
            scopes.pop()
            if found is not None:
                return found
            if stmt.else_body is not None:
                scopes.append({})
                found = _scope_walk(stmt.else_body, target, counter, scopes)
                scopes.pop()
                if found is not None:
                    return found
        elif isinstance(stmt, ast.WhileStmt):
            scopes.append({})
            found = _scope_walk(stmt.body, target, counter, scopes)
            scopes.pop()
            if found is not None:
                return found
    return None


def free_accesses(stmt: ast.Stmt, source_context: VariableContext) -> list[tuple[str, str]]:
    """The free variable accesses of a statement with their declared types.

    A name is free when it is read or assigned without being bound by a
    ``let`` earlier in the statement's own body. Types are taken from the
    statement's source context; names that do not resolve there are
    reported with type ``None``.
    """
    accesses: dict[str, str | None] = {}

    def visit_expr(expr: ast.Expr, bound: set[str]) -> None:
        if isinstance(expr, ast.Name):
            if expr.ident not in bound and expr.ident not in accesses:
                accesses[expr.ident] = source_context.get(expr.ident)
        elif isinstance(expr, ast.Unary):
            visit_expr(expr.operand, bound)
        elif isinstance(expr, ast.Binary):
            visit_expr(expr.left, bound)
            visit_expr(expr.right, bound)
        elif isinstance(expr, ast.Call):
            for a in expr.args:
                visit_expr(a, bound)

    def visit_block(body, bound: set[str]) -> None:
        inner = set(bound)
        for s in body:
            visit_stmt(s, inner)

    def visit_stmt(s: ast.Stmt, bound: set[str]) -> None:
        if isinstance(s, ast.LetStmt):
            visit_expr(s.value, bound)
            bound.add(s.name)
        elif isinstance(s, ast.AssignStmt):
            if s.name not in bound and s.name not in accesses:
                accesses[s.name] = source_context.get(s.name)
            visit_expr(s.value, bound)
        elif isinstance(s, ast.IfStmt):
            visit_expr(s.cond, bound)
            visit_block(s.then_body, bound)
            if s.else_body is not None:
                visit_block(s.else_body, bound)
        elif isinstance(s, ast.WhileStmt):
            visit_expr(s.cond, bound)
            visit_block(s.body, bound)
        elif isinstance(s, ast.ReturnStmt):
            visit_expr(s.value, bound)
        elif isinstance(s, ast.ExprStmt):
            visit_expr(s.call, bound)
        elif isinstance(s, AssertStmt):
            visit_expr(s.cond, bound)

    visit_stmt(stmt, set())
    return [(name, accesses[name]) for name in accesses]
