"""Tree-walking interpreter with per-test statement coverage.

Each test runs in a fresh environment (type fields re-initialized) under a
step budget so looping program variants terminate with a failing outcome
instead of hanging the repair loop. The engine itself never raises for a
misbehaving variant; all failures become test outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ast
from .parser import AssertStmt, TestSuite

DEFAULT_STEP_BUDGET = 100_000
CALL_DEPTH_LIMIT = 200

PASS = "pass"
FAIL = "fail"
ERROR = "error"


class _RuntimeErr(Exception):
    pass


class _AssertFail(Exception):
    pass


class _StepsExceeded(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


@dataclass
class TestResult:
    name: str
    outcome: str  # pass | fail | error
    covered: frozenset[ast.StatementId] = frozenset()
    message: str = ""

    @property
    def failed(self) -> bool:
        """Failing for localization purposes (assert failures and errors)."""
        return self.outcome != PASS


@dataclass
class CoverageMatrix:
    results: list[TestResult] = field(default_factory=list)

    @property
    def outcomes(self) -> dict[str, str]:
        return {r.name: r.outcome for r in self.results}

    def failing(self) -> list[TestResult]:
        return [r for r in self.results if r.failed]

    def passing(self) -> list[TestResult]:
        return [r for r in self.results if not r.failed]

    def all_pass(self) -> bool:
        return all(not r.failed for r in self.results)


class Interpreter:
    def __init__(self, program: ast.Program, step_budget: int = DEFAULT_STEP_BUDGET):
        self.program = program
        self.step_budget = step_budget
        self.fn_index: dict[tuple[str, str, int], ast.FnDecl] = {}
        self.type_fields: dict[str, list[ast.FieldDecl]] = {}
        for _f, t, fn in program.iter_fns():
            self.fn_index[(t.name, fn.name, len(fn.params))] = fn
        for f in program.files:
            for t in f.types:
                self.type_fields[t.name] = t.fields

    # -- one test ---------------------------------------------------------

    def run_test(self, case, trace: bool = False) -> TestResult:
        self.steps = 0
        self.covered: set[ast.StatementId] | None = set() if trace else None
        self.fields = {
            tname: {fld.name: _literal(fld.value) for fld in flds}
            for tname, flds in self.type_fields.items()
        }
        try:
            self.exec_block(case.body, None, [{}], depth=0)
            outcome, message = PASS, ""
        except _AssertFail as e:
            outcome, message = FAIL, str(e) or "assertion failed"
        except _StepsExceeded:
            outcome, message = FAIL, "step budget exceeded"
        except _Return:
            outcome, message = ERROR, "'return' escaped the test body"
        except (_RuntimeErr, RecursionError) as e:
            outcome, message = ERROR, str(e) or type(e).__name__
        covered = frozenset(self.covered) if self.covered is not None else frozenset()
        return TestResult(case.name, outcome, covered, message)

    # -- statements ---------------------------------------------------------

    def note(self, stmt: ast.Stmt) -> None:
        self.steps += 1
        if self.steps > self.step_budget:
            raise _StepsExceeded()
        if self.covered is not None and stmt.sid is not None:
            self.covered.add(stmt.sid)

    def exec_block(self, body, type_name, scopes, depth) -> None:
        for stmt in body:
            self.exec_stmt(stmt, type_name, scopes, depth)

    def exec_stmt(self, stmt, type_name, scopes, depth) -> None:
        self.note(stmt)
        if isinstance(stmt, ast.LetStmt):
            scopes[-1][stmt.name] = self.eval(stmt.value, type_name, scopes, depth)
        elif isinstance(stmt, ast.AssignStmt):
            value = self.eval(stmt.value, type_name, scopes, depth)
            for scope in reversed(scopes):
                if stmt.name in scope:
                    scope[stmt.name] = value
                    return
            if type_name is not None and stmt.name in self.fields[type_name]:
                self.fields[type_name][stmt.name] = value
                return
            raise _RuntimeErr(f"assignment to undeclared name {stmt.name!r}")
        elif isinstance(stmt, ast.IfStmt):
            if self.eval_cond(stmt.cond, type_name, scopes, depth):
                scopes.append({})
                try:
                    self.exec_block(stmt.then_body, type_name, scopes, depth)
                finally:
                    scopes.pop()
            elif stmt.else_body is not None:
                scopes.append({})
                try:
                    self.exec_block(stmt.else_body, type_name, scopes, depth)
                finally:
                    scopes.pop()
        elif isinstance(stmt, ast.WhileStmt):
            first = True
            while True:
                if not first:
                    self.note(stmt)
                first = False
                if not self.eval_cond(stmt.cond, type_name, scopes, depth):
                    break
                scopes.append({})
                try:
                    self.exec_block(stmt.body, type_name, scopes, depth)
                finally:
                    scopes.pop()
        elif isinstance(stmt, ast.ReturnStmt):
            raise _Return(self.eval(stmt.value, type_name, scopes, depth))
        elif isinstance(stmt, ast.ExprStmt):
            self.eval(stmt.call, type_name, scopes, depth)
        elif isinstance(stmt, AssertStmt):
            if not self.eval_cond(stmt.cond, type_name, scopes, depth):
                raise _AssertFail(f"assert failed: {stmt.cond!r}")
        else:
            raise _RuntimeErr(f"unknown statement {type(stmt).__name__}")

    # -- expressions ----------------------------------------------------------

    def eval_cond(self, expr, type_name, scopes, depth) -> bool:
        value = self.eval(expr, type_name, scopes, depth)
        if not isinstance(value, bool):
            raise _RuntimeErr(f"condition is not bool: {value!r}")
        return value

    def eval(self, expr, type_name, scopes, depth):
        if isinstance(expr, (ast.IntLit, ast.FloatLit, ast.BoolLit, ast.StrLit, ast.CharLit)):
            return expr.value
        if isinstance(expr, ast.Name):
            for scope in reversed(scopes):
                if expr.ident in scope:
                    return scope[expr.ident]
            if type_name is not None and expr.ident in self.fields[type_name]:
                return self.fields[type_name][expr.ident]
            raise _RuntimeErr(f"unresolved name {expr.ident!r}")
        if isinstance(expr, ast.Unary):
            value = self.eval(expr.operand, type_name, scopes, depth)
            if expr.op == "!":
                if not isinstance(value, bool):
                    raise _RuntimeErr("'!' needs a bool")
                return not value
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise _RuntimeErr("unary '-' needs a number")
            return -value
        if isinstance(expr, ast.Binary):
            op = expr.op
            left = self.eval(expr.left, type_name, scopes, depth)
            if op == "&&":
                if not isinstance(left, bool):
                    raise _RuntimeErr("'&&' needs bool operands")
                return left and self.eval_cond(expr.right, type_name, scopes, depth)
            if op == "||":
                if not isinstance(left, bool):
                    raise _RuntimeErr("'||' needs bool operands")
                return left or self.eval_cond(expr.right, type_name, scopes, depth)
            right = self.eval(expr.right, type_name, scopes, depth)
            return _binary(op, left, right)
        if isinstance(expr, ast.Call):
            owner = expr.type_name if expr.type_name is not None else type_name
            if owner is None:
                raise _RuntimeErr(f"call {expr.fn_name!r} has no enclosing type")
            fn = self.fn_index.get((owner, expr.fn_name, len(expr.args)))
            if fn is None:
                raise _RuntimeErr(f"no fn {expr.fn_name!r}/{len(expr.args)} in type {owner!r}")
            args = [self.eval(a, type_name, scopes, depth) for a in expr.args]
            return self.call(owner, fn, args, depth)
        raise _RuntimeErr(f"unknown expression {type(expr).__name__}")

    def call(self, owner: str, fn: ast.FnDecl, args, depth: int):
        if depth >= CALL_DEPTH_LIMIT:
            raise _RuntimeErr(f"call depth exceeded ({CALL_DEPTH_LIMIT})")
        frame = [{p.name: v for p, v in zip(fn.params, args)}, {}]
        try:
            self.exec_block(fn.body, owner, frame, depth + 1)
        except _Return as ret:
            return ret.value
        raise _RuntimeErr(f"fn {fn.name!r} ended without returning")


def _literal(expr: ast.Expr):
    return expr.value


def _binary(op: str, left, right):
    if isinstance(left, bool) != isinstance(right, bool) or (
        not isinstance(left, bool) and type(left) is not type(right)
    ):
        raise _RuntimeErr(f"operand types differ for {op!r}")
    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    if op in ("<", "<=", ">", ">="):
        if isinstance(left, bool):
            raise _RuntimeErr(f"{op!r} cannot compare bool values")
        return {"<": left < right, "<=": left <= right, ">": left > right, ">=": left >= right}[op]
    if isinstance(left, bool):
        raise _RuntimeErr(f"{op!r} needs numeric operands")
    if op == "+":
        if isinstance(left, str):
            return left + right
        return left + right
    if isinstance(left, str):
        raise _RuntimeErr(f"{op!r} not defined on str")
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if right == 0:
            raise _RuntimeErr("division by zero")
        if isinstance(left, int):
            q = abs(left) // abs(right)
            return q if (left < 0) == (right < 0) else -q
        return left / right
    if op == "%":
        if not isinstance(left, int):
            raise _RuntimeErr("'%' needs int operands")
        if right == 0:
            raise _RuntimeErr("modulo by zero")
        return left - _binary("/", left, right) * right
    raise _RuntimeErr(f"unknown operator {op!r}")


def run_tests(
    program: ast.Program,
    suite: TestSuite,
    trace: bool = False,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> CoverageMatrix:
    """Run every test; one outcome per test, coverage sets when ``trace``."""
    interp = Interpreter(program, step_budget)
    return CoverageMatrix([interp.run_test(case, trace) for case in suite.tests])
