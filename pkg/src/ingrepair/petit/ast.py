"""AST node definitions for the Petit mini language.

A program is a set of source files; each file holds top-level ``type``
declarations; a type holds constant fields and ``fn`` declarations. Every
statement carries a stable :class:`StatementId` assigned in preorder over
its enclosing function body, so statements can be addressed across
pretty-print/re-parse round trips.

Source spans are carried for diagnostics only and are excluded from
structural equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

PRIMITIVE_TYPES = ("int", "float", "bool", "str", "char")


@dataclass(frozen=True)
class Span:
    """Line/column of the first token of a node (1-based)."""

    line: int
    col: int


_NOSPAN = Span(0, 0)


@dataclass(frozen=True)
class StatementId:
    """Stable address of a statement: file, type, fn signature, preorder index."""

    path: str
    type_name: str
    fn_sig: str
    index: int

    def __str__(self) -> str:
        return f"{self.path}::{self.type_name}::{self.fn_sig}#{self.index}"


# ---------------------------------------------------------------------------
# Expressions


@dataclass(eq=True)
class Expr:
    pass


@dataclass
class IntLit(Expr):
    value: int
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class FloatLit(Expr):
    value: float
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class BoolLit(Expr):
    value: bool
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class StrLit(Expr):
    value: str
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class CharLit(Expr):
    value: str
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Name(Expr):
    """A variable access (field, parameter, or local)."""

    ident: str
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Unary(Expr):
    op: str  # "!" or "-"
    operand: Expr
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Call(Expr):
    """``f(args)`` (intra-type, type_name None) or ``T.f(args)``."""

    type_name: Optional[str]
    fn_name: str
    args: list[Expr]
    span: Span = field(default=_NOSPAN, compare=False)


# ---------------------------------------------------------------------------
# Statements


@dataclass
class Stmt:
    pass


@dataclass
class LetStmt(Stmt):
    name: str
    decl_type: str
    value: Expr
    sid: Optional[StatementId] = None
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class AssignStmt(Stmt):
    name: str
    value: Expr
    sid: Optional[StatementId] = None
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class IfStmt(Stmt):
    cond: Expr
    then_body: list[Stmt]
    else_body: Optional[list[Stmt]]
    sid: Optional[StatementId] = None
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class WhileStmt(Stmt):
    cond: Expr
    body: list[Stmt]
    sid: Optional[StatementId] = None
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class ReturnStmt(Stmt):
    value: Expr
    sid: Optional[StatementId] = None
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class ExprStmt(Stmt):
    """A call evaluated for effect; the value is discarded."""

    call: Call
    sid: Optional[StatementId] = None
    span: Span = field(default=_NOSPAN, compare=False)


STMT_KINDS = {
    LetStmt: "let",
    AssignStmt: "assign",
    IfStmt: "if",
    WhileStmt: "while",
    ReturnStmt: "return",
    ExprStmt: "expr",
}


def stmt_kind(stmt: Stmt) -> str:
    return STMT_KINDS[type(stmt)]


# ---------------------------------------------------------------------------
# Declarations


@dataclass
class FieldDecl:
    """``let NAME: TYPE = literal;`` at type level."""

    name: str
    decl_type: str
    value: Expr  # literal only
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class Param:
    name: str
    decl_type: str


@dataclass
class FnDecl:
    name: str
    params: list[Param]
    ret_type: str
    body: list[Stmt]
    span: Span = field(default=_NOSPAN, compare=False)

    @property
    def signature(self) -> str:
        args = ",".join(p.decl_type for p in self.params)
        return f"{self.name}({args})->{self.ret_type}"


@dataclass
class TypeDecl:
    name: str
    fields: list[FieldDecl]
    fns: list[FnDecl]
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class File:
    path: str
    types: list[TypeDecl]


@dataclass
class Package:
    """Top-level directory of the file path ("" for files at the root)."""

    name: str
    files: list[File]


@dataclass
class Program:
    files: list[File]

    @property
    def packages(self) -> list[Package]:
        groups: dict[str, list[File]] = {}
        for f in self.files:
            groups.setdefault(package_of(f.path), []).append(f)
        return [Package(name, groups[name]) for name in sorted(groups)]

    def iter_fns(self):
        for f in self.files:
            for t in f.types:
                for fn in t.fns:
                    yield f, t, fn

    def iter_statements(self):
        """All statements in program order, preorder within each fn body."""
        for f, t, fn in self.iter_fns():
            for stmt in iter_block(fn.body):
                yield f, t, fn, stmt

    def find_type(self, name: str) -> Optional[TypeDecl]:
        for f in self.files:
            for t in f.types:
                if t.name == name:
                    return t
        return None

    def statement(self, sid: StatementId) -> Stmt:
        for _f, _t, _fn, stmt in self.iter_statements():
            if stmt.sid == sid:
                return stmt
        raise KeyError(f"unknown statement id: {sid}")


def package_of(path: str) -> str:
    return path.split("/", 1)[0] if "/" in path else ""


def iter_block(body: list[Stmt]):
    """Preorder traversal of a statement list, descending into if/while."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, IfStmt):
            yield from iter_block(stmt.then_body)
            if stmt.else_body is not None:
                yield from iter_block(stmt.else_body)
        elif isinstance(stmt, WhileStmt):
            yield from iter_block(stmt.body)


def assign_statement_ids(program: Program) -> None:
    """Assign preorder StatementIds to every statement of every fn body."""
    for f, t, fn in program.iter_fns():
        for i, stmt in enumerate(iter_block(fn.body)):
            stmt.sid = StatementId(f.path, t.name, fn.signature, i)


Literal = Union[IntLit, FloatLit, BoolLit, StrLit, CharLit]

LITERAL_TYPES = {
    IntLit: "int",
    FloatLit: "float",
    BoolLit: "bool",
    StrLit: "str",
    CharLit: "char",
}
