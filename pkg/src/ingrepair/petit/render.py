"""Canonical pretty-printer for Petit programs.

``parse(render(p))`` is structurally equal to ``p``; rendering is the
single source of truth for an element's terminal yield (the corpus module
lexes rendered text to obtain token lines).
"""

from __future__ import annotations

import math

from . import ast
from .lexer import escape
from .parser import AssertStmt

_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
_UNARY_PREC = 7
_PRIMARY_PREC = 9


def literal_text(expr: ast.Expr) -> str:
    if isinstance(expr, ast.IntLit):
        return str(expr.value)
    if isinstance(expr, ast.FloatLit):
        if not math.isfinite(expr.value):
            raise ValueError("non-finite float literal cannot be rendered")
        return repr(expr.value)
    if isinstance(expr, ast.BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, ast.StrLit):
        return '"' + escape(expr.value, '"') + '"'
    if isinstance(expr, ast.CharLit):
        return "'" + escape(expr.value, "'") + "'"
    raise TypeError(f"not a literal: {expr!r}")


def expr_text(expr: ast.Expr, parent_prec: int = 0) -> str:
    if isinstance(expr, ast.Name):
        return expr.ident
    if isinstance(expr, ast.Call):
        args = ", ".join(expr_text(a) for a in expr.args)
        callee = expr.fn_name if expr.type_name is None else f"{expr.type_name}.{expr.fn_name}"
        return f"{callee}({args})"
    if isinstance(expr, ast.Unary):
        return expr.op + expr_text(expr.operand, _PRIMARY_PREC - 1)
    if isinstance(expr, ast.Binary):
        prec = _PREC[expr.op]
        text = f"{expr_text(expr.left, prec)} {expr.op} {expr_text(expr.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    return literal_text(expr)


def stmt_lines(stmt: ast.Stmt, indent: int = 0) -> list[str]:
    pad = "    " * indent
    if isinstance(stmt, ast.LetStmt):
        return [f"{pad}let {stmt.name}: {stmt.decl_type} = {expr_text(stmt.value)};"]
    if isinstance(stmt, ast.AssignStmt):
        return [f"{pad}{stmt.name} = {expr_text(stmt.value)};"]
    if isinstance(stmt, ast.ReturnStmt):
        return [f"{pad}return {expr_text(stmt.value)};"]
    if isinstance(stmt, ast.ExprStmt):
        return [f"{pad}{expr_text(stmt.call)};"]
    if isinstance(stmt, AssertStmt):
        return [f"{pad}assert({expr_text(stmt.cond)});"]
    if isinstance(stmt, ast.WhileStmt):
        lines = [f"{pad}while ({expr_text(stmt.cond)}) {{"]
        for s in stmt.body:
            lines.extend(stmt_lines(s, indent + 1))
        lines.append(pad + "}")
        return lines
    if isinstance(stmt, ast.IfStmt):
        lines = [f"{pad}if ({expr_text(stmt.cond)}) {{"]
        for s in stmt.then_body:
            lines.extend(stmt_lines(s, indent + 1))
        if stmt.else_body is None:
            lines.append(pad + "}")
        else:
            lines.append(pad + "} else {")
            for s in stmt.else_body:
                lines.extend(stmt_lines(s, indent + 1))
            lines.append(pad + "}")
        return lines
    raise TypeError(f"unknown statement: {stmt!r}")


def stmt_text(stmt: ast.Stmt, indent: int = 0) -> str:
    return "\n".join(stmt_lines(stmt, indent))


def fn_lines(fn: ast.FnDecl, indent: int = 0) -> list[str]:
    pad = "    " * indent
    params = ", ".join(f"{p.name}: {p.decl_type}" for p in fn.params)
    lines = [f"{pad}fn {fn.name}({params}) -> {fn.ret_type} {{"]
    for s in fn.body:
        lines.extend(stmt_lines(s, indent + 1))
    lines.append(pad + "}")
    return lines


def type_lines(decl: ast.TypeDecl) -> list[str]:
    lines = [f"type {decl.name} {{"]
    for fld in decl.fields:
        lines.append(f"    let {fld.name}: {fld.decl_type} = {literal_text(fld.value)};")
    for fn in decl.fns:
        lines.extend(fn_lines(fn, 1))
    lines.append("}")
    return lines


def file_text(f: ast.File) -> str:
    chunks = ["\n".join(type_lines(t)) for t in f.types]
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def render(program: ast.Program) -> dict[str, str]:
    """Render a program back to a path → text map (canonical formatting)."""
    return {f.path: file_text(f) for f in program.files}


def suite_text(tests) -> str:
    chunks = []
    for case in tests.tests:
        lines = [f"test {case.name} {{"]
        for s in case.body:
            lines.extend(stmt_lines(s, 1))
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
