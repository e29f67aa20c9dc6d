"""Frontend for the Petit mini language: parser, static checks, scope
analysis, interpreter with coverage tracing, and a canonical renderer."""

from . import ast
from .check import Diagnostic, VariableContext, free_accesses, scope_at, typecheck
from .interp import (
    DEFAULT_STEP_BUDGET,
    CoverageMatrix,
    TestResult,
    run_tests,
)
from .lexer import PetitSyntaxError, tokenize
from .parser import AssertStmt, TestCase, TestSuite, parse, parse_tests
from .render import expr_text, render, stmt_text

__all__ = [
    "AssertStmt",
    "CoverageMatrix",
    "DEFAULT_STEP_BUDGET",
    "Diagnostic",
    "PetitSyntaxError",
    "TestCase",
    "TestResult",
    "TestSuite",
    "VariableContext",
    "ast",
    "expr_text",
    "free_accesses",
    "parse",
    "parse_tests",
    "render",
    "run_tests",
    "scope_at",
    "stmt_text",
    "tokenize",
    "typecheck",
]
