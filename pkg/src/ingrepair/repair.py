"""The generate-and-validate repair core.

For each suspicious statement (visited in descending suspiciousness,
cycling while budget remains) the trial draws a repair operator uniformly
at random, requests the next ingredient from the point's search state,
resolves its variable accesses against the point's context, skips
modification instances already attempted, applies the edit, "compiles"
the variant (re-parse plus full name/type resolution; Petit has no
bytecode stage), and validates it against the whole test suite. A variant
passing every test is recorded as a test-adequate patch and the search
continues until the attempt budget is spent or the fix space is
exhausted.

Search strategies: ``baseline`` draws uniformly without replacement;
``ed``/``td`` dequeue a FIFO queue holding the statements of fragments
sorted by executable-/type-level similarity to the point's enclosing
fragment (own fragment first, then ascending distance, each fragment's
statements in textual order); ``re``/``ee``/``te`` are baseline/ed/td
with the embeddings-based variable resolution that can transform
ingredients. Every operator keeps its own without-replacement stream per
point, so the instance space is exhausted deterministically and a trial
on a small pool terminates by exhaustion rather than by budget.
"""

from __future__ import annotations

import copy
import difflib
import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .codesim import SimilarityTable
from .embed import Dictionary
from .faultloc import SuspiciousList, localize
from .lexclust import ClusterMap, same_cluster
from .petit import (
    AssertStmt,
    PetitSyntaxError,
    TestSuite,
    free_accesses,
    parse,
    render,
    run_tests,
    scope_at,
    stmt_text,
    typecheck,
)
from .petit import ast
from .petit.interp import DEFAULT_STEP_BUDGET
from .rae import EncoderParams

INSERT_BEFORE = "insert_before"
INSERT_AFTER = "insert_after"
REPLACE = "replace"
OPERATORS = (INSERT_BEFORE, INSERT_AFTER, REPLACE)

BASELINE = "baseline"
STRATEGIES = (BASELINE, "ed", "td", "re", "ee", "te")
SCOPES = ("local", "package", "global")

#: strategies that sort the fix space, by similarity-table granularity
_SORTED_GRANULARITY = {"ed": "executable", "ee": "executable", "td": "type", "te": "type"}
#: strategies that enable the embeddings-based variable resolution
_EMBEDDINGS_RESOLUTION = frozenset({"re", "ee", "te"})


class NothingToRepairError(Exception):
    """Raised when the suite has no failing test."""


@dataclass(frozen=True)
class Ingredient:
    """A statement reused to craft a patch.

    ``text`` is the canonical token rendering and doubles as the
    structural identity; ``accesses`` lists the free variable accesses
    with their declared types at the source location.
    """

    text: str
    kind: str
    source_sid: ast.StatementId
    accesses: tuple[tuple[str, str], ...]
    stmt: ast.Stmt = field(compare=False, repr=False)


@dataclass
class IngredientPool:
    scope: str
    ingredients: list[Ingredient]  # program textual order
    by_exec: dict[str, list[int]] = field(default_factory=dict, repr=False)
    by_type: dict[str, list[int]] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.ingredients)


@dataclass(frozen=True)
class TrialConfig:
    strategy: str = BASELINE
    scope: str = "local"
    seed: int = 1
    budget: int = 10_000
    operators: tuple[str, ...] = OPERATORS
    threshold: float = 0.1
    cap: int = 1000
    step_budget: int = DEFAULT_STEP_BUDGET
    instrument: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.scope not in SCOPES:
            raise ValueError(f"unknown scope {self.scope!r}")

    @property
    def sorted_granularity(self) -> Optional[str]:
        return _SORTED_GRANULARITY.get(self.strategy)

    @property
    def embeddings_resolution(self) -> bool:
        return self.strategy in _EMBEDDINGS_RESOLUTION


@dataclass
class Learned:
    """Cached per-revision learning artifacts consumed by the repair loop."""

    exec_table: Optional[SimilarityTable] = None
    type_table: Optional[SimilarityTable] = None
    clusters: Optional[ClusterMap] = None
    dictionary: Optional[Dictionary] = None  # fine-tuned term table
    params: Optional[EncoderParams] = None
    word2vec: Optional[Dictionary] = None  # pre-tuning skip-gram table


@dataclass
class Resolution:
    ingredient: Ingredient
    transformed: bool
    substitutions: dict[str, str]


@dataclass
class Patch:
    operator: str
    point: str
    ingredient_text: str
    source_key: str
    transformed: bool
    substitutions: dict[str, str]
    diff: str
    attempts_before: int

    @property
    def identity(self) -> tuple[str, str, str]:
        """Structural patch identity: same edit at the same place."""
        return (self.operator, self.point, self.ingredient_text)


@dataclass
class TrialReport:
    strategy: str
    scope: str
    seed: int
    budget: int
    attempts: int
    compilable_attempts: int
    validations: int
    patches: list[Patch]
    attempts_first_patch: Optional[int]
    attempts_first_compilable: Optional[int]
    exhausted: bool
    wall_time: float
    per_point_attempts: dict[str, int]
    validation_log: Optional[list[tuple[str, str, str]]] = None

    @property
    def patch_count(self) -> int:
        return len(self.patches)


# ---------------------------------------------------------------------------
# ingredients and pools


def make_ingredient(program: ast.Program, stmt: ast.Stmt) -> Ingredient:
    """Package a program statement as a reusable ingredient."""
    from .corpus import element_yield

    context = scope_at(program, stmt.sid)
    accesses = tuple(free_accesses(stmt, context))
    return Ingredient(
        text=" ".join(element_yield(stmt_text(stmt))),
        kind=ast.stmt_kind(stmt),
        source_sid=stmt.sid,
        accesses=accesses,
        stmt=stmt,
    )


def _exec_key(sid: ast.StatementId) -> str:
    return f"{sid.path}::{sid.type_name}::{sid.fn_sig}"


def _type_key(sid: ast.StatementId) -> str:
    return f"{sid.path}::{sid.type_name}"


def build_pool(program: ast.Program, suspicious: SuspiciousList, scope: str) -> IngredientPool:
    """Collect the scope's statements as the trial's fix space.

    local: types containing at least one suspicious statement; package:
    every type in the packages of those types; global: every type of the
    application. Test files never contribute (the pool is application
    code by construction). Deterministic in (program, suspicious, scope).
    """
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    suspicious_types = {(sid.path, sid.type_name) for sid in suspicious.statements}
    suspicious_packages = {ast.package_of(path) for path, _t in suspicious_types}

    def in_scope(path: str, type_name: str) -> bool:
        if scope == "global":
            return True
        if scope == "package":
            return ast.package_of(path) in suspicious_packages
        return (path, type_name) in suspicious_types

    ingredients: list[Ingredient] = []
    by_exec: dict[str, list[int]] = {}
    by_type: dict[str, list[int]] = {}
    for f, t, fn in program.iter_fns():
        if not in_scope(f.path, t.name):
            continue
        for stmt in ast.iter_block(fn.body):
            idx = len(ingredients)
            ingredients.append(make_ingredient(program, stmt))
            by_exec.setdefault(_exec_key(stmt.sid), []).append(idx)
            by_type.setdefault(_type_key(stmt.sid), []).append(idx)
    return IngredientPool(scope, ingredients, by_exec, by_type)


# ---------------------------------------------------------------------------
# ingredient search state


class StrategyState:
    """Per-trial ordering state: one without-replacement ingredient stream
    per (modification point, operator)."""

    def __init__(
        self,
        pool: IngredientPool,
        config: TrialConfig,
        learned: Learned,
        rng: random.Random,
    ):
        self.pool = pool
        self.config = config
        self.learned = learned
        self.rng = rng
        self.attempts = 0
        self._queues: dict[str, dict[str, deque[int]]] = {}

    def _sorted_order(self, point: ast.StatementId) -> list[int]:
        granularity = self.config.sorted_granularity
        if granularity == "executable":
            table = self.learned.exec_table
            own = _exec_key(point)
            by_key = self.pool.by_exec
        else:
            table = self.learned.type_table
            own = _type_key(point)
            by_key = self.pool.by_type
        if table is None:
            raise ValueError(f"strategy {self.config.strategy!r} needs a {granularity}-level similarity table")
        order: list[int] = []
        for key in [own] + table.neighbors(own):
            order.extend(by_key.get(key, []))
        return order

    def _ensure(self, point: ast.StatementId) -> dict[str, deque[int]]:
        key = str(point)
        if key not in self._queues:
            base = self._sorted_order(point) if self.config.sorted_granularity else None
            queues = {}
            for op in self.config.operators:
                if base is None:
                    order = list(range(len(self.pool.ingredients)))
                    self.rng.shuffle(order)
                else:
                    order = list(base)
                queues[op] = deque(order)
            self._queues[key] = queues
        return self._queues[key]

    def available_operators(self, point: ast.StatementId) -> list[str]:
        queues = self._ensure(point)
        return [op for op in self.config.operators if queues[op]]

    def point_exhausted(self, point: ast.StatementId) -> bool:
        return not self.available_operators(point)

    def next_ingredient(self, point: ast.StatementId, op: str) -> Ingredient:
        """One request to the fix space (this is what the attempt metric
        counts); raises IndexError when the stream for ``op`` is spent."""
        queues = self._ensure(point)
        idx = queues[op].popleft()
        self.attempts += 1
        return self.pool.ingredients[idx]


def next_ingredient(state: StrategyState, point: ast.StatementId, op: str) -> Ingredient:
    return state.next_ingredient(point, op)


# ---------------------------------------------------------------------------
# variable resolution


def resolve_default(ingredient: Ingredient, context: dict[str, str]) -> Optional[Resolution]:
    """Accept iff every (name, type) access matches the context exactly;
    the ingredient is never changed."""
    for name, decl_type in ingredient.accesses:
        if decl_type is None or context.get(name) != decl_type:
            return None
    return Resolution(ingredient, transformed=False, substitutions={})


def resolve_embeddings(
    ingredient: Ingredient,
    context: dict[str, str],
    clusters: ClusterMap,
    dictionary: Dictionary,
) -> Optional[Resolution]:
    """Default resolution extended with ingredient transformation.

    Accesses that match the context are kept. For each unmatched access,
    the candidates are the context names in the access's embedding
    cluster with the identical declared type, sorted by embedding
    distance; the nearest one replaces every free occurrence of the
    access. If any unmatched access has no candidate the ingredient is
    rejected. An accepted result always passes the default resolution.
    """
    substitutions: dict[str, str] = {}
    for name, decl_type in ingredient.accesses:
        if decl_type is not None and context.get(name) == decl_type:
            continue
        if decl_type is None or name not in clusters or name not in dictionary:
            return None
        target = dictionary.vector(name)
        candidates = []
        for cand, cand_type in context.items():
            if cand == name or cand_type != decl_type:
                continue
            if cand not in clusters or cand not in dictionary:
                continue
            if not same_cluster(clusters, name, cand):
                continue
            delta = dictionary.vector(cand) - target
            candidates.append((float(np.sqrt(delta @ delta)), cand))
        if not candidates:
            return None
        candidates.sort(key=lambda pair: (pair[0], pair[1]))
        substitutions[name] = candidates[0][1]
    if not substitutions:
        return Resolution(ingredient, transformed=False, substitutions={})
    new_stmt = substitute_free(ingredient.stmt, substitutions)
    from .corpus import element_yield

    transformed = Ingredient(
        text=" ".join(element_yield(stmt_text(new_stmt))),
        kind=ingredient.kind,
        source_sid=ingredient.source_sid,
        accesses=tuple(free_accesses(new_stmt, context)),
        stmt=new_stmt,
    )
    if resolve_default(transformed, context) is None:
        return None
    return Resolution(transformed, transformed=True, substitutions=substitutions)


def substitute_free(stmt: ast.Stmt, mapping: dict[str, str]) -> ast.Stmt:
    """Rename the free occurrences of the mapped names (bound occurrences,
    e.g. under an inner ``let`` of the same name, are untouched)."""
    new_stmt = copy.deepcopy(stmt)
    new_stmt.sid = None

    def visit_expr(expr: ast.Expr, bound: set[str]) -> None:
        if isinstance(expr, ast.Name):
            if expr.ident in mapping and expr.ident not in bound:
                expr.ident = mapping[expr.ident]
        elif isinstance(expr, ast.Unary):
            visit_expr(expr.operand, bound)
        elif isinstance(expr, ast.Binary):
            visit_expr(expr.left, bound)
            visit_expr(expr.right, bound)
        elif isinstance(expr, ast.Call):
            for arg in expr.args:
                visit_expr(arg, bound)

    def visit_block(body, bound: set[str]) -> None:
        inner = set(bound)
        for s in body:
            visit_stmt(s, inner)

    def visit_stmt(s: ast.Stmt, bound: set[str]) -> None:
        if isinstance(s, ast.LetStmt):
            visit_expr(s.value, bound)
            bound.add(s.name)
        elif isinstance(s, ast.AssignStmt):
            if s.name in mapping and s.name not in bound:
                s.name = mapping[s.name]
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

    visit_stmt(new_stmt, set())
    return new_stmt


# ---------------------------------------------------------------------------
# operators


def _locate(program: ast.Program, sid: ast.StatementId):
    """The statement list containing ``sid`` and its position in it."""

    def search(body):
        for i, stmt in enumerate(body):
            if stmt.sid == sid:
                return body, i
            if isinstance(stmt, ast.IfStmt):
                found = search(stmt.then_body)
                if found:
                    return found
                if stmt.else_body is not None:
                    found = search(stmt.else_body)
                    if found:
                        return found
            elif isinstance(stmt, ast.WhileStmt):
                found = search(stmt.body)
                if found:
                    return found
        return None

    for f, t, fn in program.iter_fns():
        if f.path == sid.path and t.name == sid.type_name and fn.signature == sid.fn_sig:
            found = search(fn.body)
            if found:
                return found
    raise KeyError(f"unknown statement id: {sid}")


def apply_operator(
    program: ast.Program,
    point: ast.StatementId,
    op: str,
    ingredient: Ingredient,
) -> Optional[ast.Program]:
    """Splice the ingredient at the modification point on a copy of the
    program. Replace requires the same statement kind; a mismatch skips
    the instance (returns None) without exhausting the point."""
    if op not in OPERATORS:
        raise ValueError(f"unknown operator {op!r}")
    if op == REPLACE:
        target = program.statement(point)
        if ast.stmt_kind(target) != ingredient.kind:
            return None
    variant = copy.deepcopy(program)
    body, index = _locate(variant, point)
    spliced = copy.deepcopy(ingredient.stmt)
    if op == INSERT_BEFORE:
        body.insert(index, spliced)
    elif op == INSERT_AFTER:
        body.insert(index + 1, spliced)
    else:
        body[index] = spliced
    ast.assign_statement_ids(variant)
    return variant


def render_diff(base_render: dict[str, str], variant_render: dict[str, str]) -> str:
    """Unified diff over every changed file."""
    chunks = []
    for path in sorted(base_render):
        before = base_render[path]
        after = variant_render.get(path, "")
        if before == after:
            continue
        chunks.extend(
            difflib.unified_diff(
                before.splitlines(keepends=True),
                after.splitlines(keepends=True),
                fromfile=f"a/{path}",
                tofile=f"b/{path}",
            )
        )
    return "".join(chunks)


# ---------------------------------------------------------------------------
# the trial loop


def run_trial(
    program: ast.Program,
    suite: TestSuite,
    learned: Learned,
    config: TrialConfig,
) -> TrialReport:
    """One seeded repair trial; fully deterministic in its inputs."""
    start = time.perf_counter()
    coverage = run_tests(program, suite, trace=True, step_budget=config.step_budget)
    if not coverage.failing():
        raise NothingToRepairError("all tests pass; nothing to repair")
    suspicious = localize(coverage, config.threshold, config.cap)
    pool = build_pool(program, suspicious, config.scope)
    rng = random.Random(config.seed)
    state = StrategyState(pool, config, learned, rng)
    base_render = render(program)
    contexts = {sid: scope_at(program, sid) for sid in suspicious.statements}

    cache: set[tuple[str, str, str]] = set()
    patches: list[Patch] = []
    compilable_attempts = 0
    validations = 0
    attempts_first_patch: Optional[int] = None
    attempts_first_compilable: Optional[int] = None
    per_point: dict[str, int] = {}
    validation_log: Optional[list[tuple[str, str, str]]] = [] if config.instrument else None

    progressed = True
    while state.attempts < config.budget and progressed:
        progressed = False
        for point in suspicious.statements:
            if state.attempts >= config.budget:
                break
            available = state.available_operators(point)
            if not available:
                continue
            op = rng.choice(available)
            ingredient = state.next_ingredient(point, op)
            progressed = True
            per_point[str(point)] = per_point.get(str(point), 0) + 1
            context = contexts[point]
            if config.embeddings_resolution:
                if learned.clusters is None or learned.dictionary is None:
                    raise ValueError(f"strategy {config.strategy!r} needs clusters and a dictionary")
                resolution = resolve_embeddings(ingredient, context, learned.clusters, learned.dictionary)
            else:
                resolution = resolve_default(ingredient, context)
            if resolution is None:
                continue
            compilable_attempts += 1
            if attempts_first_compilable is None:
                attempts_first_compilable = state.attempts
            instance = (str(point), op, resolution.ingredient.text)
            if instance in cache:
                continue
            cache.add(instance)
            variant_ast = apply_operator(program, point, op, resolution.ingredient)
            if variant_ast is None:
                continue  # replace-kind mismatch
            variant_render = render(variant_ast)
            try:
                variant = parse(variant_render)
            except PetitSyntaxError:
                continue
            if typecheck(variant):
                continue  # does not compile at the modification point
            validations += 1
            if validation_log is not None:
                validation_log.append(instance)
            result = run_tests(variant, suite, trace=False, step_budget=config.step_budget)
            if result.all_pass():
                patches.append(
                    Patch(
                        operator=op,
                        point=str(point),
                        ingredient_text=resolution.ingredient.text,
                        source_key=str(resolution.ingredient.source_sid),
                        transformed=resolution.transformed,
                        substitutions=dict(resolution.substitutions),
                        diff=render_diff(base_render, variant_render),
                        attempts_before=state.attempts,
                    )
                )
                if attempts_first_patch is None:
                    attempts_first_patch = state.attempts

    exhausted = all(state.point_exhausted(point) for point in suspicious.statements)
    return TrialReport(
        strategy=config.strategy,
        scope=config.scope,
        seed=config.seed,
        budget=config.budget,
        attempts=state.attempts,
        compilable_attempts=compilable_attempts,
        validations=validations,
        patches=patches,
        attempts_first_patch=attempts_first_patch,
        attempts_first_compilable=attempts_first_compilable,
        exhausted=exhausted,
        wall_time=time.perf_counter() - start,
        per_point_attempts=per_point,
        validation_log=validation_log,
    )
