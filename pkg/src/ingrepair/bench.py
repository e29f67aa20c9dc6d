"""Reproducible bug seeding and strategy-comparison campaigns.

Bugs are single-edit mutants of an all-passing base program
(wrong-variable, wrong-operator, wrong-constant, deleted-guard); each
must parse, typecheck, and fail at least one test, and the original
program restores an all-pass run. A campaign runs the full factorial of
bugs x strategies x scopes x seeds, re-learning the similarity artifacts
per buggy revision, and writes deterministic CSV summaries plus the
paper-style statistical comparisons against the baseline strategy.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from . import stats
from .pipeline import TrainSettings, build_learned
from .petit import ast, render, run_tests, scope_at, stmt_text, typecheck
from .petit.interp import DEFAULT_STEP_BUDGET
from .petit.parser import TestSuite
from .repair import (
    OPERATORS,
    SCOPES,
    STRATEGIES,
    Learned,
    TrialConfig,
    TrialReport,
    run_trial,
)

WRONG_VARIABLE = "wrong-variable"
WRONG_OPERATOR = "wrong-operator"
WRONG_CONSTANT = "wrong-constant"
DELETED_GUARD = "deleted-guard"
MUTATION_KINDS = (WRONG_VARIABLE, WRONG_OPERATOR, WRONG_CONSTANT, DELETED_GUARD)

_OP_GROUPS = (
    ["+", "-", "*", "/", "%"],
    ["<", "<=", ">", ">="],
    ["==", "!="],
    ["&&", "||"],
)


@dataclass(frozen=True)
class MutationDescriptor:
    kind: str
    sid: str
    before: str
    after: str


@dataclass
class SeededBug:
    bug_id: str
    program: ast.Program
    descriptor: MutationDescriptor
    failing_tests: list[str]


class SeedingError(Exception):
    pass


# ---------------------------------------------------------------------------
# candidate enumeration


def _stmt_exprs(stmt: ast.Stmt):
    """Top-level expressions of a statement (not descending into nested
    statements, which are sites of their own)."""
    if isinstance(stmt, (ast.LetStmt, ast.AssignStmt, ast.ReturnStmt)):
        yield stmt.value
    elif isinstance(stmt, (ast.IfStmt, ast.WhileStmt)):
        yield stmt.cond
    elif isinstance(stmt, ast.ExprStmt):
        yield stmt.call


def _expr_preorder(expr: ast.Expr):
    yield expr
    if isinstance(expr, ast.Unary):
        yield from _expr_preorder(expr.operand)
    elif isinstance(expr, ast.Binary):
        yield from _expr_preorder(expr.left)
        yield from _expr_preorder(expr.right)
    elif isinstance(expr, ast.Call):
        for arg in expr.args:
            yield from _expr_preorder(arg)


def _stmt_expr_nodes(stmt: ast.Stmt):
    for top in _stmt_exprs(stmt):
        yield from _expr_preorder(top)


def _enumerate_candidates(program: ast.Program, kinds) -> list[tuple]:
    """Deterministic list of (kind, sid, node_index, payload) proposals."""
    candidates: list[tuple] = []
    for _f, _t, _fn, stmt in program.iter_statements():
        context = scope_at(program, stmt.sid)
        for node_index, node in enumerate(_stmt_expr_nodes(stmt)):
            if WRONG_VARIABLE in kinds and isinstance(node, ast.Name) and node.ident in context:
                decl_type = context[node.ident]
                for cand in sorted(context):
                    if cand != node.ident and context[cand] == decl_type:
                        candidates.append((WRONG_VARIABLE, stmt.sid, node_index, cand))
            elif WRONG_OPERATOR in kinds and isinstance(node, ast.Binary):
                for group in _OP_GROUPS:
                    if node.op in group:
                        for alt in group:
                            if alt != node.op:
                                candidates.append((WRONG_OPERATOR, stmt.sid, node_index, alt))
            elif WRONG_CONSTANT in kinds and type(node) in ast.LITERAL_TYPES:
                candidates.append((WRONG_CONSTANT, stmt.sid, node_index, None))
        if DELETED_GUARD in kinds and isinstance(stmt, ast.IfStmt) and stmt.else_body is None and stmt.then_body:
            candidates.append((DELETED_GUARD, stmt.sid, -1, None))
    return candidates


def _mutate_literal(node: ast.Expr) -> None:
    if isinstance(node, ast.IntLit):
        node.value = node.value + 1
    elif isinstance(node, ast.FloatLit):
        node.value = 2.0 * node.value + 1.0
    elif isinstance(node, ast.BoolLit):
        node.value = not node.value
    elif isinstance(node, ast.StrLit):
        node.value = node.value + "x"
    elif isinstance(node, ast.CharLit):
        node.value = "a" if node.value != "a" else "b"


def _apply_candidate(program: ast.Program, candidate: tuple) -> tuple[ast.Program, MutationDescriptor]:
    kind, sid, node_index, payload = candidate
    mutant = copy.deepcopy(program)
    stmt = mutant.statement(sid)
    before = stmt_text(stmt)
    if kind == DELETED_GUARD:
        from .repair import _locate

        body, index = _locate(mutant, sid)
        hoisted = stmt.then_body
        body[index : index + 1] = hoisted
        after = "\n".join(stmt_text(s) for s in hoisted)
    else:
        node = None
        for i, candidate_node in enumerate(_stmt_expr_nodes(stmt)):
            if i == node_index:
                node = candidate_node
                break
        if node is None:
            raise SeedingError(f"stale mutation site {candidate}")
        if kind == WRONG_VARIABLE:
            node.ident = payload
        elif kind == WRONG_OPERATOR:
            node.op = payload
        else:
            _mutate_literal(node)
        after = stmt_text(stmt)
    ast.assign_statement_ids(mutant)
    return mutant, MutationDescriptor(kind, str(sid), before, after)


def seed_bugs(
    program: ast.Program,
    suite: TestSuite,
    seed: int,
    n: int,
    kinds=MUTATION_KINDS,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> list[SeededBug]:
    """Deterministically draw ``n`` distinct single-edit bugs.

    Every returned mutant parses, typechecks, and fails at least one test
    of the (all-passing) base suite; no-op proposals and duplicate
    mutants are rejected.
    """
    base_coverage = run_tests(program, suite, step_budget=step_budget)
    if not base_coverage.all_pass():
        raise SeedingError("base program must pass its whole suite before seeding")
    base_render = render(program)
    candidates = _enumerate_candidates(program, kinds)
    rng = random.Random(seed)
    order = list(range(len(candidates)))
    rng.shuffle(order)
    bugs: list[SeededBug] = []
    seen_renders = {tuple(sorted(base_render.items()))}
    for position in order:
        if len(bugs) >= n:
            break
        mutant, descriptor = _apply_candidate(program, candidates[position])
        mutant_render = render(mutant)
        render_key = tuple(sorted(mutant_render.items()))
        if render_key in seen_renders:
            continue  # no-op or duplicate mutant
        if typecheck(mutant, suite):
            continue
        coverage = run_tests(mutant, suite, step_budget=step_budget)
        failing = [r.name for r in coverage.failing()]
        if not failing:
            continue
        seen_renders.add(render_key)
        bugs.append(SeededBug(f"bug{len(bugs) + 1:03d}", mutant, descriptor, failing))
    if len(bugs) < n:
        raise SeedingError(
            f"could not find {n} valid mutants within the proposal budget ({len(candidates)} candidates)"
        )
    return bugs


# ---------------------------------------------------------------------------
# campaigns


@dataclass(frozen=True)
class CampaignConfig:
    strategies: tuple[str, ...] = STRATEGIES
    scopes: tuple[str, ...] = ("local",)
    seeds: tuple[int, ...] = (1, 2, 3)
    budget: int = 10_000
    threshold: float = 0.1
    cap: int = 1000
    step_budget: int = DEFAULT_STEP_BUDGET
    operators: tuple[str, ...] = OPERATORS
    train: TrainSettings = TrainSettings()
    jobs: int = 1

    def __post_init__(self):
        for strategy in self.strategies:
            if strategy not in STRATEGIES:
                raise ValueError(f"unknown strategy {strategy!r}")
        for scope in self.scopes:
            if scope not in SCOPES:
                raise ValueError(f"unknown scope {scope!r}")


@dataclass
class TrialRecord:
    bug_id: str
    strategy: str
    scope: str
    seed: int
    report: TrialReport


@dataclass
class CampaignResult:
    records: list[TrialRecord]
    bugs: list[SeededBug] = field(default_factory=list)

    def select(self, bug_id=None, strategy=None, scope=None) -> list[TrialRecord]:
        out = []
        for r in self.records:
            if bug_id is not None and r.bug_id != bug_id:
                continue
            if strategy is not None and r.strategy != strategy:
                continue
            if scope is not None and r.scope != scope:
                continue
            out.append(r)
        return out

    def patch_identities(self, bug_id: str, strategies) -> set[tuple[str, str, str]]:
        out = set()
        for r in self.records:
            if r.bug_id == bug_id and r.strategy in strategies:
                out.update(p.identity for p in r.report.patches)
        return out


def _trial_args(program, suite, learned, config: CampaignConfig):
    for strategy in config.strategies:
        for scope in config.scopes:
            for seed in config.seeds:
                yield (
                    program,
                    suite,
                    learned,
                    TrialConfig(
                        strategy=strategy,
                        scope=scope,
                        seed=seed,
                        budget=config.budget,
                        operators=config.operators,
                        threshold=config.threshold,
                        cap=config.cap,
                        step_budget=config.step_budget,
                    ),
                )


def _run_one(args) -> TrialReport:
    program, suite, learned, trial_config = args
    return run_trial(program, suite, learned, trial_config)


def run_campaign(
    bugs: list[SeededBug],
    suite: TestSuite,
    config: CampaignConfig | None = None,
    **overrides,
) -> CampaignResult:
    """Full factorial bugs x strategies x scopes x seeds.

    Learning artifacts are rebuilt per buggy revision and shared by that
    bug's trials; trials may run in parallel (``jobs``) and results are
    folded in fixed (bug, strategy, scope, seed) order either way.
    """
    config = replace(config or CampaignConfig(), **overrides)
    records: list[TrialRecord] = []
    for bug in bugs:
        learned = build_learned(bug.program, config.train)
        args = list(_trial_args(bug.program, suite, learned, config))
        if config.jobs > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                reports = list(pool.map(_run_one, args))
        else:
            reports = [_run_one(a) for a in args]
        for (_prog, _suite, _learned, trial_config), report in zip(args, reports):
            records.append(
                TrialRecord(bug.bug_id, trial_config.strategy, trial_config.scope, trial_config.seed, report)
            )
    return CampaignResult(records, list(bugs))


# ---------------------------------------------------------------------------
# set-difference metric


def patch_set_difference(deeprepair: set, baseline: set) -> tuple[int, int, int, float]:
    """|D|, |B|, |D\\B| and the ratio |D\\B| / |D| (0 when D is empty)."""
    d_minus_b = deeprepair - baseline
    ratio = len(d_minus_b) / len(deeprepair) if deeprepair else 0.0
    return len(deeprepair), len(baseline), len(d_minus_b), ratio


# ---------------------------------------------------------------------------
# CSV outputs (deterministic; no timestamps)


def write_campaign_csv(result: CampaignResult, path: Path) -> None:
    lines = ["bug,strategy,scope,seed,attempts,compilable_attempts,patches,attempts_first_patch"]
    for r in result.records:
        first = "" if r.report.attempts_first_patch is None else str(r.report.attempts_first_patch)
        lines.append(
            f"{r.bug_id},{r.strategy},{r.scope},{r.seed},"
            f"{r.report.attempts},{r.report.compilable_attempts},{r.report.patch_count},{first}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fmt(x: Optional[float]) -> str:
    return "nan" if x is None else f"{x:.9g}"


def write_stats_csv(result: CampaignResult, path: Path, baseline: str = "baseline") -> None:
    """Per-comparison rows: Wilcoxon on per-bug patch counts (paired per
    bug, seeds summed) and Mann-Whitney on attempts-to-first-patch, each
    treatment strategy versus the baseline at each scope, Bonferroni
    corrected within each metric family."""
    bug_ids = sorted({r.bug_id for r in result.records})
    strategies = [s for s in dict.fromkeys(r.strategy for r in result.records) if s != baseline]
    scopes = list(dict.fromkeys(r.scope for r in result.records))

    def patch_counts(strategy: str, scope: str) -> list[int]:
        return [
            sum(r.report.patch_count for r in result.select(bug, strategy, scope)) for bug in bug_ids
        ]

    def attempt_samples(strategy: str, scope: str) -> list[int]:
        return [
            r.report.attempts_first_patch
            for r in result.records
            if r.strategy == strategy and r.scope == scope and r.report.attempts_first_patch is not None
        ]

    rows: list[tuple] = []  # (metric, strategy, scope, test, stat, p)
    for strategy in strategies:
        for scope in scopes:
            treatment = patch_counts(strategy, scope)
            base = patch_counts(baseline, scope)
            res = stats.wilcoxon_signed_rank(treatment, base)
            rows.append(("patches", strategy, scope, "wilcoxon", res.w, res.p))
    for strategy in strategies:
        for scope in scopes:
            treatment = attempt_samples(strategy, scope)
            base = attempt_samples(baseline, scope)
            if treatment and base:
                res = stats.mann_whitney_u(treatment, base)
                rows.append(("attempts", strategy, scope, "mann_whitney", res.u, res.p))
            else:
                rows.append(("attempts", strategy, scope, "mann_whitney", None, None))
    m_by_metric = {"patches": 0, "attempts": 0}
    for metric, *_rest in rows:
        m_by_metric[metric] += 1
    lines = ["metric,strategy,scope,test,stat,p,p_bonferroni"]
    for metric, strategy, scope, test, stat, p in rows:
        adjusted = None if p is None else stats.bonferroni(p, m_by_metric[metric])
        lines.append(f"{metric},{strategy},{scope},{test},{_fmt(stat)},{_fmt(p)},{_fmt(adjusted)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_setdiff_csv(result: CampaignResult, path: Path, baseline: str = "baseline") -> None:
    bug_ids = sorted({r.bug_id for r in result.records})
    treatments = {r.strategy for r in result.records} - {baseline}
    lines = ["bug,D,B,D_minus_B,ratio"]
    for bug in bug_ids:
        deeprepair = result.patch_identities(bug, treatments)
        base = result.patch_identities(bug, {baseline})
        d, b, diff, ratio = patch_set_difference(deeprepair, base)
        lines.append(f"{bug},{d},{b},{diff},{ratio:.9g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
