import math
import random

import pytest

from ingrepair.faultloc import localize, ochiai, save_suspicious, sid_order
from ingrepair.petit.ast import StatementId
from ingrepair.petit.interp import CoverageMatrix, TestResult


def _sid(i):
    return StatementId("f.pt", "T", "f()->int", i)


def _matrix(rows):
    """rows: list of (name, outcome, covered statement indices)."""
    return CoverageMatrix(
        [TestResult(name, outcome, frozenset(_sid(i) for i in covered)) for name, outcome, covered in rows]
    )


def test_ochiai_known_values():
    assert ochiai(1, 0, 1) == 1.0
    assert ochiai(0, 5, 3) == 0.0
    assert math.isclose(ochiai(1, 1, 1), 1 / math.sqrt(2), rel_tol=1e-12)
    assert math.isclose(ochiai(1, 1, 1), 0.70711, abs_tol=5e-6)


def test_ochiai_zero_denominator():
    assert ochiai(0, 0, 0) == 0.0
    assert ochiai(0, 0, 5) == 0.0


def test_ochiai_range_and_validation():
    with pytest.raises(ValueError):
        ochiai(2, 0, 1)
    with pytest.raises(ValueError):
        ochiai(-1, 0, 1)
    for ef in range(4):
        for ep in range(4):
            for tf in range(ef, 5):
                assert 0.0 <= ochiai(ef, ep, tf) <= 1.0


def test_all_pass_empty_list():
    coverage = _matrix([("t1", "pass", [0, 1]), ("t2", "pass", [1])])
    assert len(localize(coverage)) == 0


def test_only_failing_covered_statement_ranked_first():
    coverage = _matrix(
        [
            ("bad", "fail", [2]),
            ("good1", "pass", [0, 1]),
            ("good2", "pass", [0]),
        ]
    )
    ranked = localize(coverage)
    assert ranked.entries[0] == (_sid(2), 1.0)
    assert _sid(0) not in ranked.statements  # suspiciousness 0 < threshold


def test_error_outcome_counts_as_failing():
    coverage = _matrix([("boom", "error", [4])])
    assert localize(coverage).entries[0] == (_sid(4), 1.0)


def test_threshold_is_inclusive_and_excludes_below():
    # ef=1, ep=24, tf=4 → 1/sqrt(4*25) = 0.1 stays; ep=96 → 1/sqrt(400)=0.05 goes
    keep = [("f", "fail", [1])] + [(f"p{i}", "pass", [1]) for i in range(24)]
    drop = [("f", "fail", [1])] + [(f"p{i}", "pass", [1]) for i in range(96)]
    for rows, expected in ((keep, 1), (drop, 0)):
        coverage = _matrix(rows + [("f2", "fail", [0]), ("f3", "fail", [0]), ("f4", "fail", [0])])
        ranked = localize(coverage)
        assert (_sid(1) in ranked.statements) == bool(expected)


def test_cap_limits_length():
    coverage = _matrix([("f", "fail", list(range(50)))])
    assert len(localize(coverage, cap=10)) == 10


def test_ties_broken_by_statement_order():
    coverage = _matrix([("f", "fail", [3, 1, 2])])
    ranked = localize(coverage)
    assert ranked.statements == [_sid(1), _sid(2), _sid(3)]


def test_monotonic_in_passing_coverage():
    base = ochiai(2, 1, 3)
    more_passing = ochiai(2, 2, 3)
    assert more_passing <= base


def _brute_force(coverage, threshold, cap):
    failing = [r for r in coverage.results if r.outcome != "pass"]
    if not failing:
        return []
    stmts = set()
    for r in coverage.results:
        stmts |= r.covered
    scored = []
    for sid in stmts:
        ef = sum(1 for r in failing if sid in r.covered)
        ep = sum(1 for r in coverage.results if r.outcome == "pass" and sid in r.covered)
        denom = len(failing) * (ef + ep)
        s = ef / math.sqrt(denom) if denom else 0.0
        if s >= threshold:
            scored.append((sid, s))
    scored.sort(key=lambda e: (-e[1], sid_order(e[0])))
    return scored[:cap]


def test_localize_equals_brute_force_on_random_matrices():
    rng = random.Random(42)
    for _ in range(50):
        n_stmts = rng.randint(1, 20)
        n_tests = rng.randint(1, 10)
        rows = []
        for t in range(n_tests):
            outcome = rng.choice(["pass", "fail", "error"])
            covered = [i for i in range(n_stmts) if rng.random() < 0.4]
            rows.append((f"t{t}", outcome, covered))
        coverage = _matrix(rows)
        expected = _brute_force(coverage, 0.1, 1000)
        got = localize(coverage).entries
        assert [sid for sid, _ in got] == [sid for sid, _ in expected]
        for (_, a), (_, b) in zip(got, expected):
            assert math.isclose(a, b, rel_tol=1e-12)


def test_suspicious_csv(tmp_path):
    coverage = _matrix([("f", "fail", [0, 1])])
    path = tmp_path / "suspicious.csv"
    save_suspicious(localize(coverage), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "statement_id,suspiciousness"
    assert len(lines) == 3
