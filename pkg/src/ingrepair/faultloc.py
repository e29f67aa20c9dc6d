"""Spectrum-based fault localization with the Ochiai formula.

Suspiciousness of a statement is ef / sqrt(totalFailed * (ef + ep)) where
ef/ep count failing/passing tests covering it; assertion failures and
runtime errors both count as failing. The ranked list is thresholded
(inclusive, default 0.1) and capped (default 1,000 candidates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .petit.ast import StatementId
from .petit.interp import CoverageMatrix

DEFAULT_THRESHOLD = 0.1
DEFAULT_CAP = 1000


@dataclass
class SuspiciousList:
    entries: list[tuple[StatementId, float]]  # descending suspiciousness

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def statements(self) -> list[StatementId]:
        return [sid for sid, _s in self.entries]


def ochiai(ef: int, ep: int, total_failed: int) -> float:
    """Ochiai suspiciousness in [0, 1]; 0 when the denominator is 0."""
    if ef < 0 or ep < 0 or total_failed < 0:
        raise ValueError("counts must be non-negative")
    if ef > total_failed:
        raise ValueError("ef cannot exceed the number of failing tests")
    denom = total_failed * (ef + ep)
    if denom == 0:
        return 0.0
    return ef / math.sqrt(denom)


def sid_order(sid: StatementId) -> tuple:
    return (sid.path, sid.type_name, sid.fn_sig, sid.index)


def localize(
    coverage: CoverageMatrix,
    threshold: float = DEFAULT_THRESHOLD,
    cap: int = DEFAULT_CAP,
) -> SuspiciousList:
    """Rank statements by Ochiai suspiciousness (descending; ties broken
    by statement order), keeping values >= threshold, at most ``cap``.
    With no failing test the list is empty."""
    failing = coverage.failing()
    if not failing:
        return SuspiciousList([])
    total_failed = len(failing)
    ef: dict[StatementId, int] = {}
    ep: dict[StatementId, int] = {}
    for result in coverage.results:
        bucket = ef if result.failed else ep
        for sid in result.covered:
            bucket[sid] = bucket.get(sid, 0) + 1
    entries = []
    for sid in set(ef) | set(ep):
        s = ochiai(ef.get(sid, 0), ep.get(sid, 0), total_failed)
        if s >= threshold:
            entries.append((sid, s))
    entries.sort(key=lambda e: (-e[1], sid_order(e[0])))
    return SuspiciousList(entries[:cap])


def save_suspicious(suspicious: SuspiciousList, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("statement_id,suspiciousness\n")
        for sid, s in suspicious:
            fh.write(f"{sid},{s:.9g}\n")
