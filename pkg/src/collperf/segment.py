"""Segment-size search for the segmented broadcast models.

The search starts with the power-of-two ladder ``s = m / 2**i``.  Because
the segment count is ``ceil(m / s)``, predicted time is a sawtooth in ``s``:
it rises across each run of sizes sharing a segment count and drops where
the count changes.  A plain unit-step climb stalls on the first tooth, so
:func:`optimize_segment` also scans the smallest legal size for every
distinct segment count before climbing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .models import ModelError, Prediction
from .params import ParamTable, SegmentSpec

SegmentedModel = Callable[[ParamTable, int, int, SegmentSpec], Prediction]


@dataclass(frozen=True)
class SegmentSearchResult:
    best: SegmentSpec
    time: float
    evaluated: int
    trace: tuple[tuple[int, float], ...]
    budget_exhausted: bool = False


class _Evaluator:
    """Memoising wrapper recording every distinct size in evaluation order."""

    def __init__(self, model, table, P, m, unit):
        self.model, self.table, self.P, self.m, self.unit = model, table, P, m, unit
        self.cache: dict[int, float] = {}
        self.trace: list[tuple[int, float]] = []

    def __call__(self, s: int) -> float:
        if s not in self.cache:
            spec = SegmentSpec.for_message(self.m, s, self.unit)
            t = self.model(self.table, self.P, self.m, spec).time
            self.cache[s] = t
            self.trace.append((s, t))
        return self.cache[s]

    def result(self, s: int, exhausted: bool = False) -> SegmentSearchResult:
        return SegmentSearchResult(
            best=SegmentSpec.for_message(self.m, s, self.unit),
            time=self.cache[s],
            evaluated=len(self.trace),
            trace=tuple(self.trace),
            budget_exhausted=exhausted,
        )


def _better(t: float, s: int, best_t: float, best_s: int) -> bool:
    # ties go to the larger segment: fewer segments, fewer per-message costs
    return t < best_t or (t == best_t and s > best_s)


def _check(m, unit):
    if unit < 1:
        raise ModelError(f"datatype unit must be >= 1, got {unit}")
    if m < unit:
        raise ModelError(f"message size {m} is smaller than the datatype unit {unit}")


def power_of_two_candidates(m: int, unit: int) -> list[int]:
    """``m / 2**i`` rounded down to a multiple of ``unit``, largest first."""
    _check(m, unit)
    out: list[int] = []
    i = 0
    while (m >> i) >= unit:
        s = (m >> i) // unit * unit
        if not out or out[-1] != s:
            out.append(s)
        i += 1
    return out


def segment_count_ladder(m: int, unit: int) -> list[int]:
    """Smallest legal segment size for each reachable segment count, ascending.

    Sizes are ``unit * t`` for ``t`` in ``1..m // unit``; the count is
    ``(m - 1) // (unit * t) + 1``, so runs of ``t`` sharing a count are the
    blocks of constant ``((m - 1) // unit) // t``.
    """
    _check(m, unit)
    n, top = (m - 1) // unit, m // unit
    ladder = []
    t = 1
    while t <= top:
        q = n // t
        end = top if q == 0 else min(top, n // q)
        ladder.append(t * unit)
        t = end + 1
    return ladder


def sweep_powers_of_two(model: SegmentedModel, table: ParamTable, P: int, m: int,
                        unit: int = 1) -> SegmentSearchResult:
    ev = _Evaluator(model, table, P, m, unit)
    best_s = None
    for s in power_of_two_candidates(m, unit):
        t = ev(s)
        if best_s is None or _better(t, s, ev.cache[best_s], best_s):
            best_s = s
    return ev.result(best_s)


def hill_climb(model: SegmentedModel, table: ParamTable, P: int, m: int, unit: int,
               start: SegmentSpec, *, _ev: _Evaluator | None = None) -> SegmentSearchResult:
    """Move by one datatype unit while a neighbour strictly improves.

    At most ``10 * log2(m)`` moves are made; when the budget runs out the
    best size so far is returned with ``budget_exhausted`` set.
    """
    _check(m, unit)
    if start.unit != unit or start.s > m or start.k != -(-m // start.s):
        raise ModelError(f"start segment {start} is not valid for m={m}, unit={unit}")
    ev = _ev or _Evaluator(model, table, P, m, unit)
    budget = max(1, math.ceil(10 * math.log2(m))) if m > 1 else 0
    s = start.s
    cur = ev(s)
    moves = 0
    while True:
        step_s, step_t = None, None
        for c in (s + unit, s - unit):
            if unit <= c <= m:
                t = ev(c)
                if step_s is None or _better(t, c, step_t, step_s):
                    step_s, step_t = c, t
        if step_s is None or not step_t < cur:
            return ev.result(s)
        if moves == budget:
            return ev.result(s, exhausted=True)
        s, cur = step_s, step_t
        moves += 1


def optimize_segment(model: SegmentedModel, table: ParamTable, P: int, m: int,
                     unit: int = 1) -> SegmentSearchResult:
    ev = _Evaluator(model, table, P, m, unit)
    best_s = None
    for s in power_of_two_candidates(m, unit) + segment_count_ladder(m, unit):
        t = ev(s)
        if best_s is None or _better(t, s, ev.cache[best_s], best_s):
            best_s = s
    climbed = hill_climb(model, table, P, m, unit,
                         SegmentSpec.for_message(m, best_s, unit), _ev=ev)
    return climbed
