"""Pick the implementation with the lowest predicted completion time."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import models
from .contention import ContentionModel, predict_alltoall
from .models import ModelError, Prediction, Strategy
from .params import ParamTable, SegmentSpec
from .segment import optimize_segment

DEFAULT_CANDIDATES = {
    "broadcast": ("flat", "chain", "binomial", "pipeline"),
    "scatter": ("flat", "chain", "binomial"),
    "alltoall": ("lower_bound", "upper_bound", "contended"),
}


@dataclass(frozen=True)
class SelectionReport:
    family: str
    P: int
    m: int
    ranked: tuple[Prediction, ...]
    caveats: tuple[str, ...] = field(default=())

    @property
    def winner(self) -> Strategy:
        return self.ranked[0].strategy

    @property
    def winner_segment(self) -> SegmentSpec | None:
        return self.ranked[0].segment


def evaluate_candidate(table: ParamTable, strategy: Strategy, P: int, m: int, unit: int = 1,
                       gamma: ContentionModel | None = None) -> Prediction:
    """Prediction for one candidate; segmented ones use their best segment size."""
    if strategy.variant == "contended":
        if gamma is None:
            raise ModelError("contended all-to-all prediction needs a contention factor")
        return predict_alltoall(table, P, m, gamma)
    model = models.MODELS[strategy]
    if strategy.segmented:
        models.check_inputs(P, m)
        search = optimize_segment(model, table, P, m, unit)
        return model(table, P, m, search.best)
    return model(table, P, m)


def select(table: ParamTable, family: str, P: int, m: int, unit: int = 1,
           candidates=None, gamma: ContentionModel | None = None) -> SelectionReport:
    if family not in DEFAULT_CANDIDATES:
        raise ModelError(f"unknown family {family!r}")
    names = DEFAULT_CANDIDATES[family] if candidates is None else tuple(candidates)
    if not names:
        raise ModelError("empty candidate set")
    strategies = list(dict.fromkeys(Strategy.parse(family, n) for n in names))
    predictions = [evaluate_candidate(table, s, P, m, unit, gamma) for s in strategies]
    ranked = tuple(sorted(predictions, key=lambda p: (p.time, p.strategy.rank)))
    caveats = []
    for p in ranked:
        caveats += [f"{p.strategy.variant}: {note}" for note in p.notes]
    return SelectionReport(family, P, m, ranked, tuple(caveats))
