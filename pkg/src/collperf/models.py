"""Closed-form completion-time models for broadcast, scatter and all-to-all."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .params import ParamTable, SegmentSpec


class ModelError(ValueError):
    """Inputs violate a model precondition."""


FAMILIES = ("broadcast", "scatter", "alltoall")

# Declared order doubles as the tie-break order for selection: simplest first.
VARIANTS = {
    "broadcast": (
        "flat", "chain", "binomial", "binary",
        "flat_segmented", "pipeline", "binomial_segmented",
        "flat_rendezvous", "chain_rendezvous", "binomial_rendezvous",
    ),
    "scatter": ("flat", "chain", "binomial"),
    "alltoall": ("lower_bound", "upper_bound", "contended"),
}

ALIASES = {
    "chain_segmented": "pipeline",
    "segmented_chain": "pipeline",
    "lower": "lower_bound",
    "upper": "upper_bound",
}

SEGMENTED = frozenset({"flat_segmented", "pipeline", "binomial_segmented"})

UPPER_BOUND_NOTE = "value is an upper bound"
EXTRAPOLATED_NOTE = "parameters extrapolated above measured sizes"


@dataclass(frozen=True, order=False)
class Strategy:
    family: str
    variant: str

    def __post_init__(self):
        if self.family not in VARIANTS:
            raise ModelError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.variant not in VARIANTS[self.family]:
            raise ModelError(
                f"variant {self.variant!r} is not valid for {self.family}; "
                f"expected one of {', '.join(VARIANTS[self.family])}")

    @classmethod
    def parse(cls, family: str, variant: str) -> "Strategy":
        return cls(family, ALIASES.get(variant, variant))

    @property
    def segmented(self) -> bool:
        return self.variant in SEGMENTED

    @property
    def rank(self) -> int:
        return VARIANTS[self.family].index(self.variant)

    def __str__(self):
        return f"{self.family}/{self.variant}"


@dataclass(frozen=True)
class Prediction:
    strategy: Strategy
    P: int
    m: int
    time: float
    terms: tuple[tuple[str, float], ...]
    segment: SegmentSpec | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def upper_bound(self) -> bool:
        return UPPER_BOUND_NOTE in self.notes


def check_inputs(P, m):
    if not isinstance(P, int) or P < 2:
        raise ModelError(f"process count must be an integer >= 2, got {P!r}")
    if not isinstance(m, int) or m < 1:
        raise ModelError(f"message size must be an integer >= 1, got {m!r}")


def _check_segment(m, seg):
    if seg is None:
        raise ModelError("segmented model needs a segment spec")
    if seg.s > m:
        raise ModelError(f"segment size {seg.s} exceeds message size {m}")
    if seg.k != -(-m // seg.s):
        raise ModelError(f"segment count {seg.k} does not match ceil({m}/{seg.s})")


def floor_log2(n: int) -> int:
    return n.bit_length() - 1


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


def _make(family, variant, P, m, terms, table, sizes, segment=None, notes=()):
    time = terms[0][1]
    for _, value in terms[1:]:
        time += value
    if not time > 0:
        raise ModelError(f"non-positive predicted time {time!r}")
    if any(table.extrapolates(s) for s in sizes):
        notes = notes + (EXTRAPOLATED_NOTE,)
    return Prediction(Strategy(family, variant), P, m, time, tuple(terms), segment, tuple(notes))


# -- broadcast ---------------------------------------------------------------

def bcast_flat(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    g = table.gap(m)
    return _make("broadcast", "flat", P, m, [("gaps", (P - 1) * g), ("latency", table.L)], table, [m])


def bcast_flat_rendezvous(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    terms = [
        ("gaps", (P - 1) * table.gap(m)),
        ("rendezvous", 2 * table.gap(1)),
        ("latency", 3 * table.L),
    ]
    return _make("broadcast", "flat_rendezvous", P, m, terms, table, [m])


def bcast_flat_segmented(table: ParamTable, P: int, m: int, seg: SegmentSpec) -> Prediction:
    check_inputs(P, m)
    _check_segment(m, seg)
    g = table.gap(seg.s)
    terms = [("gaps", (P - 1) * (g * seg.k)), ("latency", table.L)]
    return _make("broadcast", "flat_segmented", P, m, terms, table, [seg.s], seg)


def bcast_chain(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    return _make("broadcast", "chain", P, m,
                 [("hops", (P - 1) * (table.gap(m) + table.L))], table, [m])


def bcast_chain_rendezvous(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    hop = table.gap(m) + 2 * table.gap(1) + 3 * table.L
    return _make("broadcast", "chain_rendezvous", P, m, [("hops", (P - 1) * hop)], table, [m])


def bcast_pipeline(table: ParamTable, P: int, m: int, seg: SegmentSpec) -> Prediction:
    check_inputs(P, m)
    _check_segment(m, seg)
    g = table.gap(seg.s)
    terms = [("hops", (P - 1) * (g + table.L)), ("pipeline_drain", g * (seg.k - 1))]
    return _make("broadcast", "pipeline", P, m, terms, table, [seg.s], seg)


def bcast_binary(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    levels = ceil_log2(P)
    return _make("broadcast", "binary", P, m,
                 [("levels", levels * (2 * table.gap(m) + table.L))], table, [m],
                 notes=(UPPER_BOUND_NOTE,))


def bcast_binomial(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    terms = [("gaps", floor_log2(P) * table.gap(m)), ("latency", ceil_log2(P) * table.L)]
    return _make("broadcast", "binomial", P, m, terms, table, [m])


def bcast_binomial_rendezvous(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    terms = [
        ("gaps", floor_log2(P) * table.gap(m)),
        ("rendezvous_latency", ceil_log2(P) * (2 * table.gap(1) + 3 * table.L)),
    ]
    return _make("broadcast", "binomial_rendezvous", P, m, terms, table, [m])


def bcast_binomial_segmented(table: ParamTable, P: int, m: int, seg: SegmentSpec) -> Prediction:
    check_inputs(P, m)
    _check_segment(m, seg)
    terms = [
        ("gaps", floor_log2(P) * table.gap(seg.s) * seg.k),
        ("latency", ceil_log2(P) * table.L),
    ]
    return _make("broadcast", "binomial_segmented", P, m, terms, table, [seg.s], seg)


# -- scatter -----------------------------------------------------------------

def scatter_flat(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    return _make("scatter", "flat", P, m,
                 [("gaps", (P - 1) * table.gap(m)), ("latency", table.L)], table, [m])


def scatter_chain(table: ParamTable, P: int, m: int) -> Prediction:
    # hop j carries the blocks of the P - j processes further down the chain
    check_inputs(P, m)
    sizes = [j * m for j in range(1, P)]
    gaps = 0.0
    for s in sizes:
        gaps += table.gap(s)
    return _make("scatter", "chain", P, m,
                 [("gaps", gaps), ("latency", (P - 1) * table.L)], table, sizes)


def scatter_binomial(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    rounds = ceil_log2(P)
    sizes = [(1 << j) * m for j in range(rounds)]
    gaps = 0.0
    for s in sizes:
        gaps += table.gap(s)
    return _make("scatter", "binomial", P, m,
                 [("gaps", gaps), ("latency", rounds * table.L)], table, sizes)


# -- all-to-all --------------------------------------------------------------

def alltoall_lower(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    terms = [
        ("send_overheads", (P - 1) * table.send_overhead(m)),
        ("recv_overheads", (P - 1) * table.recv_overhead(m)),
        ("latency", table.L),
    ]
    return _make("alltoall", "lower_bound", P, m, terms, table, [m])


def alltoall_upper(table: ParamTable, P: int, m: int) -> Prediction:
    check_inputs(P, m)
    terms = [
        ("gaps", (P - 1) * table.gap(m)),
        ("recv_overheads", (P - 1) * table.recv_overhead(m)),
        ("latency", table.L),
    ]
    return _make("alltoall", "upper_bound", P, m, terms, table, [m])


def tree_feasible(d: int, h: int, P: int) -> bool:
    """True when a tree of fan-out ``d`` and height ``h`` can hold ``P`` nodes."""
    if d < 1 or h < 0 or P < 1:
        raise ModelError(f"invalid tree shape d={d}, h={h}, P={P}")
    if d == 1:
        return h + 1 >= P
    total, level = 0, 1
    for _ in range(h + 1):
        total += level
        if total >= P:
            return True
        level *= d
    return False


MODELS: dict[Strategy, Callable[..., Prediction]] = {
    Strategy("broadcast", "flat"): bcast_flat,
    Strategy("broadcast", "flat_rendezvous"): bcast_flat_rendezvous,
    Strategy("broadcast", "flat_segmented"): bcast_flat_segmented,
    Strategy("broadcast", "chain"): bcast_chain,
    Strategy("broadcast", "chain_rendezvous"): bcast_chain_rendezvous,
    Strategy("broadcast", "pipeline"): bcast_pipeline,
    Strategy("broadcast", "binary"): bcast_binary,
    Strategy("broadcast", "binomial"): bcast_binomial,
    Strategy("broadcast", "binomial_rendezvous"): bcast_binomial_rendezvous,
    Strategy("broadcast", "binomial_segmented"): bcast_binomial_segmented,
    Strategy("scatter", "flat"): scatter_flat,
    Strategy("scatter", "chain"): scatter_chain,
    Strategy("scatter", "binomial"): scatter_binomial,
    Strategy("alltoall", "lower_bound"): alltoall_lower,
    Strategy("alltoall", "upper_bound"): alltoall_upper,
}


def evaluate(strategy: Strategy, table: ParamTable, P: int, m: int,
             seg: SegmentSpec | None = None) -> Prediction:
    """Dispatch to the closed form for ``strategy``.

    The contended all-to-all prediction needs a contention factor and lives
    in :mod:`collperf.contention`.
    """
    try:
        model = MODELS[strategy]
    except KeyError:
        raise ModelError(f"{strategy} has no standalone closed form") from None
    if strategy.segmented:
        return model(table, P, m, seg)
    if seg is not None:
        raise ModelError(f"{strategy} does not take a segment size")
    return model(table, P, m)
