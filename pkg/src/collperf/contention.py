"""All-to-all under contention: a constant-factor blend of the two bounds.

The factor ``gamma`` is a property of the network, so it can be calibrated
once from measured all-to-all times and reused for other ``(P, m)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from .models import ModelError, Prediction, Strategy, alltoall_lower, alltoall_upper
from .params import ParamFileError, ParamTable

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Measurement:
    P: int
    m: int
    observed: float

    def __post_init__(self):
        if self.P < 2 or self.m < 1 or not (math.isfinite(self.observed) and self.observed > 0):
            raise ValueError(f"invalid measurement P={self.P} m={self.m} observed={self.observed}")


@dataclass(frozen=True)
class MeasurementSet:
    entries: tuple[Measurement, ...]

    @classmethod
    def from_tuples(cls, rows) -> "MeasurementSet":
        return cls(tuple(Measurement(int(P), int(m), float(t)) for P, m, t in rows))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class ContentionModel:
    gamma: float
    source: str = "fixed"
    fit_residual: float | None = None
    sample_count: int = 0
    skipped: int = 0
    notes: tuple[str, ...] = field(default=())

    @property
    def out_of_range(self) -> bool:
        return not 0.0 <= self.gamma <= 1.0


def blend(lower: float, upper: float, gamma: float) -> float:
    """``lower + (upper - lower) * gamma`` with exact endpoints.

    For ``gamma`` in ``[0, 1]`` the result never leaves ``[lower, upper]``,
    and it is non-decreasing in ``gamma`` everywhere.
    """
    if gamma == 1.0:
        return upper
    t = lower + (upper - lower) * gamma
    # absorb rounding in upper - lower so the bounds stay bounds
    return min(t, upper) if gamma < 1.0 else max(t, upper)


def predict_alltoall(table: ParamTable, P: int, m: int, model: ContentionModel) -> Prediction:
    lo = alltoall_lower(table, P, m)
    hi = alltoall_upper(table, P, m)
    if not math.isfinite(model.gamma):
        raise ModelError(f"contention factor must be finite, got {model.gamma!r}")
    t = blend(lo.time, hi.time, model.gamma)
    notes = tuple(dict.fromkeys(lo.notes + hi.notes))
    if model.out_of_range:
        notes += (f"contention factor {model.gamma:g} outside [0, 1]",)
    return Prediction(
        strategy=Strategy("alltoall", "contended"), P=P, m=m, time=t,
        terms=(("lower", lo.time), ("contention", t - lo.time)),
        notes=notes,
    )


def fit_gamma(table: ParamTable, measurements: MeasurementSet) -> ContentionModel:
    """Least-squares ``gamma`` for ``observed = lower + (upper - lower) * gamma``.

    Entries where both bounds coincide say nothing about ``gamma`` and are
    skipped.  An estimate outside ``[0, 1]`` is kept as is and flagged; it
    means the blend does not describe that network well.
    """
    entries = list(measurements)
    if not entries:
        raise ModelError("cannot fit the contention factor from an empty measurement set")
    used = []
    for e in entries:
        lo = alltoall_lower(table, e.P, e.m).time
        hi = alltoall_upper(table, e.P, e.m).time
        if hi > lo:
            used.append((lo, hi - lo, e.observed))
    skipped = len(entries) - len(used)
    if not used:
        raise ModelError("every measurement has equal lower and upper bounds; gamma is undetermined")
    num = math.fsum((obs - lo) * span for lo, span, obs in used)
    den = math.fsum(span * span for _, span, _ in used)
    gamma = num / den
    rms = math.sqrt(math.fsum((obs - (lo + span * gamma)) ** 2 for lo, span, obs in used) / len(used))
    notes = []
    if skipped:
        notes.append(f"{skipped} measurement(s) with equal bounds skipped")
        log.info("skipped %d measurement(s) with equal bounds", skipped)
    if not 0.0 <= gamma <= 1.0:
        notes.append(f"fitted contention factor {gamma:g} outside [0, 1]")
        log.warning("fitted contention factor %g is outside [0, 1]", gamma)
    return ContentionModel(gamma=gamma, source="fitted", fit_residual=rms,
                           sample_count=len(used), skipped=skipped, notes=tuple(notes))


def linear_contention_time(l: float, b: float, W: float, gamma: float) -> float:
    """Shared-medium linear model: ``l + b * gamma / W``."""
    if not W > 0:
        raise ModelError(f"bandwidth must be positive, got {W!r}")
    if l < 0 or b < 0 or gamma < 0:
        raise ModelError("latency, size and contention factor must be non-negative")
    return l + b * gamma / W


def load_measurements(source: str) -> MeasurementSet:
    """Parse ``<P> <m> <observed_seconds>`` lines; ``#`` starts a comment line."""
    rows = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParamFileError(f"expected 3 fields '<P> <m> <seconds>', got {len(parts)}", lineno)
        try:
            rows.append(Measurement(int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise ParamFileError(str(exc), lineno) from None
    return MeasurementSet(tuple(rows))


def read_measurements(path: str | Path) -> MeasurementSet:
    return load_measurements(Path(path).read_text(encoding="utf-8"))
