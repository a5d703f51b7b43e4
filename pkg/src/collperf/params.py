"""pLogP network signature: latency plus per-size gap and overheads.

Parameters are measured at discrete message sizes; queries at other sizes
are answered by piecewise-linear interpolation between the bracketing rows.
Above the largest measured size the last interval's slope is continued.
"""

from __future__ import annotations

import math
import warnings
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path


class ParamFileError(ValueError):
    """Malformed parameter or measurement file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ExtrapolationWarning(UserWarning):
    """A parameter was queried above the largest measured message size."""


@dataclass(frozen=True)
class ParamRow:
    m: int
    g: float
    os: float
    or_: float

    def __post_init__(self):
        problem = row_problem(self.m, self.g, self.os, self.or_)
        if problem:
            raise ValueError(problem)


def row_problem(m, g, os, or_) -> str | None:
    if not (isinstance(m, int) and m >= 1):
        return f"message size must be a positive integer, got {m!r}"
    for name, value in (("gap", g), ("send overhead", os), ("receive overhead", or_)):
        if not (math.isfinite(value) and value > 0):
            return f"{name} must be positive and finite, got {value!r}"
    if g < os:
        return "gap smaller than send overhead"
    if g < or_:
        return "gap smaller than receive overhead"
    return None


@dataclass(frozen=True)
class SegmentSpec:
    """Split of an m-byte message into k segments of s bytes."""

    s: int
    k: int
    unit: int = 1

    def __post_init__(self):
        if self.unit < 1:
            raise ValueError(f"datatype unit must be >= 1, got {self.unit}")
        if self.s < 1 or self.s % self.unit:
            raise ValueError(f"segment size {self.s} is not a positive multiple of {self.unit}")
        if self.k < 1:
            raise ValueError(f"segment count must be >= 1, got {self.k}")

    @classmethod
    def for_message(cls, m: int, s: int, unit: int = 1) -> "SegmentSpec":
        if s > m:
            raise ValueError(f"segment size {s} exceeds message size {m}")
        if s < 1:
            raise ValueError(f"segment size must be >= 1, got {s}")
        return cls(s=s, k=-(-m // s), unit=unit)


@dataclass(frozen=True)
class ParamTable:
    L: float
    rows: tuple[ParamRow, ...]
    _m: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _cols: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValueError(f"latency must be positive and finite, got {self.L!r}")
        if len(rows) < 2:
            raise ValueError("parameter table needs at least 2 rows")
        for prev, row in zip(rows, rows[1:]):
            if row.m <= prev.m:
                raise ValueError("non-increasing message size")
        if rows[0].m != 1:
            raise ValueError("parameter table must contain a row for m = 1")
        object.__setattr__(self, "_m", tuple(r.m for r in rows))
        object.__setattr__(self, "_cols", {
            "g": tuple(r.g for r in rows),
            "os": tuple(r.os for r in rows),
            "or": tuple(r.or_ for r in rows),
        })

    @classmethod
    def from_rows(cls, L: float, rows) -> "ParamTable":
        """Build from plain ``(m, g, os, or)`` tuples."""
        return cls(L=L, rows=tuple(ParamRow(int(m), g, os, o) for m, g, os, o in rows))

    @property
    def max_size(self) -> int:
        return self._m[-1]

    def extrapolates(self, m: float) -> bool:
        return m > self._m[-1]

    def scaled(self, c: float) -> "ParamTable":
        """Same network with every time parameter multiplied by ``c``."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        return ParamTable(L=self.L * c, rows=tuple(
            ParamRow(r.m, r.g * c, r.os * c, r.or_ * c) for r in self.rows))

    def gap(self, m: float) -> float:
        return self._query("g", m)

    def send_overhead(self, m: float) -> float:
        # g >= os holds on every row; the cap keeps it beyond the measured
        # range and against rounding between rows
        return min(self._query("os", m), self.gap(m))

    def recv_overhead(self, m: float) -> float:
        return min(self._query("or", m), self.gap(m))

    def _query(self, col: str, m: float) -> float:
        if m < 1:
            raise ValueError(f"message size must be >= 1, got {m}")
        sizes, ys = self._m, self._cols[col]
        i = bisect_left(sizes, m)
        if i < len(sizes) and sizes[i] == m:
            return ys[i]
        if i == 0:
            return ys[0]
        if i == len(sizes):
            warnings.warn(
                f"pLogP parameters extrapolated above the largest measured size {sizes[-1]}",
                ExtrapolationWarning, stacklevel=3)
            slope = (ys[-1] - ys[-2]) / (sizes[-1] - sizes[-2])
            # a falling last interval would eventually give non-positive times
            return ys[-1] + max(slope, 0.0) * (m - sizes[-1])
        m0, m1 = sizes[i - 1], sizes[i]
        y0, y1 = ys[i - 1], ys[i]
        y = y0 + (y1 - y0) * ((m - m0) / (m1 - m0))
        return min(max(y, min(y0, y1)), max(y0, y1))


def load_table(source: str) -> ParamTable:
    """Parse parameter-file text.

    The first non-comment line is ``L <seconds>``; every following line is
    ``<m> <g> <os> <or>``.  Lines starting with ``#`` and blank lines are
    skipped.
    """
    L = None
    rows: list[ParamRow] = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if L is None:
            if len(parts) != 2 or parts[0] != "L":
                raise ParamFileError("expected header 'L <seconds>'", lineno)
            L = _number(parts[1], lineno)
            if not (math.isfinite(L) and L > 0):
                raise ParamFileError(f"latency must be positive, got {parts[1]}", lineno)
            continue
        if len(parts) != 4:
            raise ParamFileError(f"expected 4 fields '<m> <g> <os> <or>', got {len(parts)}", lineno)
        try:
            m = int(parts[0])
        except ValueError:
            raise ParamFileError(f"message size must be an integer, got {parts[0]!r}", lineno) from None
        g, os, or_ = (_number(p, lineno) for p in parts[1:])
        problem = row_problem(m, g, os, or_)
        if problem:
            raise ParamFileError(problem, lineno)
        if rows and m <= rows[-1].m:
            raise ParamFileError("non-increasing message size", lineno)
        rows.append(ParamRow(m, g, os, or_))
    if L is None:
        raise ParamFileError("missing header 'L <seconds>'")
    try:
        return ParamTable(L=L, rows=tuple(rows))
    except ValueError as exc:
        raise ParamFileError(str(exc)) from None


def read_table(path: str | Path) -> ParamTable:
    return load_table(Path(path).read_text(encoding="utf-8"))


def dump_table(table: ParamTable) -> str:
    lines = [f"L {table.L!r}"]
    lines += [f"{r.m} {r.g!r} {r.os!r} {r.or_!r}" for r in table.rows]
    return "\n".join(lines) + "\n"


def _number(text: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParamFileError(f"not a number: {text!r}", lineno) from None
