"""Difference bound matrices over clocks ``x0, x1, ..., xn``.

Cells are stored as packed integers: ``2 * weight + 1`` for a non-strict
bound ``(weight, <=)`` and ``2 * weight`` for a strict bound
``(weight, <)``.  Integer order on the packed form is exactly the bound
order, so ``min`` is intersection and comparison is inclusion.  ``INF``
encodes ``(inf, <)``, the only infinite bound.

A DBM is an immutable value.  ``canonical`` marks a matrix closed under
full shortest-path tightening; ``partial`` holds the observer-clock index
when the matrix is only closed in the split sense used by
:func:`tawcet.extrapolation.mcanon`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

INF = 1 << 62
LE_ZERO = 1  # (0, <=)
LT_ZERO = 0  # (0, <)

# Finite weights beyond this are treated as overflow rather than silently kept.
MAX_WEIGHT = 1 << 40


class DimensionError(ValueError):
    pass


class CanonicalFormError(ValueError):
    pass


@dataclass(frozen=True)
class Bound:
    """A single difference bound ``(weight, strictness)``."""

    weight: float
    strict: bool = False

    def __post_init__(self):
        if self.weight == math.inf:
            if not self.strict:
                raise ValueError("an infinite bound is always strict")
        elif self.weight != int(self.weight):
            raise ValueError(f"bound weights are integers, got {self.weight!r}")
        elif abs(self.weight) > MAX_WEIGHT:
            raise OverflowError(f"bound weight {self.weight} out of range")

    @property
    def is_infinite(self) -> bool:
        return self.weight == math.inf

    def __lt__(self, other: Bound) -> bool:
        return encode(self) < encode(other)

    def __le__(self, other: Bound) -> bool:
        return encode(self) <= encode(other)

    def __gt__(self, other: Bound) -> bool:
        return encode(self) > encode(other)

    def __ge__(self, other: Bound) -> bool:
        return encode(self) >= encode(other)

    def __str__(self) -> str:
        if self.is_infinite:
            return "(inf, <)"
        return f"({int(self.weight)}, {'<' if self.strict else '<='})"


INFINITY = Bound(math.inf, True)
ZERO = Bound(0, False)


def encode(b: Bound) -> int:
    if b.weight == math.inf:
        return INF
    return 2 * int(b.weight) + (0 if b.strict else 1)


def decode(raw: int) -> Bound:
    if raw >= INF:
        return INFINITY
    return Bound(raw >> 1, not raw & 1)


def raw_add(a: int, b: int) -> int:
    if a >= INF or b >= INF:
        return INF
    return a + b - ((a | b) & 1)


def bound_add(a: Bound, b: Bound) -> Bound:
    """Sum of two bounds; infinity absorbs, strictness propagates."""
    total = raw_add(encode(a), encode(b))
    if total < INF and abs(total >> 1) > MAX_WEIGHT:
        raise OverflowError(f"{a} + {b} overflows the bound range")
    return decode(total)


def raw_negate_lower(raw: int) -> int:
    """Turn a lower-bound cell ``x0 - x <= -c`` into the bound ``x >= c``."""
    if raw >= INF:
        return INF
    return 2 * -(raw >> 1) + (raw & 1)


class DBM:
    __slots__ = ("dim", "cells", "canonical", "partial", "_hash")

    def __init__(self, dim: int, cells: Sequence[int], canonical: bool = False,
                 partial: int | None = None):
        if dim < 1:
            raise DimensionError("a DBM needs at least the reference clock")
        if len(cells) != dim * dim:
            raise DimensionError(f"expected {dim * dim} cells, got {len(cells)}")
        self.dim = dim
        self.cells = tuple(cells)
        self.canonical = canonical
        self.partial = None if canonical else partial
        self._hash = None

    @classmethod
    def from_bounds(cls, dim: int, bounds: Mapping[tuple[int, int], Bound]) -> DBM:
        """Unconstrained matrix tightened by the given cells (non-canonical)."""
        cells = unconstrained_cells(dim)
        for (i, j), b in bounds.items():
            k = i * dim + j
            cells[k] = min(cells[k], encode(b))
        return cls(dim, cells)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Bound]]) -> DBM:
        dim = len(rows)
        return cls(dim, [encode(b) for row in rows for b in row])

    def __getitem__(self, ij: tuple[int, int]) -> Bound:
        i, j = ij
        return decode(self.cells[i * self.dim + j])

    def raw(self, i: int, j: int) -> int:
        return self.cells[i * self.dim + j]

    def rows(self) -> list[list[Bound]]:
        n = self.dim
        return [[decode(self.cells[i * n + j]) for j in range(n)] for i in range(n)]

    def __eq__(self, other):
        if not isinstance(other, DBM):
            return NotImplemented
        return self.dim == other.dim and self.cells == other.cells

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self.cells))
        return self._hash

    def __repr__(self):
        flag = "canonical" if self.canonical else ("partial" if self.partial is not None else "raw")
        return f"DBM(dim={self.dim}, {flag}, [{'; '.join(self.constraints())}])"

    def constraints(self, names: Sequence[str] | None = None) -> list[str]:
        """Non-trivial cells rendered as ``xi - xj <= c``."""
        n = self.dim
        if names is None:
            names = ["x0"] + [f"x{i}" for i in range(1, n)]
        out = []
        for i in range(n):
            for j in range(n):
                raw = self.cells[i * n + j]
                if i == j and raw == LE_ZERO or raw >= INF:
                    continue
                op = "<=" if raw & 1 else "<"
                out.append(f"{names[i]} - {names[j]} {op} {raw >> 1}")
        return out

    def pretty(self, names: Sequence[str]) -> list[str]:
        """Human-oriented rendering: single-clock bounds folded, differences kept."""
        n = self.dim
        out = []
        for i in range(1, n):
            lo = self.cells[i]
            hi = self.cells[i * n]
            if lo == LE_ZERO and hi >= INF:
                continue
            if hi < INF and raw_add(hi, lo) == LE_ZERO:
                out.append(f"{names[i]} == {hi >> 1}")
                continue
            if lo != LE_ZERO:
                out.append(f"{names[i]} {'>=' if lo & 1 else '>'} {-(lo >> 1)}")
            if hi < INF:
                out.append(f"{names[i]} {'<=' if hi & 1 else '<'} {hi >> 1}")
        for i in range(1, n):
            for j in range(1, n):
                raw = self.cells[i * n + j]
                if i == j or raw >= INF:
                    continue
                # Skip differences implied by the single-clock bounds.
                if raw_add(self.cells[i * n], self.cells[j]) <= raw:
                    continue
                out.append(f"{names[i]} - {names[j]} {'<=' if raw & 1 else '<'} {raw >> 1}")
        return out


def unconstrained_cells(dim: int) -> list[int]:
    cells = [INF] * (dim * dim)
    for i in range(dim):
        cells[i * dim + i] = LE_ZERO
        # Clock values are non-negative.
        cells[i] = LE_ZERO
    return cells


def dbm_zero(dim: int) -> DBM:
    if dim < 1:
        raise DimensionError("a DBM needs at least the reference clock")
    return DBM(dim, [LE_ZERO] * (dim * dim), canonical=True)


def dbm_universe(dim: int) -> DBM:
    """All non-negative valuations."""
    if dim < 1:
        raise DimensionError("a DBM needs at least the reference clock")
    return DBM(dim, unconstrained_cells(dim), canonical=True)


def close(cells: list[int], n: int) -> None:
    """In-place Floyd-Warshall tightening of a packed matrix."""
    for k in range(n):
        kn = k * n
        # Row k only changes through a negative d[k][k]; the snapshot is safe.
        row_k = cells[kn:kn + n]
        for i in range(n):
            in_ = i * n
            dik = cells[in_ + k]
            if dik >= INF:
                continue
            lo = dik & 1
            cells[in_:in_ + n] = [
                x if y >= INF or x <= (t := dik + y - (lo | y & 1)) else t
                for x, y in zip(cells[in_:in_ + n], row_k)]


def diagonal_ok(cells: Sequence[int], n: int) -> bool:
    return all(cells[i * n + i] >= LE_ZERO for i in range(n))


def canonicalize(d: DBM) -> DBM:
    """Tightest equivalent matrix (all-pairs shortest paths)."""
    if d.canonical:
        return d
    cells = list(d.cells)
    close(cells, d.dim)
    return DBM(d.dim, cells, canonical=True)


def is_consistent(d: DBM) -> bool:
    if not d.canonical:
        d = canonicalize(d)
    return diagonal_ok(d.cells, d.dim)


def intersect(d1: DBM, d2: DBM) -> DBM:
    """Cell-wise minimum; the result is not canonical."""
    if d1.dim != d2.dim:
        raise DimensionError(f"cannot intersect {d1.dim}x{d1.dim} with {d2.dim}x{d2.dim}")
    return DBM(d1.dim, [a if a < b else b for a, b in zip(d1.cells, d2.cells)])


def _require_closed(d: DBM, op: str) -> None:
    if not d.canonical and d.partial is None:
        raise CanonicalFormError(f"{op} requires a canonical DBM")


def up(d: DBM) -> DBM:
    """Delay: drop every upper bound ``xi - x0``.  Keeps the closure flag."""
    _require_closed(d, "up")
    n = d.dim
    cells = list(d.cells)
    for i in range(1, n):
        cells[i * n] = INF
    return DBM(n, cells, canonical=d.canonical, partial=d.partial)


def reset(d: DBM, clocks: Iterable[int]) -> DBM:
    """Set the given clock indices to zero by copying row and column 0."""
    _require_closed(d, "reset")
    n = d.dim
    clocks = sorted(set(clocks))
    for c in clocks:
        if not 0 < c < n:
            raise DimensionError(f"cannot reset clock index {c} in a {n}x{n} DBM")
    cells = list(d.cells)
    reset_cells(cells, n, clocks)
    return DBM(n, cells, canonical=d.canonical, partial=d.partial)


def reset_cells(cells: list[int], n: int, clocks: Sequence[int]) -> None:
    for c in clocks:
        cn = c * n
        for k in range(n):
            cells[cn + k] = cells[k]
            cells[k * n + c] = cells[k * n]
        cells[cn + c] = LE_ZERO


def reset_by_table(d: DBM, clocks: Iterable[int]) -> DBM:
    """Reset applying the four-case cell table literally (no restoration)."""
    n = d.dim
    lam = set(clocks)
    src = d.cells
    cells = list(src)
    for j in range(n):
        for k in range(n):
            if j in lam and k in lam:
                cells[j * n + k] = LE_ZERO
            elif j in lam:
                cells[j * n + k] = src[k]
            elif k in lam:
                cells[j * n + k] = src[j * n]
    return DBM(n, cells)


def includes(d1: DBM, d2: DBM) -> bool:
    """True iff the zone of ``d2`` is contained in the zone of ``d1``."""
    if d1.dim != d2.dim:
        raise DimensionError("inclusion between DBMs of different dimension")
    if not (d1.canonical and d2.canonical):
        raise CanonicalFormError("inclusion is only decided on canonical DBMs")
    return all(b <= a for a, b in zip(d1.cells, d2.cells))


def upper_bound(d: DBM, i: int) -> Bound:
    if not 0 < i < d.dim:
        raise DimensionError(f"no clock with index {i}")
    return decode(d.cells[i * d.dim])


def lower_bound(d: DBM, i: int) -> Bound:
    if not 0 <= i < d.dim:
        raise DimensionError(f"no clock with index {i}")
    return decode(d.cells[i])
