"""Zone extrapolation and the observer-aware split canonicalization.

Cells of a DBM split into *dot* cells (neither index is the observer clock)
and *asterisk* cells (the observer's row and column).  The partial
operators only widen dot cells and never let asterisk cells tighten them,
which keeps the observer exact while the dot part stays in a finite
M-bounded domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .dbm import DBM, INF, LE_ZERO, CanonicalFormError, diagonal_ok, encode, Bound

NEG_INF = -math.inf


@dataclass(frozen=True)
class BoundsContext:
    """Extrapolation constants for one automaton.

    ``lower``/``upper`` map clock index to the maximal lower/upper constant
    (``-inf`` when the clock is never compared that way).  Index 0 is the
    reference clock and always maps to 0.
    """

    max_constant: int
    dim: int
    lower: Mapping[int, float] = field(default_factory=dict)
    upper: Mapping[int, float] = field(default_factory=dict)
    delta_index: int | None = None

    def clock_max(self, i: int) -> int:
        """Per-clock maximal constant; 0 when the clock is never compared."""
        if i == 0:
            return 0
        m = max(self.lower.get(i, NEG_INF), self.upper.get(i, NEG_INF))
        return 0 if m == NEG_INF else int(m)

    def lower_of(self, i: int) -> float:
        return 0 if i == 0 else self.lower.get(i, NEG_INF)

    def upper_of(self, i: int) -> float:
        return 0 if i == 0 else self.upper.get(i, NEG_INF)


def _lt(c: float) -> int:
    """Packed ``(c, <)``; ``c = +inf`` gives INF."""
    return INF if c == math.inf else 2 * int(c)


def _weight_gt(raw: int, c: float) -> bool:
    """``weight(raw) > c`` with ``INF`` above everything."""
    if raw >= INF:
        return True
    return (raw >> 1) > c


def _weight_lt(raw: int, c: float) -> bool:
    if raw >= INF:
        return False
    return (raw >> 1) < c


def _require_canonical(d: DBM) -> None:
    if not d.canonical and d.partial is None:
        raise CanonicalFormError("extrapolation expects a (partially) canonical DBM")


def extra_M(d: DBM, ctx: BoundsContext) -> DBM:
    """Classical M-extrapolation with the global maximal constant."""
    _require_canonical(d)
    n, m = d.dim, ctx.max_constant
    cells = list(d.cells)
    low = 2 * -m  # (-M, <)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            k = i * n + j
            raw = cells[k]
            if _weight_gt(raw, m):
                cells[k] = INF
            elif _weight_lt(raw, -m):
                cells[k] = low
    return DBM(n, cells)


def extra_LU(d: DBM, ctx: BoundsContext) -> DBM:
    """LU-extrapolation: row ``i`` widened against ``L(xi)``, column ``j`` against ``U(xj)``."""
    _require_canonical(d)
    n = d.dim
    cells = list(d.cells)
    for i in range(n):
        li = ctx.lower_of(i)
        for j in range(n):
            if i == j:
                continue
            k = i * n + j
            raw = cells[k]
            uj = ctx.upper_of(j)
            if _weight_gt(raw, li):
                cells[k] = INF
            elif raw < INF and -(raw >> 1) > uj:
                cells[k] = _lt(-uj)
    return DBM(n, cells)


def _extra_plus(d: DBM, lower_of, upper_of) -> DBM:
    # Shared five-case table; the M variant passes the per-clock M for both maps.
    _require_canonical(d)
    n = d.dim
    src = d.cells
    cells = list(src)
    for i in range(n):
        li = lower_of(i)
        row_above = -(src[i] >> 1) > li  # -m_{0,i} > bound(x_i)
        for j in range(n):
            if i == j:
                continue
            k = i * n + j
            raw = src[k]
            uj = upper_of(j)
            col_above = -(src[j] >> 1) > uj  # -m_{0,j} > bound(x_j)
            if _weight_gt(raw, li):
                cells[k] = INF
            elif row_above:
                cells[k] = INF
            elif col_above and i != 0:
                cells[k] = INF
            elif col_above and i == 0:
                cells[k] = _lt(-uj)
    return DBM(n, cells)


def extra_M_plus(d: DBM, ctx: BoundsContext) -> DBM:
    return _extra_plus(d, ctx.clock_max, ctx.clock_max)


def extra_LU_plus(d: DBM, ctx: BoundsContext) -> DBM:
    return _extra_plus(d, ctx.lower_of, ctx.upper_of)


def _delta(ctx: BoundsContext) -> int:
    if ctx.delta_index is None:
        raise ValueError("partial extrapolation needs the observer clock index")
    return ctx.delta_index


def mextra_cells(cells: list[int], n: int, m: int, delta: int) -> list[tuple[int, int]]:
    """In-place partial M-extrapolation of dot cells; returns the changed cells."""
    changed = []
    low = 2 * -m
    for j in range(n):
        if j == delta:
            continue
        jn = j * n
        for k in range(n):
            if k == delta or k == j:
                continue
            raw = cells[jn + k]
            if raw >= INF:
                continue
            w = raw >> 1
            if w > m:
                cells[jn + k] = INF
                changed.append((j, k))
            elif w < -m:
                cells[jn + k] = low
                changed.append((j, k))
    return changed


def mextra_M(d: DBM, ctx: BoundsContext) -> tuple[DBM, list[tuple[int, int]]]:
    """Partial M-extrapolation: dot cells only, observer row/column untouched."""
    _require_canonical(d)
    cells = list(d.cells)
    changed = mextra_cells(cells, d.dim, ctx.max_constant, _delta(ctx))
    return DBM(d.dim, cells), changed


def mclose(cells: list[int], n: int, delta: int) -> None:
    """In-place split tightening.

    Dot cells relax only through dot intermediates; observer cells relax
    through every intermediate.  The intermediate loop is outermost so each
    phase is a complete shortest-path closure.  Relaxing through the observer
    itself could only touch observer cells, whose paths then have the observer
    as an endpoint, so that phase never changes anything and is skipped.
    """
    for k in range(n):
        if k == delta:
            continue
        kn = k * n
        row_k = cells[kn:kn + n]
        for p in range(n):
            pn = p * n
            dpk = cells[pn + k]
            if dpk >= INF:
                continue
            lo = dpk & 1
            cells[pn:pn + n] = [
                x if y >= INF or x <= (t := dpk + y - (lo | y & 1)) else t
                for x, y in zip(cells[pn:pn + n], row_k)]


def mcanon(d: DBM, ctx: BoundsContext) -> DBM:
    delta = _delta(ctx)
    cells = list(d.cells)
    mclose(cells, d.dim, delta)
    return DBM(d.dim, cells, partial=delta)


def mclose_changed(cells: list[int], n: int, delta: int,
                   changed: Sequence[tuple[int, int]]) -> None:
    """Re-tighten only the cells widened by extrapolation (dot intermediates)."""
    if not changed:
        return
    for k in range(n):
        if k == delta:
            continue
        for p, q in changed:
            dpk = cells[p * n + k]
            dkq = cells[k * n + q]
            if dpk >= INF or dkq >= INF:
                continue
            s = dpk + dkq - ((dpk | dkq) & 1)
            if s < cells[p * n + q]:
                cells[p * n + q] = s


def mcanon_after_extrapolation(d: DBM, ctx: BoundsContext,
                               changed: Iterable[tuple[int, int]]) -> DBM:
    delta = _delta(ctx)
    cells = list(d.cells)
    mclose_changed(cells, d.dim, delta, list(changed))
    return DBM(d.dim, cells, partial=delta)


def dot_cells(d: DBM, delta: int) -> tuple[int, ...]:
    """The dot sub-matrix (observer row and column removed), row-major."""
    n = d.dim
    return tuple(d.cells[i * n + j] for i in range(n) if i != delta
                 for j in range(n) if j != delta)


def is_partially_canonical(d: DBM, delta: int) -> bool:
    """Split triangle inequality: dot cells over dot paths, observer cells over all."""
    n = d.dim
    c = d.cells
    if not diagonal_ok(c, n):
        return False
    for p in range(n):
        for q in range(n):
            star = p == delta or q == delta
            cur = c[p * n + q]
            for k in range(n):
                if k == delta and not star:
                    continue
                a, b = c[p * n + k], c[k * n + q]
                if a >= INF or b >= INF:
                    continue
                if a + b - ((a | b) & 1) < cur:
                    return False
    return True


def in_m_form(d: DBM, m: int, delta: int | None = None) -> bool:
    """Every (non-observer) cell is within ``[-M, M]`` or infinite."""
    n = d.dim
    for i in range(n):
        for j in range(n):
            if delta is not None and delta in (i, j):
                continue
            raw = d.cells[i * n + j]
            if raw < INF and not -m <= (raw >> 1) <= m:
                return False
    return True
