"""Zone successors along an edge.

The pipeline follows the standard order: delay, source invariant, guard,
tighten and check, reset, target invariant, tighten, and (partial variant
only) extrapolate, re-tighten the widened cells and check again.  An empty
successor is reported as ``None``.
"""

from __future__ import annotations

from collections import Counter
from typing import Callable, Sequence

from .dbm import DBM, INF, LE_ZERO, DimensionError, close, diagonal_ok, reset_cells, unconstrained_cells
from .extrapolation import BoundsContext, mclose, mclose_changed, mextra_cells
from .model import Constraint, Edge, Guard, TimedAutomaton

STEP_NAMES = ("delay", "source invariant", "guard", "tighten", "reset",
              "target invariant", "tighten", "extrapolate")


class NotACycleError(ValueError):
    pass


def guard_cells(guard: Guard, clock_index: dict[str, int], dim: int) -> list[tuple[int, int]]:
    """Packed ``(cell offset, bound)`` pairs for a conjunction; ``==`` yields two."""
    out = []
    for c in guard:
        if c.minus is not None:
            raise ValueError(f"diagonal constraint {c} is not supported")
        i = clock_index[c.clock]
        if c.op in ("<=", "<", "=="):
            out.append((i * dim, 2 * c.constant + (0 if c.op == "<" else 1)))
        if c.op in (">=", ">", "=="):
            out.append((i, -2 * c.constant + (0 if c.op == ">" else 1)))
    return out


def guard_to_dbm(guard: Guard, clock_index: dict[str, int], dim: int) -> DBM:
    cells = unconstrained_cells(dim)
    for k, raw in guard_cells(guard, clock_index, dim):
        if raw < cells[k]:
            cells[k] = raw
    return DBM(dim, cells)


def _constrain(cells: list[int], pairs: Sequence[tuple[int, int]]) -> bool:
    changed = False
    for k, raw in pairs:
        if raw < cells[k]:
            cells[k] = raw
            changed = True
    return changed


class Stepper:
    """Successor computations for one automaton, with guards pre-compiled."""

    def __init__(self, automaton: TimedAutomaton, ctx: BoundsContext | None = None,
                 stats: Counter | None = None):
        self.automaton = automaton
        self.ctx = ctx
        self.dim = automaton.dim
        self.stats = stats if stats is not None else Counter()
        idx = automaton.clock_index
        self._inv = {loc.name: guard_cells(loc.invariant, idx, self.dim)
                     for loc in automaton.locations}
        self._edges: dict[Edge, tuple[list, list[int]]] = {}
        for e in automaton.edges:
            self._edges[e] = (guard_cells(e.guard, idx, self.dim),
                              sorted({idx[r] for r in e.resets}))

    def _compiled(self, e: Edge):
        try:
            return self._edges[e]
        except KeyError:
            idx = self.automaton.clock_index
            comp = (guard_cells(e.guard, idx, self.dim), sorted({idx[r] for r in e.resets}))
            if self.automaton.observer_index in comp[1]:
                raise ValueError("the observer clock cannot be reset")
            self._edges[e] = comp
            return comp

    def _delta(self) -> int:
        if self.ctx is None or self.ctx.delta_index is None:
            raise ValueError("partial successors need a context with the observer index")
        return self.ctx.delta_index

    # -- tightening strategies -------------------------------------------------

    def _full(self, cells: list[int]) -> None:
        self.stats["canonicalize"] += 1
        close(cells, self.dim)

    def _split(self, cells: list[int]) -> None:
        self.stats["mcanon"] += 1
        mclose(cells, self.dim, self._delta())

    # -- pipeline --------------------------------------------------------------

    def _run(self, d: DBM, e: Edge, tighten: Callable[[list[int]], None],
             extrapolate: str | None, trace: list | None) -> list[int] | None:
        if d.dim != self.dim:
            raise DimensionError(f"zone has dimension {d.dim}, automaton needs {self.dim}")
        n = self.dim
        guard, resets = self._compiled(e)
        stats = self.stats
        cells = list(d.cells)

        def snap(step):
            if trace is not None:
                trace.append((step, DBM(n, cells)))

        for i in range(1, n):
            cells[i * n] = INF
        stats["up"] += 1
        snap("delay")
        # Delay and reset keep a closed matrix closed, so tightening is only
        # needed when an intersection actually lowered a cell.
        dirty = _constrain(cells, self._inv[e.source])
        stats["intersect"] += 1
        snap("source invariant")
        dirty = _constrain(cells, guard) or dirty
        stats["intersect"] += 1
        snap("guard")
        if dirty or not (d.canonical or d.partial is not None):
            tighten(cells)
        stats["consistency"] += 1
        snap("tighten")
        if not diagonal_ok(cells, n):
            return None
        if resets:
            reset_cells(cells, n, resets)
            stats["reset"] += 1
        snap("reset")
        dirty = _constrain(cells, self._inv[e.target])
        stats["intersect"] += 1
        snap("target invariant")
        if dirty:
            tighten(cells)
        stats["consistency"] += 1
        snap("tighten")
        if not diagonal_ok(cells, n):
            return None
        if extrapolate is not None:
            delta = self._delta()
            changed = mextra_cells(cells, n, self.ctx.max_constant, delta)
            stats["extrapolate"] += 1
            if extrapolate == "changed":
                if changed:
                    stats["mcanon_changed"] += 1
                    mclose_changed(cells, n, delta, changed)
            else:
                tighten(cells)
            stats["consistency"] += 1
            snap("extrapolate")
            if not diagonal_ok(cells, n):
                return None
        return cells

    def exact(self, d: DBM, e: Edge, trace: list | None = None) -> DBM | None:
        cells = self._run(d, e, self._full, None, trace)
        return None if cells is None else DBM(self.dim, cells, canonical=True)

    def partial(self, d: DBM, e: Edge, trace: list | None = None) -> DBM | None:
        cells = self._run(d, e, self._split, "changed", trace)
        return None if cells is None else DBM(self.dim, cells, partial=self._delta())

    def classical(self, d: DBM, e: Edge, trace: list | None = None) -> DBM | None:
        """Observer exempt from extrapolation but fully re-canonicalized afterwards."""
        cells = self._run(d, e, self._full, "full", trace)
        return None if cells is None else DBM(self.dim, cells, canonical=True)

    def initial(self, split: bool) -> list[tuple[str, DBM]]:
        """Zero zone at each initial location, intersected with its invariant."""
        out = []
        n = self.dim
        for loc in self.automaton.initial_locations:
            cells = [LE_ZERO] * (n * n)
            _constrain(cells, self._inv[loc.name])
            if split:
                self._split(cells)
            else:
                self._full(cells)
            if diagonal_ok(cells, n):
                if split:
                    out.append((loc.name, DBM(n, cells, partial=self._delta())))
                else:
                    out.append((loc.name, DBM(n, cells, canonical=True)))
        return out

    def idle_upper(self, d: DBM, location: str, clock: int) -> int:
        """Packed upper bound of ``clock`` after letting time pass at ``location``."""
        n = self.dim
        cells = list(d.cells)
        for i in range(1, n):
            cells[i * n] = INF
        _constrain(cells, self._inv[location])
        close(cells, n)
        return cells[clock * n]


def _stepper(automaton: TimedAutomaton, ctx: BoundsContext | None = None) -> Stepper:
    return Stepper(automaton, ctx)


def succ_exact(d: DBM, e: Edge, automaton: TimedAutomaton) -> DBM | None:
    """Exact successor zone: full canonicalization, no extrapolation."""
    return _stepper(automaton).exact(d, e)


def succ_partial(d: DBM, e: Edge, automaton: TimedAutomaton, ctx: BoundsContext) -> DBM | None:
    """Successor with split canonicalization and observer-preserving extrapolation."""
    return _stepper(automaton, ctx).partial(d, e)


def succ_classical(d: DBM, e: Edge, automaton: TimedAutomaton, ctx: BoundsContext) -> DBM | None:
    return _stepper(automaton, ctx).classical(d, e)


def check_cycle(edges: Sequence[Edge]) -> None:
    if not edges:
        raise NotACycleError("empty edge sequence")
    for a, b in zip(edges, [*edges[1:], edges[0]]):
        if a.target != b.source:
            raise NotACycleError(f"{a} is not followed by {b}")


def succ_cycle(z: DBM, edges: Sequence[Edge], automaton: TimedAutomaton,
               ctx: BoundsContext) -> DBM | None:
    """Zone after one full iteration of a cycle of edges."""
    check_cycle(edges)
    stepper = _stepper(automaton, ctx)
    for e in edges:
        z = stepper.partial(z, e)
        if z is None:
            return None
    return z
