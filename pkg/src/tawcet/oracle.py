"""Reference analyses used to cross-check the engine.

``oracle_zone_explore`` runs an exact breadth-first zone exploration with
plain DBM operations and no extrapolation, so it only terminates on models
whose exact zone graph is finite.  ``oracle_discrete`` enumerates integer
delays, which is complete for models without strict constraints.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .dbm import (DBM, INF, Bound, canonicalize, dbm_zero, decode, diagonal_ok, intersect,
                  reset, up)
from .engine import INFINITE, UNKNOWN, ExecTime, Kind, prepare
from .model import Constraint, TimedAutomaton, max_constant
from .successor import guard_to_dbm

DEFAULT_MAX_STEPS = 10_000


class StrictConstraintError(ValueError):
    pass


@dataclass
class OracleVerdict:
    bcet: ExecTime
    wcet: ExecTime
    capped: bool
    max_delta_seen: Bound
    states: int = 0
    # (location, packed observer upper bound) in exploration order.
    trace: list[tuple[str, int]] = field(default_factory=list, repr=False)


def _exact_successor(z: DBM, inv_src: DBM, guard: DBM, resets, inv_tgt: DBM) -> DBM | None:
    d = canonicalize(intersect(intersect(up(z), inv_src), guard))
    if not diagonal_ok(d.cells, d.dim):
        return None
    d = canonicalize(intersect(reset(d, resets), inv_tgt))
    if not diagonal_ok(d.cells, d.dim):
        return None
    return d


def _idle_upper(z: DBM, inv: DBM, delta: int) -> int:
    d = canonicalize(intersect(up(z), inv))
    return d.cells[delta * d.dim]


def oracle_zone_explore(model, max_steps: int = DEFAULT_MAX_STEPS,
                        component: str | None = None) -> OracleVerdict:
    """Exact zone-graph exploration, capped at ``max_steps`` symbolic states."""
    a = prepare(model, component)
    n, delta, idx = a.dim, a.observer_index, a.clock_index
    inv = {l.name: guard_to_dbm(l.invariant, idx, n) for l in a.locations}
    edges = {l.name: [(e, guard_to_dbm(e.guard, idx, n), [idx[r] for r in e.resets])
                      for e in a.outgoing.get(l.name, ())] for l in a.locations}
    seen: set[tuple[str, tuple]] = set()
    queue: deque[tuple[str, DBM]] = deque()
    for loc in a.initial_locations:
        z = canonicalize(intersect(dbm_zero(n), inv[loc.name]))
        if diagonal_ok(z.cells, n) and (loc.name, z.cells) not in seen:
            seen.add((loc.name, z.cells))
            queue.append((loc.name, z))
    initial = set(seen)

    unbounded = False
    capped = False
    wcet_raw = None
    bcet_raw = None
    max_up = 1
    trace = []
    states = 0
    while queue:
        if states >= max_steps:
            capped = True
            break
        loc, z = queue.popleft()
        states += 1
        up_raw = z.cells[delta * n]
        trace.append((loc, up_raw))
        max_up = max(max_up, up_raw)
        succs = []
        for e, g, r in edges[loc]:
            s = _exact_successor(z, inv[loc], g, r, inv[e.target])
            if s is not None:
                succs.append((e.target, s))
        if not succs or a.location_map[loc].final:
            wcet_raw = up_raw if wcet_raw is None else max(wcet_raw, up_raw)
            low = z.cells[delta]
            bcet_raw = low if bcet_raw is None else max(bcet_raw, low)
            if (not succs and not a.location_map[loc].final and (loc, z.cells) in initial
                    and _idle_upper(z, inv[loc], delta) >= INF):
                unbounded = True
        for tgt, s in succs:
            if s.cells[delta * n] >= INF:
                unbounded = True
            key = (tgt, s.cells)
            if key not in seen:
                seen.add(key)
                queue.append((tgt, s))

    if unbounded:
        wcet = INFINITE
    elif capped:
        wcet = UNKNOWN
    else:
        wcet = ExecTime(Kind.FINITE, decode(wcet_raw if wcet_raw is not None else 1))
    if capped or bcet_raw is None:
        bcet = UNKNOWN
    else:
        bcet = ExecTime(Kind.FINITE, Bound(-(bcet_raw >> 1), not bcet_raw & 1))
    return OracleVerdict(bcet, wcet, capped, decode(max_up), states, trace)


def _check_closed(a: TimedAutomaton) -> None:
    for loc in a.locations:
        for c in loc.invariant:
            if c.is_strict:
                raise StrictConstraintError(f"invariant of {loc.name} has strict atom {c}")
    for e in a.edges:
        for c in e.guard:
            if c.is_strict:
                raise StrictConstraintError(f"guard of {e} has strict atom {c}")


def _holds(conj: tuple[Constraint, ...], v: tuple[int, ...], idx: dict[str, int]) -> bool:
    return all(c.holds(v[idx[c.clock] - 1]) for c in conj)


def oracle_discrete(model, horizon: int | None = None,
                    component: str | None = None) -> OracleVerdict:
    """Exhaustive integer-delay search; WCET is capped once time exceeds ``horizon``.

    Clock values are saturated at ``M + 1``, where every guard behaves alike.
    """
    a = prepare(model, component)
    _check_closed(a)
    m = max_constant(a)
    if horizon is None:
        horizon = m * (len(a.locations) + 1) * 4
    clocks = [c for c in a.clocks if c != a.observer]
    idx = {c: i + 1 for i, c in enumerate(clocks)}
    cap = m + 1

    def sat(v):
        return tuple(min(x, cap) for x in v)

    start = tuple(0 for _ in clocks)
    frontier = []
    for loc in a.initial_locations:
        if _holds(loc.invariant, start, idx):
            frontier.append((loc.name, start, 0))
    seen = set(frontier)
    initial = set(frontier)
    stack = list(frontier)
    capped = unbounded = False
    wcet = bcet = None
    max_delta = 0
    while stack:
        loc, v, t = stack.pop()
        max_delta = max(max_delta, t)
        location = a.location_map[loc]
        succs = []
        idles_forever = False
        d = 0
        while True:
            w = sat(tuple(x + d for x in v))
            if not _holds(location.invariant, w, idx):
                break
            for e in a.outgoing.get(loc, ()):
                if not _holds(e.guard, w, idx):
                    continue
                nv = tuple(0 if c in e.resets else w[i] for i, c in enumerate(clocks))
                if _holds(a.location_map[e.target].invariant, nv, idx):
                    succs.append((e.target, nv, t + d))
            if all(x >= cap for x in w):
                # Saturated: further delay changes nothing but the elapsed time.
                idles_forever = True
                if any(s[2] == t + d for s in succs):
                    unbounded = True
                break
            d += 1
        if not succs and not location.final and idles_forever and (loc, v, t) in initial:
            unbounded = True
        if not succs or location.final:
            wcet = t if wcet is None else max(wcet, t)
            bcet = t if bcet is None else min(bcet, t)
        for s in succs:
            if s[2] > horizon:
                capped = True
                continue
            if s not in seen:
                seen.add(s)
                stack.append(s)
    if unbounded:
        wcet_t = INFINITE
    elif capped:
        wcet_t = UNKNOWN
    else:
        wcet_t = ExecTime.finite(wcet if wcet is not None else 0)
    bcet_t = UNKNOWN if bcet is None else ExecTime.finite(bcet)
    return OracleVerdict(bcet_t, wcet_t, capped, Bound(max_delta), len(seen))
