"""Timed automata, networks of automata and their static analyses."""

from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

OBSERVER = "δ"
OPS = ("<", "<=", "==", ">=", ">")


@dataclass(frozen=True)
class Constraint:
    """``clock op constant``; ``minus`` is set only for diagonal atoms, which
    are representable so that validation can reject them."""

    clock: str
    op: str
    constant: int
    minus: str | None = None

    def __str__(self):
        lhs = self.clock if self.minus is None else f"{self.clock} - {self.minus}"
        return f"{lhs} {self.op} {self.constant}"

    @property
    def is_strict(self) -> bool:
        return self.op in ("<", ">")

    def holds(self, value: float) -> bool:
        c = self.constant
        return {"<": value < c, "<=": value <= c, "==": value == c,
                ">=": value >= c, ">": value > c}[self.op]


Guard = tuple[Constraint, ...]


@dataclass(frozen=True)
class Sync:
    channel: str
    direction: str  # "emit" | "receive"

    def __str__(self):
        return self.channel + ("!" if self.direction == "emit" else "?")


@dataclass(frozen=True)
class Location:
    name: str
    invariant: Guard = ()
    initial: bool = False
    final: bool = False


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guard: Guard = ()
    resets: tuple[str, ...] = ()
    sync: Sync | None = None
    label: str | None = None

    def __str__(self):
        return f"{self.source} -> {self.target}"


@dataclass(frozen=True)
class TimedAutomaton:
    name: str
    clocks: tuple[str, ...]
    locations: tuple[Location, ...]
    edges: tuple[Edge, ...] = ()
    observer: str | None = None

    def __post_init__(self):
        # Locations are kept sorted so that equality ignores declaration order.
        object.__setattr__(self, "locations",
                           tuple(sorted(self.locations, key=lambda l: l.name)))

    @cached_property
    def location_map(self) -> dict[str, Location]:
        return {loc.name: loc for loc in self.locations}

    @cached_property
    def outgoing(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {loc.name: [] for loc in self.locations}
        for e in self.edges:
            out.setdefault(e.source, []).append(e)
        return out

    @cached_property
    def clock_index(self) -> dict[str, int]:
        """DBM index of each clock; 0 is the reference clock."""
        return {c: i + 1 for i, c in enumerate(self.clocks)}

    @property
    def dim(self) -> int:
        return len(self.clocks) + 1

    @property
    def initial_locations(self) -> list[Location]:
        return [loc for loc in self.locations if loc.initial]

    @property
    def observer_index(self) -> int | None:
        return None if self.observer is None else self.clock_index[self.observer]

    def clock_names(self) -> list[str]:
        """Display names by DBM index; the reference clock is ``x0`` unless taken."""
        ref = "x0"
        while ref in self.clocks:
            ref = "_" + ref
        return [ref, *self.clocks]


@dataclass(frozen=True)
class Network:
    name: str
    components: tuple[TimedAutomaton, ...]

    @property
    def channels(self) -> set[str]:
        return {e.sync.channel for a in self.components for e in a.edges if e.sync}


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _constraints(a: TimedAutomaton) -> Iterable[tuple[str, Constraint]]:
    for loc in a.locations:
        for c in loc.invariant:
            yield f"invariant of {loc.name}", c
    for e in a.edges:
        for c in e.guard:
            yield f"guard of {e}", c


def validate(a: TimedAutomaton) -> ValidationReport:
    report = ValidationReport()
    v, w = report.violations, report.warnings
    names = [loc.name for loc in a.locations]
    for dup in sorted({n for n in names if names.count(n) > 1}):
        v.append(f"duplicate location {dup}")
    if len(set(a.clocks)) != len(a.clocks):
        v.append("duplicate clock declaration")
    if not a.initial_locations:
        v.append("no initial location")
    clocks = set(a.clocks)
    used = set()
    for where, c in _constraints(a):
        if c.minus is not None:
            v.append(f"{where}: diagonal constraint {c} is not supported")
            continue
        if c.op not in OPS:
            v.append(f"{where}: unknown comparison {c.op!r}")
        if not isinstance(c.constant, int) or c.constant < 0:
            v.append(f"{where}: constant {c.constant!r} is not a natural number")
        if c.clock not in clocks:
            v.append(f"{where}: undeclared clock {c.clock}")
        if a.observer is not None and c.clock == a.observer:
            v.append(f"{where}: the observer clock must not be constrained")
        used.add(c.clock)
    for loc in a.locations:
        if any(c.op in (">", ">=") for c in loc.invariant):
            w.append(f"invariant of {loc.name} has a lower bound; "
                     "WCET soundness is only argued for upper-bound invariants")
    for e in a.edges:
        if e.source not in a.location_map:
            v.append(f"edge {e}: unknown source location {e.source}")
        if e.target not in a.location_map:
            v.append(f"edge {e}: unknown target location {e.target}")
        for r in e.resets:
            if a.observer is not None and r == a.observer:
                v.append(f"edge {e}: the observer clock must never be reset")
            elif r not in clocks:
                v.append(f"edge {e}: reset of undeclared clock {r}")
            used.add(r)
    if OBSERVER in clocks and a.observer != OBSERVER:
        v.append(f"clock name {OBSERVER} is reserved for the observer")
    for c in a.clocks:
        if c not in used and c != a.observer:
            w.append(f"clock {c} is declared but never used")
    return report


def validate_network(n: Network) -> ValidationReport:
    report = ValidationReport()
    names = [a.name for a in n.components]
    for dup in sorted({x for x in names if names.count(x) > 1}):
        report.violations.append(f"duplicate component {dup}")
    for a in n.components:
        r = validate(a)
        report.violations += [f"{a.name}: {m}" for m in r.violations]
        report.warnings += [f"{a.name}: {m}" for m in r.warnings]
    for chan, missing in unmatched_channels(n):
        report.warnings.append(f"channel {chan} has no {missing} partner")
    return report


def unmatched_channels(n: Network) -> list[tuple[str, str]]:
    """Channels whose emitters have no receiver in another component, or vice versa."""
    out = []
    for chan in sorted(n.channels):
        emit = {i for i, a in enumerate(n.components)
                for e in a.edges if e.sync and e.sync.channel == chan and e.sync.direction == "emit"}
        recv = {i for i, a in enumerate(n.components)
                for e in a.edges if e.sync and e.sync.channel == chan and e.sync.direction == "receive"}
        if emit and not any(j != i for i in emit for j in recv):
            out.append((chan, "receive"))
        if recv and not any(j != i for i in recv for j in emit):
            out.append((chan, "emit"))
    return out


def max_constant(a: TimedAutomaton) -> int:
    consts = [c.constant for _, c in _constraints(a) if c.clock != a.observer]
    return max(consts, default=0)


def lu_bounds(a: TimedAutomaton) -> tuple[dict[str, float], dict[str, float]]:
    """Per-clock maximal lower and upper constants, ``-inf`` when absent."""
    lower = {c: -math.inf for c in a.clocks}
    upper = {c: -math.inf for c in a.clocks}
    for _, c in _constraints(a):
        if c.clock not in lower:
            continue
        if c.op in (">", ">=", "=="):
            lower[c.clock] = max(lower[c.clock], c.constant)
        if c.op in ("<", "<=", "=="):
            upper[c.clock] = max(upper[c.clock], c.constant)
    return lower, upper


def add_observer_clock(a: TimedAutomaton) -> TimedAutomaton:
    if OBSERVER in a.clocks:
        raise ValueError(f"{a.name} already has a clock named {OBSERVER}")
    return replace(a, clocks=(*a.clocks, OBSERVER), observer=OBSERVER)


def compose(n: Network, final_component: str | None = None) -> TimedAutomaton:
    """Synchronous product restricted to discretely reachable location tuples.

    Clocks with the same name are shared.  A product location is final when
    every component is final, or only ``final_component`` when given.
    """
    comps = n.components
    if len(comps) == 1 and final_component in (None, comps[0].name):
        return comps[0]
    names = [a.name for a in comps]
    if final_component is not None and final_component not in names:
        raise ValueError(f"no component named {final_component}")
    for chan, missing in unmatched_channels(n):
        logger.warning("channel %s has no %s partner; its edges never fire", chan, missing)
    clocks = tuple(dict.fromkeys(c for a in comps for c in a.clocks))

    def loc_name(t: Sequence[str]) -> str:
        return ",".join(t)

    def product_location(t: tuple[str, ...], initial: bool) -> Location:
        parts = [a.location_map[x] for a, x in zip(comps, t)]
        if final_component is None:
            final = all(p.final for p in parts)
        else:
            final = parts[names.index(final_component)].final
        inv = tuple(c for p in parts for c in p.invariant)
        return Location(loc_name(t), inv, initial=initial, final=final)

    starts = list(itertools.product(*[[l.name for l in a.initial_locations] for a in comps]))
    seen = dict.fromkeys(starts)
    queue = deque(starts)
    edges: list[Edge] = []
    while queue:
        t = queue.popleft()
        moves = []
        for i, a in enumerate(comps):
            for e in a.outgoing.get(t[i], []):
                if e.sync is None:
                    moves.append(({i: e}, e.guard, e.resets, e.label))
                elif e.sync.direction == "emit":
                    for j, b in enumerate(comps):
                        if j == i:
                            continue
                        for f in b.outgoing.get(t[j], []):
                            if f.sync and f.sync.channel == e.sync.channel \
                                    and f.sync.direction == "receive":
                                resets = tuple(dict.fromkeys(e.resets + f.resets))
                                moves.append(({i: e, j: f}, e.guard + f.guard, resets,
                                              e.sync.channel))
        for parts, guard, resets, label in moves:
            nt = tuple(parts[i].target if i in parts else x for i, x in enumerate(t))
            edges.append(Edge(loc_name(t), loc_name(nt), guard, resets, None, label))
            if nt not in seen:
                seen[nt] = None
                queue.append(nt)
    start_set = set(starts)
    locations = tuple(product_location(t, t in start_set) for t in seen)
    return TimedAutomaton(n.name, clocks, locations, tuple(edges))
