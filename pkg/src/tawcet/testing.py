"""Random generators for models and zones, shared by the test suite."""

from __future__ import annotations

import random

from .dbm import DBM, close, diagonal_ok, unconstrained_cells
from .model import Constraint, Edge, Location, TimedAutomaton


def random_canonical_zone(rng: random.Random, clocks: int, max_const: int = 30,
                          atoms: int | None = None, strict: bool = True) -> DBM:
    """A consistent canonical DBM over ``clocks`` clocks plus the reference clock."""
    n = clocks + 1
    while True:
        cells = unconstrained_cells(n)
        for _ in range(atoms if atoms is not None else rng.randint(0, 2 * n)):
            i, j = rng.sample(range(n), 2)
            w = rng.randint(-max_const, max_const)
            raw = 2 * w + (rng.randint(0, 1) if strict else 1)
            k = i * n + j
            cells[k] = min(cells[k], raw)
        close(cells, n)
        if diagonal_ok(cells, n):
            return DBM(n, cells, canonical=True)


def _atom(rng: random.Random, clock: str, max_const: int, ops, low: int = 0) -> Constraint:
    return Constraint(clock, rng.choice(ops), rng.randint(low, max_const))


def random_automaton(rng: random.Random, *, max_clocks: int = 4, max_locations: int = 6,
                     max_const: int = 20, cycle: bool | None = None, strict: bool = True,
                     p_invariant: float = 0.85, name: str = "R") -> TimedAutomaton:
    """A desk-scale diagonal-free automaton, acyclic or with one back edge.

    Forward edges only go from lower to higher location numbers, so the only
    possible cycle is the one closed by the optional back edge.  Whether that
    cycle is finite is left to the caller to establish.
    """
    nclk = rng.randint(1, max_clocks)
    clocks = tuple(f"c{i}" for i in range(nclk))
    nloc = rng.randint(2, max_locations)
    names = [f"l{i}" for i in range(nloc)]
    upper_ops = ("<=", "<") if strict else ("<=",)
    lower_ops = (">=", ">", "==") if strict else (">=", "==")
    all_ops = upper_ops + lower_ops

    locs = []
    for i, nm in enumerate(names):
        final = i == nloc - 1 or rng.random() < 0.15
        inv = ()
        if i < nloc - 1 and rng.random() < p_invariant:
            inv = (_atom(rng, rng.choice(clocks), max_const, upper_ops, low=1),)
            if rng.random() < 0.2:
                inv += (_atom(rng, rng.choice(clocks), max_const, upper_ops, low=1),)
        locs.append(Location(nm, inv, initial=i == 0, final=final))

    edges = []
    for i in range(nloc - 1):
        for _ in range(rng.choice((1, 1, 2))):
            j = rng.randint(i + 1, nloc - 1)
            edges.append(_random_edge(rng, names[i], names[j], clocks, max_const, all_ops))
    if cycle is None:
        cycle = rng.random() < 0.5
    if cycle and nloc >= 2:
        j = rng.randint(1, nloc - 1)
        i = rng.randint(0, j)
        # Bound the cycle with an upper guard on a clock the back edge does not reset.
        bounded = rng.choice(clocks)
        guard = (Constraint(bounded, rng.choice(upper_ops), rng.randint(1, max_const)),)
        others = [c for c in clocks if c != bounded]
        resets = tuple(c for c in others if rng.random() < 0.6)
        edges.append(Edge(names[j], names[i], guard, resets, label="back"))
    return TimedAutomaton(name, clocks, tuple(locs), tuple(edges))


def _random_edge(rng, src, tgt, clocks, max_const, ops) -> Edge:
    guard = tuple(_atom(rng, rng.choice(clocks), max_const, ops)
                  for _ in range(rng.choice((0, 1, 1, 2))))
    resets = tuple(c for c in clocks if rng.random() < 0.35)
    return Edge(src, tgt, guard, resets)


def restricted_automaton(rng: random.Random, *, max_locations: int = 5, max_const: int = 8,
                         name: str = "D") -> TimedAutomaton:
    """Closed, acyclic automaton without partial deadlocks.

    Each non-final location bounds one clock from above and every outgoing
    guard is a lower bound on that clock below the invariant, so whenever a
    location is entered every edge out of it is eventually enabled.  Such
    models give the same answers under integer and dense time.
    """
    clocks = ("x", "y")
    nloc = rng.randint(2, max_locations)
    names = [f"l{i}" for i in range(nloc)]
    locs, edges = [], []
    for i, nm in enumerate(names):
        if i == nloc - 1:
            locs.append(Location(nm, (), initial=i == 0, final=True))
            continue
        c = rng.choice(clocks)
        u = rng.randint(1, max_const)
        locs.append(Location(nm, (Constraint(c, "<=", u),), initial=i == 0,
                             final=rng.random() < 0.15))
        for _ in range(rng.choice((1, 1, 2))):
            j = rng.randint(i + 1, nloc - 1)
            guard = (Constraint(c, ">=", rng.randint(0, u)),) if rng.random() < 0.8 else ()
            # Entering the target resets its bounded clock, so its invariant holds on entry.
            resets = tuple(x for x in clocks if rng.random() < 0.4)
            edges.append(Edge(nm, names[j], guard, resets))
    # Make every target invariant satisfiable on entry by resetting its clock.
    inv_clock = {l.name: l.invariant[0].clock for l in locs if l.invariant}
    fixed = []
    for e in edges:
        c = inv_clock.get(e.target)
        resets = e.resets if c is None or c in e.resets else e.resets + (c,)
        fixed.append(Edge(e.source, e.target, e.guard, resets))
    return TimedAutomaton(name, clocks, tuple(locs), tuple(fixed))


def random_walk(rng: random.Random, a: TimedAutomaton, max_length: int = 8) -> list[Edge]:
    """A random edge sequence following the location graph from an initial location."""
    loc = a.initial_locations[0].name
    walk = []
    for _ in range(rng.randint(1, max_length)):
        out = a.outgoing.get(loc)
        if not out:
            break
        e = rng.choice(out)
        walk.append(e)
        loc = e.target
    return walk
