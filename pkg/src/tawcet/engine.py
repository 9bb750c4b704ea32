"""Depth-first symbolic search for worst- and best-case execution times.

Each symbolic state carries a partially extrapolated zone over the model
clocks plus the observer clock.  The observer is never reset, constrained or
extrapolated, so its row and column in the zone record the exact elapsed
time.  Cycles are recognised when a successor repeats the extrapolated part
of a state on the current DFS path: with a strictly larger observer upper
bound the cycle lets time grow without limit; with an identical zone it is a
zeno repetition and is skipped.
"""

from __future__ import annotations

import enum
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

from .dbm import DBM, INF, Bound, decode, raw_add
from .extrapolation import BoundsContext, dot_cells
from .model import (Edge, Network, TimedAutomaton, add_observer_clock, compose, lu_bounds,
                    max_constant, validate)
from .successor import Stepper

logger = logging.getLogger(__name__)

STATE_CAP = 1_000_000


class InvalidModelError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class InvariantViolation(RuntimeError):
    """An internal consistency check of the search failed."""


class SearchLimitExceeded(RuntimeError):
    pass


class Kind(str, enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ExecTime:
    kind: Kind
    bound: Bound | None = None

    @classmethod
    def finite(cls, value: int, strict: bool = False) -> ExecTime:
        return cls(Kind.FINITE, Bound(value, strict))

    @property
    def is_finite(self) -> bool:
        return self.kind is Kind.FINITE

    @property
    def value(self) -> int | None:
        return int(self.bound.weight) if self.bound is not None else None

    @property
    def strict(self) -> bool | None:
        return self.bound.strict if self.bound is not None else None

    def render(self, relation: str = "<=") -> str:
        """``12 (<=)``; ``relation`` is the non-strict operator to print."""
        if self.kind is not Kind.FINITE:
            return self.kind.value
        op = relation.replace("=", "") if self.bound.strict else relation
        return f"{self.value} ({op})"

    def __str__(self):
        return self.render()

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "value": self.value, "strict": self.strict}


INFINITE = ExecTime(Kind.INFINITE)
UNKNOWN = ExecTime(Kind.UNKNOWN)


def _from_upper(raw: int) -> ExecTime:
    return INFINITE if raw >= INF else ExecTime(Kind.FINITE, decode(raw))


def _from_lower(raw: int) -> ExecTime:
    """Convert the observer's ``x0 - δ`` cell into a lower execution time."""
    return ExecTime(Kind.FINITE, Bound(-(raw >> 1), not raw & 1))


@dataclass
class SymbolicState:
    location: str
    zone: DBM
    sts: int = 0
    id: int = 0
    parent: SymbolicState | None = None
    via: Edge | None = None

    def path(self) -> list[Edge]:
        edges = []
        s = self
        while s.via is not None:
            edges.append(s.via)
            s = s.parent
        return edges[::-1]


@dataclass
class Witness:
    """Evidence for an infinite verdict.

    ``kind == "cycle"``: ``cycle`` replays from ``start_zone`` at
    ``location`` back to the same extrapolated zone with a larger observer
    bound.  ``kind == "unbounded"``: time can pass without limit in
    ``location`` after following ``path``.
    """

    kind: str
    location: str
    path: list[Edge]
    cycle: list[Edge] = field(default_factory=list)
    start_zone: DBM | None = None
    end_zone: DBM | None = None

    def describe(self) -> str:
        if self.kind == "cycle":
            return "cycle witness: " + ", ".join(str(e) for e in self.cycle)
        return f"unbounded delay at {self.location}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "location": self.location,
                "path": [str(e) for e in self.path],
                "cycle": [str(e) for e in self.cycle]}


@dataclass
class GraphEdge:
    source: int
    target: int
    label: str
    kind: str  # tree | zeno | merged | divergent | unbounded


@dataclass
class ZoneGraph:
    clock_names: list[str]
    nodes: list[SymbolicState] = field(default_factory=list)
    edges: list[GraphEdge] = field(default_factory=list)
    witness_nodes: set[int] = field(default_factory=set)
    witness_edges: set[int] = field(default_factory=set)


@dataclass
class SearchResult:
    wcet: ExecTime | None = None
    bcet: ExecTime | None = None
    witness: Witness | None = None
    diagnostic: str | None = None
    stats: Counter = field(default_factory=Counter)
    graph: ZoneGraph | None = None


def context_for(a: TimedAutomaton) -> BoundsContext:
    idx = a.clock_index
    lower, upper = lu_bounds(a)
    return BoundsContext(
        max_constant=max_constant(a),
        dim=a.dim,
        lower={idx[c]: v for c, v in lower.items()},
        upper={idx[c]: v for c, v in upper.items()},
        delta_index=a.observer_index,
    )


def prepare(model: TimedAutomaton | Network, component: str | None = None) -> TimedAutomaton:
    """Validate, flatten a network and attach the observer clock."""
    if isinstance(model, Network):
        from .model import validate_network
        report = validate_network(model)
        if not report.ok:
            raise InvalidModelError(report.violations)
        model = compose(model, component)
    report = validate(model)
    if not report.ok:
        raise InvalidModelError(report.violations)
    if model.observer is None:
        model = add_observer_clock(model)
    return model


class _Search:
    def __init__(self, a: TimedAutomaton, mode: str, record_graph: bool,
                 check_invariants: bool, max_states: int, confirm_cycles: bool = True):
        self.a = a
        self.mode = mode
        self.ctx = context_for(a)
        self.delta = self.ctx.delta_index
        n = a.dim
        # Observer row (upper envelope) and column (lower envelope) offsets.
        self.row = [self.delta * n + j for j in range(n) if j != self.delta]
        self.col = [i * n + self.delta for i in range(n) if i != self.delta]
        self.stats: Counter = Counter()
        self.stepper = Stepper(a, self.ctx, self.stats)
        self.check = check_invariants
        self.confirm = confirm_cycles
        self.max_states = max_states
        self.graph = ZoneGraph(a.clock_names()) if record_graph else None
        self.by_dot: dict[tuple, list[SymbolicState]] = {}
        self.seen: dict[tuple[str, tuple[int, ...]], SymbolicState] = {}
        self.stack: list[tuple[SymbolicState, Iterator]] = []
        self.best: int | None = None  # packed observer cell of the best final state
        self.finals = 0

    # -- bookkeeping -------------------------------------------------------------

    def _new_state(self, loc: str, zone: DBM, key: tuple, parent=None,
                   via=None) -> SymbolicState:
        s = SymbolicState(loc, zone, 0, len(self.seen), parent, via)
        self.seen[(loc, zone.cells)] = s
        self.by_dot.setdefault(key, []).append(s)
        self.stats["states"] += 1
        if len(self.seen) > self.max_states:
            raise SearchLimitExceeded(f"more than {self.max_states} symbolic states")
        if self.graph is not None:
            self.graph.nodes.append(s)
            if parent is not None:
                self.graph.edges.append(GraphEdge(parent.id, s.id, str(via), "tree"))
        return s

    def _graph_edge(self, src: SymbolicState, tgt_id: int, e: Edge, kind: str):
        if self.graph is not None:
            self.graph.edges.append(GraphEdge(src.id, tgt_id, str(e), kind))
            return len(self.graph.edges) - 1
        return None

    def _successors(self, s: SymbolicState) -> list[tuple[Edge, DBM]]:
        out = []
        for e in self.a.outgoing.get(s.location, ()):
            z = self.stepper.partial(s.zone, e)
            self.stats["successors"] += 1
            if z is not None:
                out.append((e, z))
        return out

    def _upper(self, z: DBM) -> int:
        return z.cells[self.delta * z.dim]

    def _lower(self, z: DBM) -> int:
        return z.cells[self.delta]

    def _check_sts(self):
        if not self.check:
            return
        on_stack = {id(s) for s, _ in self.stack}
        for states in self.by_dot.values():
            for s in states:
                if (s.sts == 1) != (id(s) in on_stack):
                    raise InvariantViolation(f"state {s.id} has sts={s.sts} but stack membership "
                                             f"{id(s) in on_stack}")

    # -- verdict helpers ---------------------------------------------------------

    def _record_final(self, s: SymbolicState):
        self.finals += 1
        raw = self._upper(s.zone) if self.mode == "wcet" else self._lower(s.zone)
        if self.best is None or raw > self.best:
            self.best = raw

    def _cycle_witness(self, anc: SymbolicState, parent: SymbolicState, e: Edge,
                       z: DBM) -> Witness:
        cycle = self._cycle_edges(anc, parent, e)
        if self.graph is not None:
            self.graph.witness_nodes.add(anc.id)
            s = parent
            while s is not anc:
                self.graph.witness_nodes.add(s.id)
                s = s.parent
        return Witness("cycle", anc.location, anc.path(), cycle, anc.zone, z)

    def _enter(self, s: SymbolicState) -> list[tuple[Edge, DBM]]:
        s.sts = 1
        succs = self._successors(s)
        if not succs or self.a.location_map[s.location].final:
            self._record_final(s)
        return succs

    # -- main loop ---------------------------------------------------------------

    def run(self) -> SearchResult:
        started = time.perf_counter()
        result = SearchResult(stats=self.stats, graph=self.graph)
        verdict = None
        for loc, z0 in self.stepper.initial(split=True):
            if (loc, z0.cells) in self.seen:
                continue
            s0 = self._new_state(loc, z0, (loc, dot_cells(z0, self.delta)))
            succs = self._enter(s0)
            if (self.mode == "wcet" and not succs and not self.a.location_map[loc].final
                    and self.stepper.idle_upper(z0, loc, self.delta) >= INF):
                verdict = Witness("unbounded", loc, [])
                break
            self.stack.append((s0, iter(succs)))
            verdict = self._dfs()
            if verdict is not None:
                break
        self.stats["dbm_ops"] = sum(self.stats[k] for k in (
            "up", "intersect", "reset", "canonicalize", "mcanon", "mcanon_changed",
            "extrapolate", "consistency", "fixed_point_tests"))
        self.stats["wall_ms"] = round((time.perf_counter() - started) * 1000)
        if self.mode == "wcet":
            if verdict is not None:
                result.wcet = INFINITE
                result.witness = verdict
            else:
                result.wcet = _from_upper(self.best if self.best is not None else 1)
        else:
            if self.best is None:
                result.bcet = UNKNOWN
                result.diagnostic = "no final state is reachable"
            else:
                result.bcet = _from_lower(self.best)
        return result

    def _dfs(self) -> Witness | None:
        stack = self.stack
        wcet = self.mode == "wcet"
        while stack:
            s, pending = stack[-1]
            nxt = next(pending, None)
            if nxt is None:
                s.sts = 2
                stack.pop()
                continue
            e, z = nxt
            loc = e.target
            if wcet and self._upper(z) >= INF:
                self._check_sts()
                self._graph_edge(s, -1, e, "unbounded")
                if self.graph is not None:
                    self.graph.witness_nodes.update(x.id for x, _ in stack)
                return Witness("unbounded", loc, s.path() + [e], end_zone=z)
            if not wcet and self.best is not None and self._lower(z) <= self.best:
                # The observer is never reset, so this branch cannot finish earlier.
                self.stats["bound_pruned"] += 1
                continue
            key = (loc, dot_cells(z, self.delta))
            same_dot = self.by_dot.get(key, ())
            if wcet:
                hit = self._divergent(s, e, z, same_dot)
                if hit is not None:
                    self._check_sts()
                    w = self._cycle_witness(hit, s, e, z)
                    idx = self._graph_edge(s, hit.id, e, "divergent")
                    if idx is not None:
                        self.graph.witness_edges.add(idx)
                    return w
            prev = self.seen.get((loc, z.cells))
            if prev is not None:
                if prev.sts == 1:
                    self.stats["zeno_skips"] += 1
                    self._graph_edge(s, prev.id, e, "zeno")
                else:
                    self.stats["merged"] += 1
                    self._graph_edge(s, prev.id, e, "merged")
                continue
            dom = self._dominated(z, same_dot)
            if dom is not None:
                self.stats["dominated"] += 1
                self._graph_edge(s, dom.id, e, "merged")
                continue
            child = self._new_state(loc, z, key, s, e)
            stack.append((child, iter(self._enter(child))))
        return None

    def _divergent(self, parent: SymbolicState, e: Edge, z: DBM,
                   same_dot) -> SymbolicState | None:
        """An on-path state with the same dot part that ``z`` outgrows in the observer."""
        up = self._upper(z)
        for s in same_dot:
            self.stats["fixed_point_tests"] += 1
            if s.sts == 1 and up > self._upper(s.zone):
                if not self.confirm or self._confirm(s, parent, e, z):
                    return s
                self.stats["rejected_cycles"] += 1
        return None

    def _cycle_edges(self, anc: SymbolicState, parent: SymbolicState, e: Edge) -> list[Edge]:
        edges = [e]
        s = parent
        while s is not anc:
            edges.append(s.via)
            s = s.parent
        return edges[::-1]

    def _confirm(self, anc: SymbolicState, parent: SymbolicState, e: Edge, z: DBM) -> bool:
        """Check that repeating the cycle keeps raising the observer bound.

        A clock the cycle never resets keeps its distance to the observer or
        shrinks it, and its own upper bound is fixed by the repeated dot part,
        so a finite sum of the two caps the observer on every later iteration.
        Without such a cap the cycle is replayed once more as confirmation.
        """
        cycle = self._cycle_edges(anc, parent, e)
        reset = {c for edge in cycle for c in edge.resets}
        n, d = z.dim, self.delta
        cells = z.cells
        for name, x in self.a.clock_index.items():
            if x == d or name in reset:
                continue
            if raw_add(cells[d * n + x], cells[x * n]) < INF:
                return False
        nxt = z
        for edge in cycle:
            nxt = self.stepper.partial(nxt, edge)
            if nxt is None:
                return False
        return self._upper(nxt) > self._upper(z)

    def _dominated(self, z: DBM, same_dot) -> SymbolicState | None:
        """A state with the same dot part whose observer envelope covers ``z``.

        For WCET only finished states qualify and the observer row (upper
        envelope) must be at least as loose.  For BCET any explored state
        qualifies when its observer column (lower envelope) is at least as
        loose, since runs from ``z`` then finish no earlier.
        """
        if not same_dot:
            return None
        cells = z.cells
        if self.mode == "wcet":
            offsets, need_finished = self.row, True
        else:
            offsets, need_finished = self.col, False
        for s in same_dot:
            if need_finished and s.sts != 2:
                continue
            other = s.zone.cells
            if all(cells[k] <= other[k] for k in offsets):
                return s
        return None


def _analyze(model, mode: str, component: str | None, record_graph: bool,
             check_invariants: bool, max_states: int, confirm_cycles: bool) -> SearchResult:
    a = prepare(model, component)
    return _Search(a, mode, record_graph, check_invariants, max_states, confirm_cycles).run()


def analyze_wcet(model: TimedAutomaton | Network, component: str | None = None, *,
                 record_graph: bool = False, check_invariants: bool = False,
                 max_states: int = STATE_CAP, confirm_cycles: bool = True) -> SearchResult:
    """Worst-case execution time: the largest observer value over final states,
    or infinite when time can grow without bound on some run.

    ``confirm_cycles=False`` accepts every dot fixed point with a grown
    observer bound as divergent, without the boundedness check.
    """
    return _analyze(model, "wcet", component, record_graph, check_invariants, max_states,
                    confirm_cycles)


def analyze_bcet(model: TimedAutomaton | Network, component: str | None = None, *,
                 record_graph: bool = False, check_invariants: bool = False,
                 max_states: int = STATE_CAP, confirm_cycles: bool = True) -> SearchResult:
    """Best-case execution time: the smallest observer value over final states."""
    return _analyze(model, "bcet", component, record_graph, check_invariants, max_states,
                    confirm_cycles)


def analyze(model: TimedAutomaton | Network, component: str | None = None, **kw) -> SearchResult:
    """Both bounds; statistics are summed over the two searches."""
    w = analyze_wcet(model, component, **kw)
    b = analyze_bcet(model, component, **kw)
    stats = Counter(w.stats)
    stats.update(b.stats)
    return SearchResult(w.wcet, b.bcet, w.witness, b.diagnostic, stats, w.graph)


def detect_cycle_verdict(new: SymbolicState, passed: list[SymbolicState], delta: int) -> str:
    """Classify a fresh successor against the explored states: ``time_divergent``,
    ``zeno`` or ``none``."""
    n = new.zone.dim
    up_new = new.zone.cells[delta * n]
    dot = dot_cells(new.zone, delta)
    for s in passed:
        if s.location != new.location or s.sts != 1:
            continue
        if up_new > s.zone.cells[delta * n] and dot == dot_cells(s.zone, delta):
            return "time_divergent"
    for s in passed:
        if s.location == new.location and s.sts == 1 and s.zone == new.zone:
            return "zeno"
    return "none"
