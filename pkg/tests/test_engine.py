import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from tawcet.dbm import Bound
from tawcet.engine import (INFINITE, UNKNOWN, ExecTime, InvalidModelError, Kind,
                           SearchLimitExceeded, SymbolicState, analyze, analyze_bcet, analyze_wcet,
                           detect_cycle_verdict, prepare)
from tawcet.fmt import parse_model
from tawcet.model import Constraint, Edge, Location, TimedAutomaton
from tawcet.oracle import oracle_zone_explore
from tawcet.testing import random_automaton

# A finite self-loop whose first iteration lifts a one-off cap on elapsed time:
# the observer bound grows once after the dot part has stabilised, then stops.
ONE_OFF_GROWTH = """\
automaton G
  clocks c0 c1 c2 c3
  location l0 initial invariant c1 <= 17
  location l1 invariant c3 < 5
  location l2 final
  edge l0 -> l1 reset c2
  edge l1 -> l2 guard c3 <= 8 && c0 <= 6 reset c0
  edge l1 -> l1 guard c2 < 1 reset c0, c1, c3
"""


def ta(text):
    return parse_model(text)


def test_exec_time_rendering():
    assert ExecTime.finite(12).render("<=") == "12 (<=)"
    assert ExecTime.finite(12, strict=True).render("<=") == "12 (<)"
    assert ExecTime.finite(3, strict=True).render(">=") == "3 (>)"
    assert INFINITE.render() == "infinite" and UNKNOWN.render() == "unknown"
    assert ExecTime.finite(4).to_dict() == {"kind": "finite", "value": 4, "strict": False}
    assert INFINITE.to_dict() == {"kind": "infinite", "value": None, "strict": None}


def test_finite_cycle(load):
    res = analyze_wcet(load("a1.ta"))
    assert res.wcet == ExecTime.finite(12)
    assert res.witness is None


def test_infinite_cycle_witness(load):
    res = analyze_wcet(load("a2.ta"))
    assert res.wcet == INFINITE
    w = res.witness
    assert w.kind == "cycle" and w.location == "loop"
    assert [str(e) for e in w.cycle] == ["loop -> loop"]
    assert w.describe() == "cycle witness: loop -> loop"
    assert w.end_zone.cells[-w.end_zone.dim] > w.start_zone.cells[-w.start_zone.dim]


def test_one_off_growth_is_not_divergence():
    model = ta(ONE_OFF_GROWTH)
    res = analyze_wcet(model)
    assert res.wcet == ExecTime.finite(11, strict=True)
    assert res.stats["rejected_cycles"] >= 1
    assert oracle_zone_explore(model).wcet == res.wcet
    # Accepting every grown fixed point reports a spurious infinite bound here.
    assert analyze_wcet(model, confirm_cycles=False).wcet == INFINITE


def test_unbounded_delay_witness():
    model = ta("automaton U\n  clocks x\n  location a initial\n  location b final\n"
               "  edge a -> b guard x >= 1\n")
    res = analyze_wcet(model)
    assert res.wcet == INFINITE and res.witness.kind == "unbounded"
    assert res.witness.describe() == "unbounded delay at b"
    assert analyze_bcet(model).bcet == ExecTime.finite(1)


def test_idle_deadlock_at_start_is_unbounded():
    model = ta("automaton U\n  clocks x\n  location a initial\n")
    assert analyze_wcet(model).wcet == INFINITE


def test_zeno_loop_is_skipped(load):
    res = analyze(load("zeno.ta"))
    assert res.wcet == ExecTime.finite(3) and res.bcet == ExecTime.finite(1)
    assert res.stats["zeno_skips"] >= 1


def test_strict_bounds_propagate():
    model = ta("automaton S\n  clocks x\n  location a initial invariant x < 4\n"
               "  location b final\n  edge a -> b guard x > 1\n")
    assert analyze_wcet(model).wcet == ExecTime.finite(4, strict=True)
    assert analyze_bcet(model).bcet == ExecTime.finite(1, strict=True)


def test_no_reachable_final_state():
    # Live forever in a, never reaching b.
    model = ta("automaton N\n  clocks x\n  location a initial invariant x <= 2\n"
               "  location b final\n  edge a -> b guard x >= 3\n"
               "  edge a -> a guard x >= 1 reset x\n")
    res = analyze_bcet(model)
    assert res.bcet == UNKNOWN and "no final state" in res.diagnostic


def test_invalid_model_raises():
    a = TimedAutomaton("D", ("x", "y"), (Location("a", initial=True),),
                       (Edge("a", "a", (Constraint("x", "<", 1, minus="y"),)),))
    with pytest.raises(InvalidModelError) as info:
        analyze_wcet(a)
    assert any("diagonal" in v for v in info.value.violations)


def test_state_cap(load):
    with pytest.raises(SearchLimitExceeded):
        analyze_wcet(load("plant_fast_6.ta"), max_states=50)


@pytest.mark.parametrize("name", ["a1.ta", "a2.ta", "fig3.ta", "fig6.ta", "chain.ta",
                                  "plant_slow_4.ta"])
def test_invariant_checking_passes(load, name):
    analyze(load(name), check_invariants=True)


def test_component_selection():
    net = ta("""\
automaton P
  clocks p
  location p0 initial invariant p <= 3
  location p1 final
  edge p0 -> p1 guard p >= 2
automaton Q
  clocks q
  location q0 initial invariant q <= 7
  location q1 final
  edge q0 -> q1 guard q >= 5
network PQ = P || Q
""")
    assert analyze_wcet(net).wcet == ExecTime.finite(7)
    # Final states keep running while Q progresses.
    assert analyze_wcet(net, "P").wcet == ExecTime.finite(7)
    assert analyze_bcet(net, "P").bcet == ExecTime.finite(2)
    assert analyze_bcet(net).bcet == ExecTime.finite(5)


def test_results_are_deterministic(load):
    def run():
        r = analyze(load("fig6.ta"))
        stats = Counter(r.stats)
        stats.pop("wall_ms")
        return r.wcet, r.bcet, stats
    assert run() == run()


def test_graph_recording(load):
    res = analyze_wcet(load("fig3.ta"), record_graph=True)
    kinds = Counter(e.kind for e in res.graph.edges)
    assert kinds["divergent"] == 1
    assert res.graph.witness_edges
    assert len(res.graph.nodes) == res.stats["states"]


def test_detect_cycle_verdict(load):
    from tawcet.successor import Stepper
    from tawcet.engine import context_for
    a = prepare(load("fig3.ta"))
    ctx = context_for(a)
    stp = Stepper(a, ctx)
    d = a.observer_index
    (_, z0), = stp.initial(split=True)
    start = [e for e in a.edges if e.source == "start"][0]
    loop = [e for e in a.edges if e.source == e.target][0]
    zs = [stp.partial(z0, start)]
    for _ in range(4):
        zs.append(stp.partial(zs[-1], loop))
    on_path = [SymbolicState("loop", z, 1) for z in zs[:3]]
    assert detect_cycle_verdict(SymbolicState("loop", zs[3]), on_path, d) == "time_divergent"
    assert detect_cycle_verdict(SymbolicState("loop", zs[2]), on_path[2:], d) == "zeno"
    assert detect_cycle_verdict(SymbolicState("loop", zs[1]), on_path[:1], d) == "none"
    finished = [SymbolicState("loop", z, 2) for z in zs[:3]]
    assert detect_cycle_verdict(SymbolicState("loop", zs[3]), finished, d) == "none"


@settings(max_examples=60)
@given(st.integers(0, 10**9))
def test_engine_matches_zone_oracle(seed):
    a = random_automaton(random.Random(seed))
    oracle = oracle_zone_explore(a, 2000)
    if oracle.capped:
        return
    assert analyze_wcet(a).wcet == oracle.wcet
    assert analyze_bcet(a).bcet == oracle.bcet


@settings(max_examples=60)
@given(st.integers(0, 10**9))
def test_bcet_never_exceeds_wcet(seed):
    a = random_automaton(random.Random(seed))
    w, b = analyze_wcet(a).wcet, analyze_bcet(a).bcet
    if w.is_finite and b.is_finite:
        assert b.bound.weight <= w.bound.weight
