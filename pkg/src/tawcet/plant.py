"""Generator for the manufacturing-plant corpus models.

Boxes travel along a belt and are picked up by robot G, which loads them
into a service station; robot D unloads the station.  The ``fast`` and
``slow`` configurations differ only in robot G's handling intervals.
"""

from __future__ import annotations

from .model import Constraint, Edge, Location, Network, Sync, TimedAutomaton

BELT = (133, 134)
STATION_BUSY = (8, 10)
STATION_HOLD = 15
PICK_DEADLINE = 5
LOAD_DEADLINE = 12
BOX_SPACING = 60

CONFIGS = {
    # robot: (pick/put interval, turn interval)
    "fast": {"G": ((1, 2), (2, 6)), "D": ((1, 2), (2, 6))},
    "slow": {"G": ((2, 4), (4, 10)), "D": ((1, 2), (2, 6))},
}


def _le(c, k):
    return (Constraint(c, "<=", k),)


def _ge(c, k):
    return (Constraint(c, ">=", k),)


def box(i: int) -> TimedAutomaton:
    b = f"b{i}"
    release = BOX_SPACING * (i - 1)
    locs = (
        Location("queued", _le(b, release), initial=True),
        Location("belt", _le(b, BELT[1])),
        Location("at_end", _le(b, PICK_DEADLINE)),
        Location("gone", final=True),
    )
    edges = (
        Edge("queued", "belt", _ge(b, release), (b,), label="release"),
        Edge("belt", "at_end", _ge(b, BELT[0]), (b,), label="arrive"),
        Edge("at_end", "gone", (), (), Sync("pick", "emit")),
    )
    return TimedAutomaton(f"Box{i}", (b,), locs, edges)


def _robot(name: str, clock: str, trigger: Sync, handoff: Sync | None,
           timing: tuple[tuple[int, int], tuple[int, int]]) -> TimedAutomaton:
    (p_lo, p_hi), (t_lo, t_hi) = timing
    g = clock
    steps = [("picking", p_lo, p_hi), ("turning_r", t_lo, t_hi)]
    if handoff is not None:
        steps.append(("wait_station", None, LOAD_DEADLINE))
    steps += [("putting", p_lo, p_hi), ("turning_l", t_lo, t_hi)]
    locs = [Location("idle", initial=True, final=True)]
    edges = [Edge("idle", "picking", (), (g,), trigger)]
    for k, (loc, lo, hi) in enumerate(steps):
        locs.append(Location(loc, _le(g, hi)))
        nxt = steps[k + 1][0] if k + 1 < len(steps) else "idle"
        if lo is None:
            edges.append(Edge(loc, nxt, (), (g,), handoff))
        else:
            edges.append(Edge(loc, nxt, _ge(g, lo), (g,)))
    return TimedAutomaton(name, (g,), tuple(locs), tuple(edges))


def station() -> TimedAutomaton:
    s = "s"
    locs = (
        Location("empty", initial=True, final=True),
        Location("busy", _le(s, STATION_BUSY[1])),
        Location("ready", _le(s, STATION_HOLD)),
    )
    edges = (
        Edge("empty", "busy", (), (s,), Sync("load", "receive")),
        Edge("busy", "ready", _ge(s, STATION_BUSY[0]), (s,)),
        Edge("ready", "empty", (), (), Sync("s_ready", "emit")),
    )
    return TimedAutomaton("Station", (s,), locs, edges)


def plant_network(boxes: int, config: str) -> Network:
    timing = CONFIGS[config]
    comps = [box(i) for i in range(1, boxes + 1)]
    comps.append(_robot("G", "g", Sync("pick", "receive"), Sync("load", "emit"), timing["G"]))
    comps.append(station())
    comps.append(_robot("D", "d", Sync("s_ready", "receive"), None, timing["D"]))
    return Network(f"Plant_{config}_{len(comps)}", tuple(comps))
