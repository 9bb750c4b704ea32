"""The ``.ta`` text format: parser, canonical serializer and DOT export.

Example::

    automaton A1
      clocks x y
      location start initial invariant x <= 4
      location end final
      edge start -> end guard x >= 2 reset y label go
    network A1 = A1
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import (OBSERVER, Constraint, Edge, Location, Network, Sync, TimedAutomaton,
                    validate)

KEYWORDS = {"automaton", "clocks", "location", "edge", "network", "initial", "final",
            "invariant", "guard", "reset", "sync", "label"}
OPS = ("<=", ">=", "==", "<", ">")

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<punct>->|\|\||&&|<=|>=|==|<|>|=|,|!|\?|-)
  | (?P<num>\d+)
  | (?P<ident>[^\W\d]\w*)
""", re.VERBOSE)


class ModelError(Exception):
    """Base class for format errors; ``line`` and ``column`` are 1-based."""

    kind = "error"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{self.kind}: {message}")


class ModelSyntaxError(ModelError):
    kind = "syntax error"

    def __init__(self, message: str, line: int = 0, column: int = 0,
                 expected: tuple[str, ...] = ()):
        if expected:
            message = f"{message}; expected {' or '.join(expected)}"
        super().__init__(message, line, column)
        self.expected = expected


class ModelSemanticError(ModelError):
    kind = "semantic error"

    def __init__(self, message: str, line: int = 0, column: int = 0,
                 violations: list[str] | None = None):
        super().__init__(message, line, column)
        self.violations = violations or [message]


@dataclass
class _Tok:
    kind: str  # ident | num | punct | end
    text: str
    col: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise ModelSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    toks.append(_Tok("end", "", len(line) + 1))
    return toks


class _Line:
    def __init__(self, toks: list[_Tok], lineno: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "end":
            self.i += 1
        return t

    def fail(self, tok: _Tok, what: str, *expected: str):
        found = "end of line" if tok.kind == "end" else repr(tok.text)
        raise ModelSyntaxError(f"{what}, found {found}", self.lineno, tok.col, expected)

    def ident(self, what: str = "identifier") -> _Tok:
        t = self.next()
        if t.kind != "ident" or t.text in KEYWORDS:
            self.fail(t, f"bad {what}", what)
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text or t.kind == "end":
            self.fail(t, "unexpected token", repr(text))
        return t

    def accept(self, text: str) -> _Tok | None:
        t = self.peek()
        if t.kind in ("ident", "punct") and t.text == text:
            return self.next()
        return None

    def done(self):
        t = self.peek()
        if t.kind != "end":
            self.fail(t, "unexpected trailing input", "end of line")


@dataclass
class _AutBuilder:
    name: str
    line: int
    clocks: list[str] = field(default_factory=list)
    clock_pos: dict[str, tuple[int, int]] = field(default_factory=dict)
    locations: dict[str, Location] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)
    pending_edges: list[tuple[Edge, _Tok, _Tok, int]] = field(default_factory=list)


def _atom(ln: _Line, aut: _AutBuilder) -> Constraint:
    clock = ln.ident("clock")
    if clock.text not in aut.clock_pos:
        raise ModelSemanticError(f"undeclared clock {clock.text}", ln.lineno, clock.col)
    minus = ln.accept("-")
    if minus is not None:
        raise ModelSemanticError("diagonal constraints are not supported", ln.lineno, minus.col)
    op = ln.next()
    if op.text not in OPS or op.kind != "punct":
        ln.fail(op, "bad comparison", *OPS)
    num = ln.next()
    if num.kind != "num":
        if num.text == "-":
            ln.fail(num, "constants must be natural numbers", "natural number")
        ln.fail(num, "bad constant", "natural number")
    return Constraint(clock.text, op.text, int(num.text))


def _conj(ln: _Line, aut: _AutBuilder) -> tuple[Constraint, ...]:
    atoms = [_atom(ln, aut)]
    while ln.accept("&&"):
        atoms.append(_atom(ln, aut))
    return tuple(atoms)


def parse_model(text: str) -> Network:
    """Parse ``.ta`` source into a validated :class:`Network`.

    Raises :class:`ModelSyntaxError` for malformed input and
    :class:`ModelSemanticError` for well-formed input that breaks a model rule.
    """
    automata: dict[str, _AutBuilder] = {}
    order: list[str] = []
    network: tuple[str, list[_Tok], int] | None = None
    cur: _AutBuilder | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        ln = _Line(_tokenize(body, lineno), lineno)
        head = ln.next()
        kw = head.text if head.kind == "ident" else None
        if kw == "automaton":
            name = ln.ident("automaton name")
            ln.done()
            if name.text in automata:
                raise ModelSemanticError(f"duplicate automaton {name.text}", lineno, name.col)
            cur = _AutBuilder(name.text, lineno)
            automata[name.text] = cur
            order.append(name.text)
        elif kw == "network":
            name = ln.ident("network name")
            ln.expect("=")
            members = [ln.ident("automaton name")]
            while ln.accept("||"):
                members.append(ln.ident("automaton name"))
            ln.done()
            if network is not None:
                raise ModelSemanticError("only one network per file", lineno, head.col)
            network = (name.text, members, lineno)
            cur = None
        elif kw in ("clocks", "location", "edge"):
            if cur is None:
                raise ModelSyntaxError(f"'{kw}' outside an automaton block", lineno, head.col,
                                       ("'automaton'",))
            if kw == "clocks":
                while ln.peek().kind != "end":
                    c = ln.ident("clock name")
                    if c.text in cur.clock_pos:
                        raise ModelSemanticError(f"duplicate clock {c.text}", lineno, c.col)
                    cur.clocks.append(c.text)
                    cur.clock_pos[c.text] = (lineno, c.col)
            elif kw == "location":
                _parse_location(ln, cur)
            else:
                _parse_edge(ln, cur)
        else:
            ln.fail(head, "unknown statement", "'automaton'", "'clocks'", "'location'",
                    "'edge'", "'network'")
    if not automata:
        raise ModelSyntaxError("no automaton defined", 1, 1, ("'automaton'",))
    comps = {name: _finish(b) for name, b in automata.items()}
    if network is None:
        return Network(order[0], tuple(comps[n] for n in order))
    name, members, lineno = network
    used = []
    for tok in members:
        if tok.text not in comps:
            raise ModelSemanticError(f"unknown automaton {tok.text}", lineno, tok.col)
        if tok.text in used:
            raise ModelSemanticError(f"automaton {tok.text} listed twice", lineno, tok.col)
        used.append(tok.text)
    return Network(name, tuple(comps[n] for n in used))


def _parse_location(ln: _Line, aut: _AutBuilder) -> None:
    name = ln.ident("location name")
    if name.text in aut.locations:
        raise ModelSemanticError(f"duplicate location {name.text}", ln.lineno, name.col)
    initial = final = False
    inv: tuple[Constraint, ...] = ()
    while True:
        t = ln.peek()
        if t.text == "initial" and t.kind == "ident":
            ln.next()
            initial = True
        elif t.text == "final" and t.kind == "ident":
            ln.next()
            final = True
        elif t.text == "invariant" and t.kind == "ident":
            ln.next()
            inv = _conj(ln, aut)
            break
        else:
            break
    ln.done()
    aut.locations[name.text] = Location(name.text, inv, initial, final)


def _parse_edge(ln: _Line, aut: _AutBuilder) -> None:
    src = ln.ident("source location")
    ln.expect("->")
    tgt = ln.ident("target location")
    guard: tuple[Constraint, ...] = ()
    resets: list[str] = []
    sync = None
    label = None
    seen = set()
    clauses = ("guard", "reset", "sync", "label")
    while ln.peek().kind != "end":
        t = ln.next()
        if t.kind != "ident" or t.text not in clauses:
            ln.fail(t, "unexpected token", *(f"'{c}'" for c in clauses))
        if t.text in seen:
            raise ModelSyntaxError(f"repeated '{t.text}' clause", ln.lineno, t.col)
        seen.add(t.text)
        if t.text == "guard":
            guard = _conj(ln, aut)
        elif t.text == "reset":
            while True:
                c = ln.ident("clock")
                if c.text == OBSERVER:
                    raise ModelSemanticError(f"the observer clock {OBSERVER} must never be reset",
                                             ln.lineno, c.col)
                if c.text not in aut.clock_pos:
                    raise ModelSemanticError(f"undeclared clock {c.text}", ln.lineno, c.col)
                resets.append(c.text)
                if not ln.accept(","):
                    break
        elif t.text == "sync":
            chan = ln.ident("channel")
            d = ln.next()
            if d.text not in ("!", "?"):
                ln.fail(d, "bad sync direction", "'!'", "'?'")
            sync = Sync(chan.text, "emit" if d.text == "!" else "receive")
        else:
            label = ln.ident("label").text
    e = Edge(src.text, tgt.text, guard, tuple(dict.fromkeys(resets)), sync, label)
    aut.pending_edges.append((e, src, tgt, ln.lineno))


def _finish(b: _AutBuilder) -> TimedAutomaton:
    for e, src, tgt, lineno in b.pending_edges:
        for tok in (src, tgt):
            if tok.text not in b.locations:
                raise ModelSemanticError(f"unknown location {tok.text}", lineno, tok.col)
        b.edges.append(e)
    if OBSERVER in b.clock_pos:
        line, col = b.clock_pos[OBSERVER]
        raise ModelSemanticError(f"clock name {OBSERVER} is reserved for the observer", line, col)
    locs = tuple(sorted(b.locations.values(), key=lambda l: l.name))
    a = TimedAutomaton(b.name, tuple(b.clocks), locs, tuple(b.edges))
    report = validate(a)
    if not report.ok:
        raise ModelSemanticError(f"{b.name}: {report.violations[0]}", b.line, 1,
                                 report.violations)
    return a


def load_model(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


# -- serialization -------------------------------------------------------------

def _conj_text(g) -> str:
    return " && ".join(str(c) for c in g)


def serialize_automaton(a: TimedAutomaton) -> list[str]:
    out = [f"automaton {a.name}"]
    clocks = [c for c in a.clocks if c != a.observer]
    out.append("  clocks" + "".join(f" {c}" for c in clocks))
    for loc in sorted(a.locations, key=lambda l: l.name):
        parts = ["  location", loc.name]
        if loc.initial:
            parts.append("initial")
        if loc.final:
            parts.append("final")
        if loc.invariant:
            parts += ["invariant", _conj_text(loc.invariant)]
        out.append(" ".join(parts))
    for e in a.edges:
        parts = ["  edge", e.source, "->", e.target]
        if e.guard:
            parts += ["guard", _conj_text(e.guard)]
        if e.resets:
            parts += ["reset", ",".join(e.resets)]
        if e.sync:
            parts += ["sync", str(e.sync)]
        if e.label:
            parts += ["label", e.label]
        out.append(" ".join(parts))
    return out


def serialize(n: Network | TimedAutomaton) -> str:
    """Canonical text: sorted locations, edges in declaration order."""
    if isinstance(n, TimedAutomaton):
        n = Network(n.name, (n,))
    lines = []
    for a in n.components:
        lines += serialize_automaton(a)
        lines.append("")
    lines.append(f"network {n.name} = " + " || ".join(a.name for a in n.components))
    return "\n".join(lines) + "\n"


# -- DOT -----------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace('"', '\\"').replace("\n", "\\n") + '"'


def _record(s: str) -> str:
    for ch in "{}<>|":
        s = s.replace(ch, "\\" + ch)
    return s


def to_dot(subject) -> str:
    """DOT digraph of a network/automaton or of an explored zone graph."""
    from .engine import ZoneGraph
    if isinstance(subject, ZoneGraph):
        return _zone_graph_dot(subject)
    if isinstance(subject, TimedAutomaton):
        subject = Network(subject.name, (subject,))
    lines = [f"digraph {_q(subject.name)} {{", "  rankdir=LR;"]
    for ci, a in enumerate(subject.components):
        lines.append(f"  subgraph {_q('cluster_' + a.name)} {{")
        lines.append(f"    label={_q(a.name)};")
        for loc in sorted(a.locations, key=lambda l: l.name):
            label = loc.name + (f"\n{_conj_text(loc.invariant)}" if loc.invariant else "")
            shape = "doublecircle" if loc.final else "circle"
            style = ", style=bold" if loc.initial else ""
            lines.append(f"    {_q(f'{ci}:{loc.name}')} [label={_q(label)}, shape={shape}{style}];")
        lines.append("  }")
        for e in a.edges:
            parts = [p for p in (_conj_text(e.guard),
                                 ("reset " + ",".join(e.resets)) if e.resets else "",
                                 str(e.sync) if e.sync else "", e.label or "") if p]
            lines.append(f"  {_q(f'{ci}:{e.source}')} -> {_q(f'{ci}:{e.target}')} "
                         f"[label={_q(chr(10).join(parts))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _zone_graph_dot(g) -> str:
    lines = ['digraph "zone_graph" {', "  node [shape=record];"]
    for s in g.nodes:
        cons = "\\n".join(_record(c) for c in s.zone.pretty(g.clock_names)) or "true"
        label = f"{_record(s.location)} | {cons} | sts={s.sts}"
        extra = ", color=red, penwidth=2" if s.id in g.witness_nodes else ""
        lines.append(f"  n{s.id} [label={_q(label)}{extra}];")
    for idx, e in enumerate(g.edges):
        target = f"n{e.target}"
        if e.target < 0:
            target = f"unbounded{idx}"
            lines.append(f'  {target} [label="unbounded", shape=plaintext, fontcolor=red];')
        style = {"zeno": "dashed", "merged": "dotted"}.get(e.kind, "solid")
        extra = ", color=red, penwidth=2" if idx in g.witness_edges or e.target < 0 else ""
        lines.append(f"  n{e.source} -> {target} [label={_q(e.label)}, style={style}{extra}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
