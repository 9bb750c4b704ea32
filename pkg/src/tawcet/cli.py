"""Command-line interface.

Exit codes: 0 success, 1 unreadable or syntactically invalid input,
2 model validation failure, 3 internal error (including a failed search
invariant check).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .engine import (InvalidModelError, InvariantViolation, SearchLimitExceeded, SearchResult,
                     analyze_bcet, analyze_wcet)
from .fmt import ModelSemanticError, ModelSyntaxError, load_model, serialize, to_dot
from .model import validate_network

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(path: str):
    try:
        return load_model(path)
    except FileNotFoundError:
        raise _Exit(EXIT_PARSE, f"{path}: no such file")
    except (OSError, UnicodeDecodeError) as exc:
        raise _Exit(EXIT_PARSE, f"{path}: cannot read: {exc}")
    except ModelSyntaxError as exc:
        raise _Exit(EXIT_PARSE, f"{path}:{exc}")
    except ModelSemanticError as exc:
        lines = [f"{path}:{exc}"] + [f"  - {v}" for v in exc.violations[1:]]
        raise _Exit(EXIT_INVALID, "\n".join(lines))


def _witness_text(res: SearchResult) -> str:
    return f" ({res.witness.describe()})" if res.witness else ""


def build_report(model_name: str, query: str, wcet: SearchResult | None,
                 bcet: SearchResult | None) -> dict:
    """Structured report with a fixed key order."""
    stats: dict = {}
    for res in (wcet, bcet):
        if res is not None:
            for k, v in res.stats.items():
                stats[k] = stats.get(k, 0) + v
    return {
        "model": model_name,
        "query": query,
        "wcet": wcet.wcet.to_dict() if wcet else None,
        "bcet": bcet.bcet.to_dict() if bcet else None,
        "witness": wcet.witness.to_dict() if wcet and wcet.witness else None,
        "diagnostic": bcet.diagnostic if bcet else None,
        "stats": dict(sorted(stats.items())),
    }


def cmd_analyze(args) -> int:
    network = _load(args.file)
    kw = dict(check_invariants=args.check_invariants)
    w = analyze_wcet(network, args.component, **kw) if args.query in ("wcet", "both") else None
    b = analyze_bcet(network, args.component, **kw) if args.query in ("bcet", "both") else None
    if args.format == "json":
        print(json.dumps(build_report(network.name, args.query, w, b), ensure_ascii=False))
        return EXIT_OK
    if w is not None:
        print(f"WCET: {w.wcet.render('<=')}{_witness_text(w)}")
    if b is not None:
        note = f" ({b.diagnostic})" if b.diagnostic else ""
        print(f"BCET: {b.bcet.render('>=')}{note}")
    if args.stats:
        for res in (w, b):
            if res is not None:
                print("  " + ", ".join(f"{k}={v}" for k, v in sorted(res.stats.items())))
    return EXIT_OK


def cmd_validate(args) -> int:
    network = _load(args.file)
    report = validate_network(network)
    for v in report.violations:
        print(f"error: {v}")
    for w in report.warnings:
        print(f"warning: {w}")
    if report.ok:
        print(f"{args.file}: ok ({len(network.components)} automata)")
        return EXIT_OK
    return EXIT_INVALID


def cmd_graph(args) -> int:
    network = _load(args.file)
    if args.model:
        text = to_dot(network)
    else:
        res = analyze_wcet(network, args.component, record_graph=True)
        text = to_dot(res.graph)
    if args.dot == "-":
        sys.stdout.write(text)
    else:
        Path(args.dot).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import StrictConstraintError, oracle_discrete, oracle_zone_explore
    network = _load(args.file)
    w = analyze_wcet(network, args.component)
    b = analyze_bcet(network, args.component)
    rows = [("engine", w.wcet, b.bcet, False)]
    zone = oracle_zone_explore(network, args.max_steps, args.component)
    rows.append(("zone", zone.wcet, zone.bcet, zone.capped))
    try:
        disc = oracle_discrete(network, args.horizon, args.component)
        rows.append(("discrete", disc.wcet, disc.bcet, disc.capped))
    except StrictConstraintError as exc:
        print(f"discrete oracle skipped: {exc}")
    agree = True
    print(f"{'':10}{'WCET':16}{'BCET':16}")
    for name, wc, bc, capped in rows:
        tag = " (capped)" if capped else ""
        print(f"{name:10}{wc.render('<='):16}{bc.render('>='):16}{tag}")
        if name == "engine":
            continue
        if wc.kind.value != "unknown" and wc != w.wcet:
            agree = False
        if bc.kind.value != "unknown" and bc != b.bcet:
            agree = False
    print("agreement: " + ("consistent" if agree else "MISMATCH"))
    return EXIT_OK if agree else EXIT_INVALID


def cmd_corpus(args) -> int:
    from .corpus import check_orderings, run_corpus
    results = run_corpus(args.dir)
    failed = 0
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status} {r.file}: WCET {r.wcet.render('<=')}, BCET {r.bcet.render('>=')}, "
              f"{r.states} states, {r.seconds:.2f}s")
        for line in r.diff:
            print(f"     {line}")
        failed += not r.ok
    orderings = check_orderings(results, args.dir)
    for msg in orderings:
        print(f"FAIL ordering: {msg}")
    print(f"{len(results) - failed}/{len(results)} fixtures passed, "
          f"{len(orderings)} ordering failures")
    return EXIT_OK if not failed and not orderings else EXIT_INVALID


def cmd_format(args) -> int:
    sys.stdout.write(serialize(_load(args.file)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tawcet",
                                 description="WCET/BCET analysis of diagonal-free timed automata")
    ap.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="compute WCET and/or BCET")
    p.add_argument("file")
    p.add_argument("--query", choices=("wcet", "bcet", "both"), default="both")
    p.add_argument("--component", help="network component whose final locations count")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--stats", action="store_true", help="print search counters (text format)")
    p.add_argument("--check-invariants", action="store_true",
                   help="verify search bookkeeping at every verdict (exit 3 on failure)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="check a model and list violations")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", help="export the explored zone graph as DOT")
    p.add_argument("file")
    p.add_argument("--dot", default="-", help="output path, '-' for stdout")
    p.add_argument("--component")
    p.add_argument("--model", action="store_true", help="draw the automata instead")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("oracle", help="compare the engine with the reference oracles")
    p.add_argument("file")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--horizon", type=int)
    p.add_argument("--component")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("corpus", help="run the fixture corpus against its manifest")
    p.add_argument("--dir", type=Path)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("format", help="print the canonical form of a model")
    p.add_argument("file")
    p.set_defaults(func=cmd_format)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except _Exit as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except InvalidModelError as exc:
        for v in exc.violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_INVALID
    except (InvariantViolation, SearchLimitExceeded) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code 3
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def run() -> None:
    sys.exit(main())
