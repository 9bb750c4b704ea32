"""Committed model corpus and its expected-result manifest."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..engine import ExecTime, Kind, analyze
from ..fmt import load_model
from ..dbm import Bound

MANIFEST = "manifest.json"


def corpus_dir() -> Path:
    return Path(str(resources.files(__name__)))


def load_manifest(directory: Path | None = None) -> dict:
    directory = directory or corpus_dir()
    return json.loads((directory / MANIFEST).read_text(encoding="utf-8"))


def exec_time_from_json(d: dict) -> ExecTime:
    kind = Kind(d["kind"])
    if kind is Kind.FINITE:
        return ExecTime(kind, Bound(d["value"], d.get("strict", False)))
    return ExecTime(kind)


@dataclass
class FixtureResult:
    file: str
    ok: bool
    wcet: ExecTime
    bcet: ExecTime
    expected_wcet: ExecTime
    expected_bcet: ExecTime
    seconds: float
    states: int
    diff: list[str] = field(default_factory=list)


def run_fixture(entry: dict, directory: Path) -> FixtureResult:
    network = load_model(directory / entry["file"])
    started = time.perf_counter()
    res = analyze(network, entry.get("component"))
    seconds = time.perf_counter() - started
    want_w = exec_time_from_json(entry["wcet"])
    want_b = exec_time_from_json(entry["bcet"])
    diff = []
    if res.wcet != want_w:
        diff.append(f"WCET expected {want_w}, got {res.wcet}")
    if res.bcet != want_b:
        diff.append(f"BCET expected {want_b.render('>=')}, got {res.bcet.render('>=')}")
    return FixtureResult(entry["file"], not diff, res.wcet, res.bcet, want_w, want_b, seconds,
                         res.stats["states"], diff)


def run_corpus(directory: Path | None = None) -> list[FixtureResult]:
    """Analyze every manifest entry and compare against its expectation."""
    directory = Path(directory) if directory else corpus_dir()
    manifest = load_manifest(directory)
    return [run_fixture(entry, directory) for entry in manifest["fixtures"]]


def check_orderings(results: list[FixtureResult], directory: Path | None = None) -> list[str]:
    """Failures among the manifest's ``faster < slower`` WCET claims."""
    manifest = load_manifest(Path(directory) if directory else None)
    by_file = {r.file: r for r in results}
    failures = []
    for claim in manifest.get("orderings", []):
        fast, slow = by_file[claim["faster"]], by_file[claim["slower"]]
        if not (fast.wcet.is_finite and slow.wcet.is_finite and fast.wcet.bound < slow.wcet.bound):
            failures.append(f"WCET({claim['faster']}) = {fast.wcet} is not below "
                            f"WCET({claim['slower']}) = {slow.wcet}")
    return failures
