"""WCET and BCET analysis of diagonal-free timed automata."""

from .dbm import DBM, Bound, canonicalize, dbm_zero, includes, intersect, reset, up
from .engine import (ExecTime, Kind, SearchResult, SymbolicState, analyze, analyze_bcet,
                     analyze_wcet, detect_cycle_verdict)
from .fmt import (ModelError, ModelSemanticError, ModelSyntaxError, load_model, parse_model,
                  serialize, to_dot)
from .model import Network, TimedAutomaton, compose, validate

__all__ = [
    "DBM", "Bound", "canonicalize", "dbm_zero", "includes", "intersect", "reset", "up",
    "ExecTime", "Kind", "SearchResult", "SymbolicState", "analyze", "analyze_bcet",
    "analyze_wcet", "detect_cycle_verdict", "ModelError", "ModelSemanticError",
    "ModelSyntaxError", "load_model", "parse_model", "serialize", "to_dot", "Network", "TimedAutomaton",
    "compose", "validate",
]
