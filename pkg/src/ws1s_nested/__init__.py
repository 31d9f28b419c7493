"""WS1S decision procedure with nested antichains over symbolic terms."""

from .alphabet import Symbol, VarTable, zero_symbol
from .automata import Nfa, ResourceLimitExceeded, compile_formula, decide_classical
from .engine import PrefixSpec, decide_nested, normalize_prefix
from .formula import close, desugar, parse_formula, pretty, to_prenex
from .terms import Term, TermStore, member_initial, subsumes

__all__ = [
    "Nfa",
    "PrefixSpec",
    "ResourceLimitExceeded",
    "Symbol",
    "Term",
    "TermStore",
    "VarTable",
    "close",
    "compile_formula",
    "decide_classical",
    "decide_nested",
    "desugar",
    "member_initial",
    "normalize_prefix",
    "parse_formula",
    "pretty",
    "subsumes",
    "to_prenex",
    "zero_symbol",
]
