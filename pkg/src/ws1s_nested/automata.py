"""Nondeterministic finite automata over variable tracks and the classical
automata-based decision procedure for WS1S."""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .alphabet import (
    Symbol,
    VarTable,
    all_symbols,
    merge_cubes,
    parse_symbol,
    remap_symbol,
    render_symbol,
    symbol_from_bits,
    zero_symbol,
)
from .formula import (
    ATOMS,
    And,
    Exists,
    Formula,
    Not,
    Or,
    PrenexFormula,
    Sing,
    Sub,
    Succ,
    Zeroth,
    atom_vars,
    free_variables,
)

DEFAULT_STATE_BUDGET = 10**6

Transition = tuple[int, Symbol, int]


class ResourceLimitExceeded(RuntimeError):
    """A configured state or term budget ran out before a verdict was reached."""


@dataclass(frozen=True)
class Nfa:
    vars: VarTable
    num_states: int
    initial: frozenset[int]
    final: frozenset[int]
    transitions: frozenset[Transition]

    def __post_init__(self):
        full = self.vars.full_mask
        for p, s, q in self.transitions:
            if s.care & ~full:
                raise ValueError(f"transition symbol {s} is not over {self.vars}")
            if not (0 <= p < self.num_states and 0 <= q < self.num_states):
                raise ValueError(f"transition ({p}, {q}) outside 0..{self.num_states - 1}")

    @cached_property
    def outgoing(self) -> dict[int, list[tuple[Symbol, int]]]:
        out = defaultdict(list)
        for p, s, q in self.transitions:
            out[p].append((s, q))
        return dict(out)

    @cached_property
    def incoming(self) -> dict[int, list[tuple[Symbol, int]]]:
        inc = defaultdict(list)
        for p, s, q in self.transitions:
            inc[q].append((s, p))
        return dict(inc)

    def post(self, t: Symbol, states: Iterable[int]) -> frozenset[int]:
        out = self.outgoing
        return frozenset(q for p in states for s, q in out.get(p, ()) if s.compatible(t))

    def pre(self, t: Symbol, states: Iterable[int]) -> frozenset[int]:
        inc = self.incoming
        return frozenset(p for q in states for s, p in inc.get(q, ()) if s.compatible(t))

    def cpre(self, t: Symbol, states: Iterable[int]) -> frozenset[int]:
        target = frozenset(states)
        return frozenset(p for p in range(self.num_states) if self.post(t, (p,)) <= target)


def post(delta: Iterable[Transition], t: Symbol, states: Iterable[int]) -> frozenset[int]:
    """Successors of ``states`` under transitions whose symbol meets ``t``."""
    src = frozenset(states)
    return frozenset(q for p, s, q in delta if p in src and s.compatible(t))


def pre(delta: Iterable[Transition], t: Symbol, states: Iterable[int]) -> frozenset[int]:
    dst = frozenset(states)
    return frozenset(p for p, s, q in delta if q in dst and s.compatible(t))


def cpre(delta: Iterable[Transition], t: Symbol, states: Iterable[int]) -> frozenset[int]:
    """States all of whose ``t``-successors lie in ``states``.

    Only states appearing in ``delta`` are considered; a caller wanting the
    states with no transition at all must add them (``Nfa.cpre`` does).
    """
    delta = list(delta)
    target = frozenset(states)
    nodes = {p for p, _, _ in delta} | {q for _, _, q in delta}
    return frozenset(p for p in nodes if post(delta, t, (p,)) <= target)


def accepts(a: Nfa, word: Sequence[Symbol]) -> bool:
    current = frozenset(a.initial)
    for symbol in word:
        current = a.post(symbol, current)
        if not current:
            return False
    return bool(current & a.final)


# ---------------------------------------------------------------- atoms

def _build(table: VarTable, num_states: int, initial, final, edges) -> Nfa:
    transitions = set()
    for p, bits, q in edges:
        merged: dict[str, int] = {}
        ok = True
        for name, bit in bits:
            if merged.setdefault(name, bit) != bit:
                ok = False
        if ok:
            transitions.add((p, symbol_from_bits(table, merged), q))
    return Nfa(table, num_states, frozenset(initial), frozenset(final), frozenset(transitions))


def atomic_automaton(a) -> Nfa:
    """Automaton for one atom over the table of the atom's own variables."""
    table = VarTable(dict.fromkeys(atom_vars(a)))
    if isinstance(a, Sub):
        x, y = a.left, a.right
        edges = [(0, [(x, 0)], 0), (0, [(x, 1), (y, 1)], 0)]
        return _build(table, 1, [0], [0], edges)
    if isinstance(a, Sing):
        x = a.var
        edges = [(0, [(x, 0)], 0), (0, [(x, 1)], 1), (1, [(x, 0)], 1)]
        return _build(table, 2, [0], [1], edges)
    if isinstance(a, Zeroth):
        x = a.var
        edges = [(0, [(x, 1)], 1), (1, [(x, 0)], 1)]
        return _build(table, 2, [0], [1], edges)
    if isinstance(a, Succ):
        x, y = a.left, a.right
        edges = [
            (0, [(x, 0), (y, 0)], 0),
            (0, [(x, 0), (y, 1)], 1),
            (1, [(x, 1), (y, 0)], 2),
            (2, [(x, 0), (y, 0)], 2),
        ]
        return _build(table, 3, [0], [2], edges)
    raise TypeError(f"not an atom: {a!r}")


# ---------------------------------------------------------------- operations

def cylindrify(a: Nfa, table: VarTable) -> Nfa:
    if not a.vars.issubset(table):
        raise ValueError(f"{a.vars} is not contained in {table}")
    if a.vars == table:
        return a
    transitions = frozenset((p, remap_symbol(s, a.vars, table), q) for p, s, q in a.transitions)
    return Nfa(table, a.num_states, a.initial, a.final, transitions)


def _renumber(
    table: VarTable, order: list, initial: Iterable, final: Iterable, edges: Iterable
) -> Nfa:
    ids = {s: i for i, s in enumerate(order)}
    return Nfa(
        table,
        len(order),
        frozenset(ids[s] for s in initial),
        frozenset(ids[s] for s in final),
        frozenset((ids[p], sym, ids[q]) for p, sym, q in edges),
    )


def product(a: Nfa, b: Nfa, mode: str = "and") -> Nfa:
    """Intersection (reachable synchronous product) or union (disjoint sum)."""
    if a.vars != b.vars:
        raise ValueError("product operands must share a variable table")
    if mode == "or":
        shift = a.num_states
        transitions = set(a.transitions)
        transitions.update((p + shift, s, q + shift) for p, s, q in b.transitions)
        return Nfa(
            a.vars,
            a.num_states + b.num_states,
            a.initial | {q + shift for q in b.initial},
            a.final | {q + shift for q in b.final},
            frozenset(transitions),
        )
    if mode != "and":
        raise ValueError(f"unknown product mode {mode!r}")
    start = [(p, q) for p in sorted(a.initial) for q in sorted(b.initial)]
    order = list(start)
    seen = set(start)
    edges = []
    i = 0
    out_a, out_b = a.outgoing, b.outgoing
    while i < len(order):
        p, q = order[i]
        i += 1
        for s, p2 in out_a.get(p, ()):
            for t, q2 in out_b.get(q, ()):
                m = s.meet(t)
                if m is None:
                    continue
                dst = (p2, q2)
                if dst not in seen:
                    seen.add(dst)
                    order.append(dst)
                edges.append(((p, q), m, dst))
    final = [pq for pq in order if pq[0] in a.final and pq[1] in b.final]
    return _renumber(a.vars, order, start, final, edges)


def complement(a: Nfa, budget: int | None = None) -> Nfa:
    """Subset construction over reachable subsets with final and non-final swapped."""
    width = len(a.vars)
    symbols = all_symbols(width)
    start = frozenset(a.initial)
    order = [start]
    seen = {start}
    succ: dict[tuple[frozenset, frozenset], list[int]] = defaultdict(list)
    i = 0
    while i < len(order):
        subset = order[i]
        i += 1
        for s in symbols:
            nxt = a.post(s, subset)
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                if budget is not None and len(order) > budget:
                    raise ResourceLimitExceeded(f"subset construction exceeded {budget} states")
            succ[(subset, nxt)].append(s.value)
    edges = [(p, cube, q) for (p, q), values in succ.items() for cube in merge_cubes(values, width)]
    final = [subset for subset in order if not (subset & a.final)]
    return _renumber(a.vars, order, [start], final, edges)


def project_exists(a: Nfa, block: Iterable[str]) -> Nfa:
    """Existential projection of ``block`` with the zero-padding fix on final states."""
    block = list(block)
    missing = [v for v in block if v not in a.vars]
    if missing:
        raise ValueError(f"cannot project {missing}: not in {a.vars}")
    if not block:
        return a
    reduced = a.vars.remove(block)
    transitions = frozenset((p, remap_symbol(s, a.vars, reduced), q) for p, s, q in a.transitions)
    projected = Nfa(reduced, a.num_states, a.initial, a.final, transitions)
    zero = zero_symbol(reduced)
    final = set(a.final)
    frontier = set(a.final)
    while frontier:
        frontier = set(projected.pre(zero, frontier)) - final
        final |= frontier
    return Nfa(reduced, a.num_states, a.initial, frozenset(final), transitions)


def trim(a: Nfa) -> Nfa:
    """Keep states reachable from the initial ones."""
    order = sorted(a.initial)
    seen = set(order)
    i = 0
    out = a.outgoing
    while i < len(order):
        p = order[i]
        i += 1
        for _, q in out.get(p, ()):
            if q not in seen:
                seen.add(q)
                order.append(q)
    if len(order) == a.num_states:
        return a
    edges = [(p, s, q) for p, s, q in a.transitions if p in seen]
    return _renumber(a.vars, order, a.initial, [q for q in a.final if q in seen], edges)


# ---------------------------------------------------------------- compilation

@dataclass
class BuildStats:
    automata: int = 0
    total_states: int = 0
    budget: int | None = DEFAULT_STATE_BUDGET

    def record(self, a: Nfa) -> Nfa:
        self.automata += 1
        self.total_states += a.num_states
        if self.budget is not None and self.total_states > self.budget:
            raise ResourceLimitExceeded(f"classical procedure exceeded {self.budget} states")
        return a


def _lift(a: Nfa, b: Nfa) -> tuple[Nfa, Nfa]:
    table = a.vars.extend(b.vars)
    return cylindrify(a, table), cylindrify(b, table)


def compile_formula(f: Formula, stats: BuildStats | None = None) -> Nfa:
    """Bottom-up automaton over the free variables of ``f``."""
    stats = stats if stats is not None else BuildStats(budget=None)
    budget = stats.budget
    if isinstance(f, ATOMS):
        return stats.record(atomic_automaton(f))
    if isinstance(f, Not):
        return stats.record(complement(compile_formula(f.child, stats), budget))
    if isinstance(f, (And, Or)):
        mode = "and" if isinstance(f, And) else "or"
        result = compile_formula(f.children[0], stats)
        for child in f.children[1:]:
            left, right = _lift(result, compile_formula(child, stats))
            result = stats.record(product(left, right, mode))
        return result
    body = compile_formula(f.body, stats)
    table = body.vars.extend(f.vars)
    body = cylindrify(body, table)
    if isinstance(f, Exists):
        return stats.record(project_exists(body, f.vars))
    inner = stats.record(complement(body, budget))
    return stats.record(complement(stats.record(project_exists(inner, f.vars)), budget))


@dataclass
class ClassicalResult:
    valid: bool
    base_states: int
    total_states: int
    automata: int
    time_ms: float
    sizes: list[int] = field(default_factory=list)


def decide_classical(
    g: PrenexFormula | Formula, budget: int | None = DEFAULT_STATE_BUDGET
) -> ClassicalResult:
    """Decide a ground formula with explicit projections and subset constructions.

    For a prenex formula the matrix automaton is built first and the prefix
    is then eliminated innermost block first; ``total_states`` sums the sizes
    of the automata produced while eliminating the prefix.
    """
    t0 = time.perf_counter()
    if not isinstance(g, PrenexFormula):
        if free_variables(g):
            raise ValueError("decide_classical expects a ground formula")
        stats = BuildStats(budget=budget)
        a = compile_formula(g, stats)
        ms = (time.perf_counter() - t0) * 1000
        return ClassicalResult(bool(a.initial & a.final), 0, stats.total_states, stats.automata, ms)

    bound = g.bound_variables()
    if set(free_variables(g.matrix)) - set(bound):
        raise ValueError("decide_classical expects a ground formula")
    base = compile_formula(g.matrix, BuildStats(budget=budget))
    a = cylindrify(base, VarTable(dict.fromkeys(bound)))
    stats = BuildStats(budget=budget)
    sizes = []
    negated = False
    for quantifier, block in reversed(g.prefix):
        # forall B: psi is handled as not exists B: not psi; a pending
        # negation is only materialised when a projection needs it
        if quantifier == "all":
            negated = not negated
        if negated:
            a = stats.record(complement(a, budget))
            sizes.append(a.num_states)
        a = stats.record(project_exists(a, block))
        sizes.append(a.num_states)
        negated = quantifier == "all"
    if negated:
        a = stats.record(complement(a, budget))
        sizes.append(a.num_states)
    ms = (time.perf_counter() - t0) * 1000
    return ClassicalResult(bool(a.initial & a.final), base.num_states, stats.total_states, stats.automata, ms, sizes)


# ---------------------------------------------------------------- dump format

def dump(a: Nfa) -> str:
    lines = [
        "VARS " + " ".join(a.vars.names),
        f"STATES {a.num_states}",
        "INITIAL " + " ".join(map(str, sorted(a.initial))),
        "FINAL " + " ".join(map(str, sorted(a.final))),
    ]
    for p, s, q in sorted(a.transitions, key=lambda t: (t[0], t[2], t[1].care, t[1].value)):
        lines.append(f"TRANS {p} {render_symbol(s, a.vars)} {q}")
    return "\n".join(lines) + "\n"


def load(text: str) -> Nfa:
    table = VarTable()
    num_states = 0
    initial: list[int] = []
    final: list[int] = []
    transitions = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "VARS":
            table = VarTable(rest.split())
        elif head == "STATES":
            num_states = int(rest)
        elif head == "INITIAL":
            initial = [int(x) for x in rest.split()]
        elif head == "FINAL":
            final = [int(x) for x in rest.split()]
        elif head == "TRANS":
            src, _, tail = rest.partition(" ")
            sym, _, dst = tail.rpartition(" ")
            transitions.append((int(src), parse_symbol(sym, table), int(dst)))
        else:
            raise ValueError(f"unknown dump line {raw!r}")
    return Nfa(table, num_states, frozenset(initial), frozenset(final), frozenset(transitions))
