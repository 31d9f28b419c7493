"""Deciding a quantifier prefix on the fly over nested antichain terms.

The ground formula is brought into the shape ``not ex B_m not ... not ex
B_1: matrix``.  Instead of building the chain of projected and complemented
automata, the engine computes symbolic terms for the extended final sets of
even levels and the extended non-final sets of odd levels, and finally tests
the nested initial state against the last term.

Transitions above level 0 are never materialised: ``pre`` on a down-closed
term reduces to ``cpre`` on its children one level below, and ``cpre`` on an
up-closed term reduces to ``pre`` on its children, bottoming out at explicit
predecessor sets of the matrix automaton.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .alphabet import Symbol, VarTable, expand
from .automata import DEFAULT_STATE_BUDGET, Nfa, compile_formula, cylindrify
from .formula import Not, PrenexFormula, free_variables, nnf
from .terms import Term, TermStore, member_initial, render

DEFAULT_TERM_BUDGET = 10**6

_NEG = "not"


@dataclass(frozen=True)
class PrefixSpec:
    """A ground formula as ``[not] ex B_m not ... not ex B_1: matrix``.

    ``blocks`` lists the existential blocks innermost first.  When ``flip``
    is set the engine decides the negation of the input and the final answer
    is inverted.
    """

    blocks: tuple[tuple[str, ...], ...]
    flip: bool
    matrix: Nfa
    var_tables: tuple[VarTable, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for block in self.blocks:
            if not block:
                raise ValueError("prefix blocks must be non-empty")
            if seen & set(block):
                raise ValueError("prefix blocks must be pairwise disjoint")
            seen.update(block)

    @property
    def depth(self) -> int:
        return len(self.blocks)


def _push(tokens: list, tok) -> None:
    if tokens and tok == _NEG and tokens[-1] == _NEG:
        tokens.pop()
    elif tokens and tok != _NEG and tokens[-1] != _NEG:
        tokens[-1] = tokens[-1] + tok
    else:
        tokens.append(tok)


def prefix_shape(p: PrenexFormula) -> tuple[list[tuple[str, ...]], bool, bool]:
    """Blocks (outermost first), whether the answer flips, whether the matrix is negated."""
    tokens: list = []
    for quantifier, block in p.prefix:
        if quantifier == "all":
            _push(tokens, _NEG)
            _push(tokens, tuple(block))
            _push(tokens, _NEG)
        else:
            _push(tokens, tuple(block))
    flip = bool(tokens) and tokens[0] != _NEG
    if tokens and tokens[0] == _NEG:
        tokens = tokens[1:]
    negate_matrix = bool(tokens) and tokens[-1] == _NEG
    if negate_matrix:
        tokens = tokens[:-1]
    return [t for t in tokens if t != _NEG], flip, negate_matrix


def normalize_prefix(p: PrenexFormula) -> PrefixSpec:
    """Fuse adjacent existential blocks, cancel double negations, build the matrix automaton.

    A negation directly above the matrix is pushed into it; a missing
    outermost negation is recorded as ``flip``.
    """
    bound = p.bound_variables()
    if set(free_variables(p.matrix)) - set(bound):
        raise ValueError("normalize_prefix expects a ground formula")
    outer_first, flip, negate_matrix = prefix_shape(p)
    matrix_formula = nnf(Not(p.matrix)) if negate_matrix else p.matrix
    # tracks follow the order in which the prefix binds them
    matrix = cylindrify(compile_formula(matrix_formula), VarTable(dict.fromkeys(bound)))
    blocks = tuple(reversed(outer_first))
    tables = [matrix.vars]
    for block in blocks:
        tables.append(tables[-1].remove(block))
    return PrefixSpec(blocks, flip, matrix, tuple(tables))


@dataclass
class NestedResult:
    valid: bool
    term_nodes: int
    iterations: list[int]
    time_ms: float
    base_states: int
    trace: list[tuple[str, str]] = field(default_factory=list)


class LevelContext:
    """Symbolic pre/cpre and fixpoints over one matrix automaton and block list.

    ``blocks[k]`` is the track mask projected when going from level ``k`` to
    level ``k+1``.  Blocks may be empty here; only ``PrefixSpec`` insists on
    non-empty ones.
    """

    def __init__(self, matrix: Nfa, blocks: list[int], store: TermStore | None = None, trace: bool = False):
        self.matrix = matrix
        self.blocks = list(blocks)
        self.store = store if store is not None else TermStore()
        masks = [matrix.vars.full_mask]
        for b in self.blocks:
            masks.append(masks[-1] & ~b)
        self.level_masks = masks
        self.initial = _mask(matrix.initial)
        self.final = _mask(matrix.final)
        incoming: dict[int, list[tuple[Symbol, int]]] = {}
        for p, s, q in matrix.transitions:
            incoming.setdefault(q, []).append((s, p))
        self._incoming = incoming
        self._base_pre: dict = {}
        self._pre: dict = {}
        self._cpre: dict = {}
        self.iterations: dict[int, int] = {}
        self.extended: dict[int, Term] = {}
        self.tracing = trace
        self.trace: list[tuple[str, str]] = []

    def zero(self, level: int) -> Symbol:
        return Symbol(self.level_masks[level], 0)

    def omegas(self, sym: Symbol, level: int) -> list[Symbol]:
        """Symbols of level ``level`` projecting onto ``sym`` (a level+1 symbol)."""
        return expand(sym, self.blocks[level])

    # -- level 0, explicit

    def base_pre(self, states: int, sym: Symbol) -> int:
        key = (states, sym.care, sym.value)
        hit = self._base_pre.get(key)
        if hit is not None:
            return hit
        result = 0
        q = 0
        rest = states
        while rest:
            if rest & 1:
                for s, p in self._incoming.get(q, ()):
                    if s.compatible(sym):
                        result |= 1 << p
            rest >>= 1
            q += 1
        self._base_pre[key] = result
        return result

    # -- symbolic images

    def pre(self, t: Term, sym: Symbol) -> Term:
        """Predecessors of a down-closed (or level-0) term under the projected relation."""
        if t.level == 0:
            return self.store.leaf(self.base_pre(t.states, sym))
        if t.level % 2:
            raise ValueError("pre is computed on even-level terms")
        key = (t, sym.care, sym.value)
        hit = self._pre.get(key)
        if hit is None:
            hit = self._pre[key] = self.pre_exact(t, self.omegas(sym, t.level))
        return hit

    def pre_exact(self, t: Term, omegas: list[Symbol]) -> Term:
        """Predecessors of a down-closed term under the unprojected relation, one symbol at a time."""
        images = [self.cpre(c, w) for c in t.children for w in omegas]
        return self.store.node(t.level, images)

    def cpre(self, t: Term, sym: Symbol) -> Term:
        """Controllable predecessors of an up-closed term under the projected relation."""
        if t.level % 2 == 0:
            raise ValueError("cpre is computed on odd-level terms")
        key = (t, sym.care, sym.value)
        hit = self._cpre.get(key)
        if hit is None:
            hit = self._cpre[key] = self.cpre_exact(t, self.omegas(sym, t.level))
        return hit

    def cpre_exact(self, t: Term, omegas: list[Symbol]) -> Term:
        images = [self.pre(c, w) for c in t.children for w in omegas]
        return self.store.node(t.level, images)

    # -- fixpoints

    def final_extension_base(self) -> Term:
        zero = self.zero(1)
        reach = self.final
        while True:
            grown = reach | self.base_pre(reach, zero)
            self.iterations[0] = self.iterations.get(0, 0) + 1
            if grown == reach:
                break
            reach = grown
        term = self.store.leaf(reach)
        self._log("F0#", term)
        self.extended[0] = term
        return term

    def extend_final(self, level: int, nonfinal_below: Term) -> Term:
        """Least fixpoint for the extended final set of an even level >= 2."""
        return self._saturate(level, nonfinal_below, self.cpre, f"F{level}#")

    def restrict_nonfinal(self, level: int, final_below: Term) -> Term:
        """Greatest fixpoint for the extended non-final set of an odd level."""
        return self._saturate(level, final_below, self.pre, f"N{level}#")

    def _saturate(self, level: int, seed: Term, image, label: str) -> Term:
        store = self.store
        constructor = "up" if level % 2 else "down"
        omegas = self.omegas(self.zero(level + 1), level)
        accumulated = frozenset([seed])
        frontier = [seed]
        rounds = 0
        self._log(label, store.node(level, accumulated))
        while frontier:
            rounds += 1
            images = [image(g, w) for g in frontier for w in omegas]
            candidate = store.prune(list(accumulated) + images, constructor)
            frontier = [g for g in candidate if g not in accumulated]
            accumulated = candidate
            if self.tracing:
                self._log(label, store.node(level, accumulated))
        self.iterations[level] = self.iterations.get(level, 0) + rounds
        result = store.node(level, accumulated)
        self.extended[level] = result
        return result

    def _log(self, label: str, term: Term) -> None:
        if self.tracing:
            self.trace.append((label, render(term)))


def sym_pre(t: Term, tau: Symbol, ctx: LevelContext) -> Term:
    return ctx.pre(t, tau)


def sym_cpre(t: Term, tau: Symbol, ctx: LevelContext) -> Term:
    return ctx.cpre(t, tau)


def fixpoint_Fsharp(i: int, ctx: LevelContext) -> Term:
    """Extended final term of even level ``i``; needs the level ``i-1`` result in ``ctx``."""
    if i % 2:
        raise ValueError("final extensions live on even levels")
    if i == 0:
        return ctx.final_extension_base()
    return ctx.extend_final(i, ctx.extended[i - 1])


def fixpoint_Nsharp(i: int, ctx: LevelContext) -> Term:
    """Restricted non-final term of odd level ``i``; needs the level ``i-1`` result in ``ctx``."""
    if i % 2 == 0:
        raise ValueError("non-final restrictions live on odd levels")
    return ctx.restrict_nonfinal(i, ctx.extended[i - 1])


def _mask(states) -> int:
    mask = 0
    for s in states:
        mask |= 1 << s
    return mask


def decide_nested(
    spec: PrefixSpec, budget: int | None = DEFAULT_TERM_BUDGET, trace: bool = False
) -> NestedResult:
    t0 = time.perf_counter()
    table = spec.matrix.vars
    store = TermStore(budget)
    ctx = LevelContext(spec.matrix, [table.mask_of(b) for b in spec.blocks], store, trace)
    m = spec.depth
    if m == 0:
        holds = bool(ctx.initial & ctx.final)
    else:
        fixpoint_Fsharp(0, ctx)
        for level in range(1, m):
            if level % 2:
                fixpoint_Nsharp(level, ctx)
            else:
                fixpoint_Fsharp(level, ctx)
        last = store.node(m, [ctx.extended[m - 1]])
        ctx._log(f"{'N' if m % 2 else 'F'}{m}", last)
        member = member_initial(last, ctx.initial)
        # an odd top level holds the non-final states
        holds = not member if m % 2 else member
    valid = holds != spec.flip
    ms = (time.perf_counter() - t0) * 1000
    iterations = [ctx.iterations.get(i, 0) for i in range(m)]
    return NestedResult(valid, store.nodes, iterations, ms, spec.matrix.num_states, ctx.trace)


def decide_prenex(p: PrenexFormula, budget: int | None = DEFAULT_TERM_BUDGET, trace: bool = False) -> NestedResult:
    return decide_nested(normalize_prefix(p), budget, trace)


__all__ = [
    "DEFAULT_STATE_BUDGET",
    "DEFAULT_TERM_BUDGET",
    "LevelContext",
    "NestedResult",
    "PrefixSpec",
    "decide_nested",
    "decide_prenex",
    "fixpoint_Fsharp",
    "fixpoint_Nsharp",
    "normalize_prefix",
    "prefix_shape",
    "sym_cpre",
    "sym_pre",
]
