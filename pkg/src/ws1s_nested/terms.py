"""Nested symbolic terms over sets of base-automaton states.

A term of level 0 is a set of base states.  A term of odd level ``2j+1``
stands for the upward closure of the choice (unordered Cartesian product)
of its children, all of level ``2j``; a term of even level ``2j > 0`` stands
for the downward closure of its children, all of level ``2j-1``.  A term of
level ``k`` therefore denotes a set of ``k``-fold nested subsets of base
states.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

import numpy as np

from .alphabet import SizeGuardError
from .automata import ResourceLimitExceeded

DEFAULT_DENOTE_CAP = 1 << 16


class LevelMismatch(ValueError):
    pass


class Term:
    """Immutable term node; compare and hash structurally."""

    __slots__ = ("level", "states", "children", "_hash")

    def __init__(self, level: int, states: int = 0, children: Iterable[Term] = ()):
        children = frozenset(children)
        if level < 0:
            raise ValueError("term level must be non-negative")
        if level == 0:
            if children:
                raise LevelMismatch("a level-0 term has no children")
        else:
            if states:
                raise LevelMismatch("only level-0 terms carry states")
            for c in children:
                if c.level != level - 1:
                    raise LevelMismatch(f"child of level {c.level} under a level-{level} term")
        self.level = level
        self.states = states
        self.children = children
        self._hash = hash((level, states, children))

    @property
    def is_up(self) -> bool:
        return self.level % 2 == 1

    @property
    def is_down(self) -> bool:
        return self.level > 0 and self.level % 2 == 0

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term) or self._hash != other._hash:
            return False
        return self.level == other.level and self.states == other.states and self.children == other.children

    def __repr__(self) -> str:
        return f"Term({render(self)})"


def state_mask(states: Iterable[int]) -> int:
    mask = 0
    for s in states:
        mask |= 1 << s
    return mask


def mask_states(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


# ---------------------------------------------------------------- subsumption

def subsumes(s: Term, t: Term, memo: dict | None = None) -> bool:
    """Whether the denotation of ``s`` is included in that of ``t``."""
    if s.level != t.level:
        raise LevelMismatch(f"cannot compare terms of levels {s.level} and {t.level}")
    return _subsumes(s, t, memo if memo is not None else {})


def _subsumes(s: Term, t: Term, memo: dict) -> bool:
    if s is t:
        return True
    if s.level == 0:
        return not (s.states & ~t.states)
    key = (s, t)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if s.level % 2:
        # every generator on the right contains some generator on the left
        result = all(any(_subsumes(x, y, memo) for x in s.children) for y in t.children)
    else:
        result = all(any(_subsumes(x, y, memo) for y in t.children) for x in s.children)
    memo[key] = result
    return result


def prune(children: Iterable[Term], constructor: str, memo: dict | None = None) -> frozenset[Term]:
    """Reduce a generator set to an antichain with the same denotation.

    Under ``"down"`` the maximal generators are kept, under ``"up"`` the
    minimal ones.  Among mutually subsuming generators the first in
    canonical order survives.
    """
    if constructor not in ("up", "down"):
        raise ValueError(f"unknown constructor {constructor!r}")
    memo = memo if memo is not None else {}
    ordered = sorted(set(children), key=sort_key)
    keep_max = constructor == "down"
    kept: list[Term] = []
    for x in ordered:
        if keep_max:
            if any(_subsumes(x, y, memo) for y in kept):
                continue
            kept = [y for y in kept if not _subsumes(y, x, memo)]
        else:
            if any(_subsumes(y, x, memo) for y in kept):
                continue
            kept = [y for y in kept if not _subsumes(x, y, memo)]
        kept.append(x)
    return frozenset(kept)


def sort_key(t: Term) -> tuple[int, int, int]:
    """Cheap deterministic order: smaller generators first, ties by hash."""
    size = bin(t.states).count("1") if t.level == 0 else len(t.children)
    return (t.level, size, t._hash)


# ---------------------------------------------------------------- store

class TermStore:
    """Hash-consing table with a subsumption memo and a node budget."""

    def __init__(self, budget: int | None = None):
        self.budget = budget
        self._table: dict[Term, Term] = {}
        self.memo: dict = {}

    @property
    def nodes(self) -> int:
        return len(self._table)

    def intern(self, t: Term) -> Term:
        found = self._table.get(t)
        if found is not None:
            return found
        self._table[t] = t
        if self.budget is not None and len(self._table) > self.budget:
            raise ResourceLimitExceeded(f"term budget of {self.budget} nodes exceeded")
        return t

    def leaf(self, states: Iterable[int] | int) -> Term:
        mask = states if isinstance(states, int) else state_mask(states)
        return self.intern(Term(0, mask))

    def node(self, level: int, children: Iterable[Term], pruned: bool = True) -> Term:
        if level < 1:
            raise LevelMismatch("use leaf() for level-0 terms")
        children = [self.intern(c) for c in children]
        if pruned:
            children = prune(children, "up" if level % 2 else "down", self.memo)
        return self.intern(Term(level, 0, children))

    def up(self, children: Iterable[Term], pruned: bool = True) -> Term:
        return self._infer(children, pruned, odd=True)

    def down(self, children: Iterable[Term], pruned: bool = True) -> Term:
        return self._infer(children, pruned, odd=False)

    def _infer(self, children: Iterable[Term], pruned: bool, odd: bool) -> Term:
        children = list(children)
        if not children:
            raise LevelMismatch("cannot infer the level of an empty term; use node()")
        level = children[0].level + 1
        if (level % 2 == 1) != odd:
            raise LevelMismatch(f"a level-{level} term cannot be {'an up' if odd else 'a down'} node")
        return self.node(level, children, pruned)

    def subsumes(self, s: Term, t: Term) -> bool:
        return subsumes(s, t, self.memo)

    def prune(self, children: Iterable[Term], constructor: str) -> frozenset[Term]:
        return prune(children, constructor, self.memo)


# ---------------------------------------------------------------- membership

def member_initial(t: Term, initial: Iterable[int] | int) -> bool:
    """Whether the nested singleton chain over ``initial`` lies in ``t``.

    For a term of level ``m`` this tests ``I_{m-1}`` where ``I_0`` is the
    set of initial base states and ``I_{k+1} = {I_k}``.
    """
    if t.level < 1:
        raise LevelMismatch("membership needs a term of level at least 1")
    mask = initial if isinstance(initial, int) else state_mask(initial)
    return _member(t, mask)


def _member(t: Term, initial: int) -> bool:
    if t.level == 1:
        return all(c.states & initial for c in t.children)
    if t.level % 2:
        return all(_member(c, initial) for c in t.children)
    return any(_member(c, initial) for c in t.children)


# ---------------------------------------------------------------- denotation

def universe_size(level: int, base: int) -> int:
    """Number of elements of ``Q_level`` when ``Q_0`` has ``base`` states."""
    size = base
    for _ in range(level):
        size = 1 << size
    return size


def denote_mask(t: Term, base: int, cap: int = DEFAULT_DENOTE_CAP) -> int:
    """Denotation of ``t`` as a bitmask over element codes of ``Q_level``.

    Elements of ``Q_0`` are the state indices; an element of ``Q_k`` is
    coded by the bitmask of the codes of its members in ``Q_{k-1}``.
    """
    if t.level == 0:
        if t.states >> base:
            raise ValueError("term mentions a state outside the universe")
        return t.states
    width = universe_size(t.level - 1, base)
    candidates = 1 << width
    if candidates > cap or width > 62:
        raise SizeGuardError(f"denotation of a level-{t.level} term over {base} states exceeds cap {cap}")
    codes = np.arange(candidates, dtype=np.int64)
    gens = [denote_mask(c, base, cap) for c in t.children]
    if t.level % 2:
        ok = np.ones(candidates, dtype=bool)
        for g in gens:
            ok &= (codes & g) != 0
    else:
        ok = np.zeros(candidates, dtype=bool)
        full = (1 << width) - 1
        for g in gens:
            ok |= (codes & (full & ~g)) == 0
    return int.from_bytes(np.packbits(ok, bitorder="little").tobytes(), "little")


def decode(code: int, level: int):
    """Nested frozenset for an element code of ``Q_level``."""
    if level == 0:
        return code
    return frozenset(decode(j, level - 1) for j in mask_states(code))


def denote(t: Term, base: int, cap: int = DEFAULT_DENOTE_CAP) -> frozenset:
    """Explicit denotation of ``t`` as a set of nested frozensets."""
    mask = denote_mask(t, base, cap)
    if bin(mask).count("1") > cap:
        raise SizeGuardError("denotation has too many elements to list")
    return frozenset(decode(c, t.level) for c in mask_states(mask))


# ---------------------------------------------------------------- rendering

def render(t: Term, names: Sequence[str] | None = None) -> str:
    def name(i: int) -> str:
        return names[i] if names is not None else str(i)

    if t.level == 0:
        return "{" + ",".join(name(i) for i in mask_states(t.states)) + "}"
    inner = ",".join(sorted(render(c, names) for c in t.children))
    return ("↑⊗{" if t.level % 2 else "↓{") + inner + "}"


_TERM_TOKEN = re.compile(r"\s*(↑⊗\{|↓\{|\{|\}|,|[A-Za-z0-9_]+)")


def parse_term(
    text: str,
    names: Sequence[str] | None = None,
    level: int | None = None,
    store: TermStore | None = None,
    pruned: bool = False,
) -> Term:
    """Read the canonical rendering back; ``level`` is needed only for empty nodes."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM_TOKEN.match(text, pos)
        if m is None:
            raise ValueError(f"bad term text at {pos}: {text[pos:pos + 10]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    index = {n: i for i, n in enumerate(names)} if names is not None else None
    store = store if store is not None else TermStore()
    i = 0

    def state(tok: str) -> int:
        if index is not None:
            return index[tok]
        return int(tok)

    def parse(expected: int | None) -> Term:
        nonlocal i
        tok = tokens[i]
        i += 1
        if tok == "{":
            states = []
            while tokens[i] != "}":
                states.append(state(tokens[i]))
                i += 1
                if tokens[i] == ",":
                    i += 1
            i += 1
            return store.leaf(states)
        if tok not in ("↑⊗{", "↓{"):
            raise ValueError(f"unexpected token {tok!r}")
        children = []
        child_level = None if expected is None else expected - 1
        while tokens[i] != "}":
            child = parse(child_level)
            children.append(child)
            child_level = child.level
            if tokens[i] == ",":
                i += 1
        i += 1
        if child_level is None:
            raise ValueError("cannot infer the level of an empty node; pass level=")
        node_level = child_level + 1
        if (tok == "↑⊗{") != (node_level % 2 == 1):
            raise LevelMismatch(f"constructor {tok[:-1]} does not fit level {node_level}")
        return store.node(node_level, children, pruned)

    t = parse(level)
    if i != len(tokens):
        raise ValueError("trailing input after term")
    return t
