"""Explicit subset-construction tower used as a brute-force oracle.

Elements of level ``k`` are integer codes: a base state at level 0, and at
level ``k >= 1`` the bitmask of the level ``k-1`` codes it contains.  Sets of
level-``k`` elements are boolean numpy arrays indexed by code.
"""

from __future__ import annotations

import random
from functools import lru_cache

import numpy as np

from ws1s_nested.alphabet import Symbol, VarTable, all_symbols, expand, submasks
from ws1s_nested.automata import Nfa
from ws1s_nested.terms import TermStore, universe_size


class Tower:
    def __init__(self, nfa: Nfa, blocks: list[int]):
        self.nfa = nfa
        self.n = nfa.num_states
        self.blocks = list(blocks)
        masks = [nfa.vars.full_mask]
        for b in self.blocks:
            masks.append(masks[-1] & ~b)
        self.level_masks = masks
        self.det = lru_cache(maxsize=None)(self._det)
        self.proj_mask = lru_cache(maxsize=None)(self._proj_mask)

    def size(self, k: int) -> int:
        return universe_size(k, self.n)

    def codes(self, k: int) -> np.ndarray:
        return np.arange(self.size(k), dtype=np.int64)

    def symbols(self, k: int) -> list[Symbol]:
        """Concrete symbols over the tracks alive at level ``k``."""
        care = self.level_masks[k]
        return [Symbol(care, v) for v in submasks(care)]

    def zero(self, k: int) -> Symbol:
        return Symbol(self.level_masks[k], 0)

    # level-0 explicit relation
    def base_succ(self, p: int, sym: Symbol) -> int:
        out = 0
        for s, q in self.nfa.outgoing.get(p, ()):
            if s.compatible(sym):
                out |= 1 << q
        return out

    def _det(self, k: int, omega: Symbol) -> np.ndarray:
        """Code of the unique successor of every level-k element under ``omega`` (k >= 1)."""
        x = self.codes(k)
        y = np.zeros_like(x)
        for p in range(self.size(k - 1)):
            m = int(self.proj_mask(k - 1, omega)[p])
            y |= np.where((x >> p) & 1 == 1, m, 0)
        return y

    def _proj_mask(self, k: int, tau: Symbol) -> np.ndarray:
        """Bitmask of projected successors of every level-k element under ``tau``."""
        if self.size(k) > 62:
            raise ValueError("level too large for successor masks")
        if k == 0:
            return np.array([self.base_succ(p, tau) for p in range(self.n)], dtype=np.int64)
        out = np.zeros(self.size(k), dtype=np.int64)
        for w in expand(tau, self.blocks[k]):
            out |= np.left_shift(1, self.det(k, w))
        return out

    def _base_sets(self, mask_fn) -> np.ndarray:
        return np.array([mask_fn(p) for p in range(self.n)], dtype=bool)

    def pre(self, k: int, s: np.ndarray, tau: Symbol) -> np.ndarray:
        """pre under the projected level-k relation; ``tau`` lives on level k+1."""
        if k == 0:
            return self._base_sets(lambda p: any(s[q] for q in _bits(self.base_succ(p, tau))))
        out = np.zeros(self.size(k), dtype=bool)
        for w in expand(tau, self.blocks[k]):
            out |= s[self.det(k, w)]
        return out

    def cpre(self, k: int, s: np.ndarray, tau: Symbol) -> np.ndarray:
        if k == 0:
            return self._base_sets(lambda p: all(s[q] for q in _bits(self.base_succ(p, tau))))
        out = np.ones(self.size(k), dtype=bool)
        for w in expand(tau, self.blocks[k]):
            out &= s[self.det(k, w)]
        return out

    def image_exact(self, k: int, s: np.ndarray, omega: Symbol) -> np.ndarray:
        """pre (equivalently cpre) under the unprojected, deterministic level-k relation."""
        return s[self.det(k, omega)]

    # closures of single generators
    def down_of(self, k: int, generator_mask: int) -> np.ndarray:
        return (self.codes(k) & ~generator_mask) == 0

    def up_of(self, k: int, generator_mask: int) -> np.ndarray:
        return (self.codes(k) & generator_mask) != 0

    def extended_sets(self, m: int) -> list[np.ndarray]:
        """F0#, N1#, F2#, ... explicitly, up to level m-1."""
        final = np.zeros(self.n, dtype=bool)
        for q in self.nfa.final:
            final[q] = True
        current = _lfp(final, lambda z: self.pre(0, z, self.zero(1)))
        out = [current]
        for k in range(1, m):
            gen = to_mask(current)
            if k % 2:
                start = self.up_of(k, gen)
                current = _gfp(start, lambda z, k=k: self.cpre(k, z, self.zero(k + 1)))
            else:
                start = self.down_of(k, gen)
                current = _lfp(start, lambda z, k=k: self.pre(k, z, self.zero(k + 1)))
            out.append(current)
        return out

    def decide(self, m: int) -> bool:
        """Whether the ``not ex B_m ... not ex B_1`` chain holds (answer before any flip)."""
        initial = 0
        for q in self.nfa.initial:
            initial |= 1 << q
        if m == 0:
            return any(q in self.nfa.final for q in self.nfa.initial)
        top = to_mask(self.extended_sets(m)[-1])
        code = initial
        for _ in range(m - 1):
            code = 1 << code
        last = self.up_of(m, top) if m % 2 else self.down_of(m, top)
        member = bool(last[code])
        return not member if m % 2 else member


def _lfp(start, step):
    z = start.copy()
    while True:
        grown = z | step(z)
        if np.array_equal(grown, z):
            return z
        z = grown


def _gfp(start, step):
    z = start.copy()
    while True:
        shrunk = z & step(z)
        if np.array_equal(shrunk, z):
            return z
        z = shrunk


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def to_mask(arr: np.ndarray) -> int:
    return int.from_bytes(np.packbits(arr.astype(bool), bitorder="little").tobytes(), "little")


def from_mask(mask: int, size: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(size)], dtype=bool)


# ---------------------------------------------------------------- random objects

def random_nfa(rng: random.Random, max_states: int = 4, names=("X", "Y")) -> Nfa:
    n = rng.randint(1, max_states)
    table = VarTable(names)
    width = len(table)
    transitions = set()
    for p in range(n):
        for q in range(n):
            for _ in range(rng.randint(0, 2)):
                care = rng.randrange(1 << width)
                value = rng.randrange(1 << width) & care
                transitions.add((p, Symbol(care, value), q))
    initial = frozenset(q for q in range(n) if rng.random() < 0.4) or frozenset([0])
    final = frozenset(q for q in range(n) if rng.random() < 0.4)
    return Nfa(table, n, initial, final, frozenset(transitions))


def random_term(rng: random.Random, store: TermStore, level: int, n: int, width: int = 3, pruned: bool = True):
    if level == 0:
        return store.leaf(rng.randrange(1 << n))
    count = rng.randint(0, width)
    children = [random_term(rng, store, level - 1, n, width, pruned) for _ in range(count)]
    return store.node(level, children, pruned)


def closure_violations(a: Nfa, max_len: int = 5) -> int:
    """Accepted words of length <= max_len whose 0-padding is rejected.

    Words are grouped by the state set they reach, so the count is exact
    without listing every word.
    """
    width = len(a.vars)
    zero = Symbol((1 << width) - 1, 0)
    letters = all_symbols(width)
    final = a.final
    layer = {frozenset(a.initial): 1}
    bad = 0
    for depth in range(max_len + 1):
        for states, count in layer.items():
            if states & final and not a.post(zero, states) & final:
                bad += count
        if depth == max_len:
            break
        nxt: dict = {}
        for states, count in layer.items():
            for sym in letters:
                target = a.post(sym, states)
                nxt[target] = nxt.get(target, 0) + count
        layer = nxt
    return bad
