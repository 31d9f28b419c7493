"""Variables, tracks and symbols over variable sets.

A symbol is stored as a pair of bitsets over track indices: ``care`` marks the
tracks the symbol constrains and ``value`` holds the bits on those tracks.  A
symbol with every track cared is a total assignment; fewer cared tracks stand
for the set of all total assignments that agree on the cared ones.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

DEFAULT_CONCRETIZE_CAP = 20


class SizeGuardError(ValueError):
    """An explicit expansion would exceed its configured size cap."""


class VarTable:
    """Ordered variable names with dense 0-based track indices."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str] = ()):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable in table {names}")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VarTable) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"VarTable({list(self.names)!r})"

    def index(self, name: str) -> int:
        return self._index[name]

    @property
    def full_mask(self) -> int:
        return (1 << len(self.names)) - 1

    def mask_of(self, names: Iterable[str]) -> int:
        mask = 0
        for name in names:
            mask |= 1 << self._index[name]
        return mask

    def remove(self, block: Iterable[str]) -> VarTable:
        block = set(block)
        return VarTable(n for n in self.names if n not in block)

    def extend(self, names: Iterable[str]) -> VarTable:
        extra = [n for n in dict.fromkeys(names) if n not in self._index]
        return VarTable(self.names + tuple(extra))

    def issubset(self, other: VarTable) -> bool:
        return all(n in other for n in self.names)


@dataclass(frozen=True)
class Symbol:
    care: int
    value: int

    def __post_init__(self):
        if self.value & ~self.care:
            raise ValueError("symbol value has bits outside its cared tracks")

    def compatible(self, other: Symbol) -> bool:
        """True when some total assignment is covered by both symbols."""
        return not ((self.value ^ other.value) & self.care & other.care)

    def meet(self, other: Symbol) -> Symbol | None:
        if not self.compatible(other):
            return None
        return Symbol(self.care | other.care, self.value | other.value)

    def covers(self, other: Symbol) -> bool:
        """Every assignment of ``other`` is also an assignment of ``self``."""
        return (self.care & ~other.care) == 0 and not ((self.value ^ other.value) & self.care)

    def uncare(self, mask: int) -> Symbol:
        return Symbol(self.care & ~mask, self.value & ~mask)


def zero_symbol(table: VarTable) -> Symbol:
    return Symbol(table.full_mask, 0)


def symbol_from_bits(table: VarTable, bits: dict[str, int]) -> Symbol:
    """Symbol caring exactly about the variables in ``bits``."""
    care = value = 0
    for name, bit in bits.items():
        i = table.index(name)
        care |= 1 << i
        if bit:
            value |= 1 << i
    return Symbol(care, value)


def remap_symbol(s: Symbol, source: VarTable, target: VarTable) -> Symbol:
    """Re-index ``s`` from ``source`` onto ``target``.

    Tracks of ``source`` missing from ``target`` are dropped (projection);
    tracks of ``target`` missing from ``source`` become don't-care.
    """
    care = value = 0
    for i, name in enumerate(source.names):
        if not (s.care >> i) & 1 or name not in target:
            continue
        j = target.index(name)
        care |= 1 << j
        if (s.value >> i) & 1:
            value |= 1 << j
    return Symbol(care, value)


def project_symbol(s: Symbol, table: VarTable, block: Iterable[str]) -> tuple[Symbol, VarTable]:
    """Drop the tracks of ``block``; returns the symbol and the reduced table."""
    reduced = table.remove(block)
    return remap_symbol(s, table, reduced), reduced


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, starting with 0."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask


def expand(s: Symbol, block_mask: int) -> list[Symbol]:
    """Every extension of ``s`` with a fixed bit on each track of ``block_mask``."""
    care = s.care | block_mask
    base = s.value & ~block_mask
    return [Symbol(care, base | v) for v in submasks(block_mask)]


def inverse_projection(
    t: Symbol, table: VarTable, block: Sequence[str], compress: bool = False
) -> tuple[list[Symbol], VarTable]:
    """Symbols over ``table`` extended by ``block`` that project onto ``t``.

    With ``compress`` the result is the single symbol leaving the block
    tracks uncared; otherwise all 2^|block| concrete extensions.
    """
    if any(name in table for name in block):
        raise ValueError("block overlaps the symbol's table")
    full = table.extend(block)
    lifted = remap_symbol(t, table, full)
    if compress:
        return [lifted], full
    return expand(lifted, full.mask_of(block)), full


def concretize(s: Symbol, width: int, cap: int = DEFAULT_CONCRETIZE_CAP) -> list[Symbol]:
    full = (1 << width) - 1
    free = full & ~s.care
    if bin(free).count("1") > cap:
        raise SizeGuardError(f"{bin(free).count('1')} don't-care tracks exceed cap {cap}")
    return expand(s, free)


def all_symbols(width: int) -> list[Symbol]:
    full = (1 << width) - 1
    return [Symbol(full, v) for v in range(1 << width)]


def render_symbol(s: Symbol, table: VarTable) -> str:
    parts = []
    for i, name in enumerate(table.names):
        bit = "?" if not (s.care >> i) & 1 else str((s.value >> i) & 1)
        parts.append(f"{name}↦{bit}")
    return "⟨" + ",".join(parts) + "⟩"


_SYMBOL_ITEM = re.compile(r"\s*([A-Z][A-Za-z0-9]*)\s*↦\s*([01?])\s*")


def parse_symbol(text: str, table: VarTable) -> Symbol:
    text = text.strip()
    if not (text.startswith("⟨") and text.endswith("⟩")):
        raise ValueError(f"malformed symbol {text!r}")
    body = text[1:-1].strip()
    bits = {}
    if body:
        for item in body.split(","):
            m = _SYMBOL_ITEM.fullmatch(item)
            if m is None:
                raise ValueError(f"malformed symbol item {item!r}")
            if m.group(2) != "?":
                bits[m.group(1)] = int(m.group(2))
    return symbol_from_bits(table, bits)


def merge_cubes(values: Iterable[int], width: int) -> list[Symbol]:
    """Cover a set of total assignments with don't-care symbols.

    Adjacent cubes (same care, values differing on one cared track) are
    merged until nothing changes; the cover is exact but not minimal.
    """
    full = (1 << width) - 1
    cubes = {(full, v) for v in values}
    changed = True
    while changed:
        changed = False
        by_care: dict[int, set[int]] = {}
        for care, value in cubes:
            by_care.setdefault(care, set()).add(value)
        merged = set()
        used = set()
        for care, vals in by_care.items():
            for value in vals:
                bit = care
                while bit:
                    low = bit & -bit
                    bit ^= low
                    if value & low:
                        continue
                    partner = value | low
                    if partner in vals:
                        merged.add((care & ~low, value))
                        used.add((care, value))
                        used.add((care, partner))
        if merged:
            cubes = (cubes - used) | merged
            changed = True
    # a merged cube may still be covered by another one
    result = sorted(cubes, key=lambda cv: (-bin(full & ~cv[0]).count("1"), cv))
    kept: list[Symbol] = []
    for care, value in result:
        s = Symbol(care, value)
        if not any(k.covers(s) for k in kept):
            kept.append(s)
    return kept
