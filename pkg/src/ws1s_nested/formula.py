"""WS1S formulas: parsing, printing, desugaring and prenexing.

Concrete syntax::

    formula ::= quant | disj
    quant   ::= ("ex2" | "all2") var ("," var)* ":" formula
    disj    ::= conj ("|" conj)*
    conj    ::= neg ("&" neg)*
    neg     ::= "~" neg | quant | atom | "(" formula ")"
    atom    ::= var "sub" var | "sing" var | var "=" "{0}" | var "=" var "+" "1"

A quantifier's scope extends as far right as possible.  ``#`` starts a line
comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Sub:
    left: str
    right: str


@dataclass(frozen=True)
class Sing:
    var: str


@dataclass(frozen=True)
class Zeroth:
    """``var = {0}``."""

    var: str


@dataclass(frozen=True)
class Succ:
    """``left = right + 1``."""

    left: str
    right: str


@dataclass(frozen=True)
class Not:
    child: Formula


@dataclass(frozen=True)
class And:
    children: tuple[Formula, ...]


@dataclass(frozen=True)
class Or:
    children: tuple[Formula, ...]


def _check_block(vars: tuple[str, ...]) -> None:
    if not vars:
        raise ValueError("quantifier block must not be empty")
    if len(set(vars)) != len(vars):
        raise ValueError(f"duplicate variable in quantifier block {vars}")


@dataclass(frozen=True)
class Exists:
    vars: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        _check_block(self.vars)


@dataclass(frozen=True)
class Forall:
    vars: tuple[str, ...]
    body: Formula

    def __post_init__(self):
        _check_block(self.vars)


Atom = Union[Sub, Sing, Zeroth, Succ]
Formula = Union[Sub, Sing, Zeroth, Succ, Not, And, Or, Exists, Forall]
ATOMS = (Sub, Sing, Zeroth, Succ)


def atom_vars(a: Atom) -> tuple[str, ...]:
    if isinstance(a, (Sub, Succ)):
        return (a.left, a.right)
    return (a.var,)


# ---------------------------------------------------------------- lexing

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<zero>\{\s*0\s*\})
  | (?P<kw>ex2|all2|sub|sing)(?![A-Za-z0-9])
  | (?P<var>[A-Z][A-Za-z0-9]*)
  | (?P<one>1)(?![0-9])
  | (?P<punct>[~&|(),:=+])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            tokens.append(_Token(value if kind in ("kw", "punct") else kind, value, line, pos - line_start + 1))
        for k, ch in enumerate(m.group()):
            if ch == "\n":
                line, line_start = line + 1, pos + k + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str) -> _Token:
        tok = self.peek
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise FormulaSyntaxError(f"expected {kind!r}, found {shown!r}", tok.line, tok.column)
        self.pos += 1
        return tok

    def formula(self) -> Formula:
        if self.peek.kind in ("ex2", "all2"):
            return self.quant()
        return self.disj()

    def quant(self) -> Formula:
        tok = self.peek
        self.pos += 1
        names = [self.take("var").text]
        while self.peek.kind == ",":
            self.pos += 1
            names.append(self.take("var").text)
        self.take(":")
        if len(set(names)) != len(names):
            raise FormulaSyntaxError("duplicate variable in quantifier block", tok.line, tok.column)
        body = self.formula()
        cls = Exists if tok.kind == "ex2" else Forall
        return cls(tuple(names), body)

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.peek.kind == "|":
            self.pos += 1
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Formula:
        parts = [self.neg()]
        while self.peek.kind == "&":
            self.pos += 1
            parts.append(self.neg())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def neg(self) -> Formula:
        kind = self.peek.kind
        if kind == "~":
            self.pos += 1
            return Not(self.neg())
        if kind in ("ex2", "all2"):
            return self.quant()
        if kind == "(":
            self.pos += 1
            inner = self.formula()
            self.take(")")
            return inner
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek
        if tok.kind == "sing":
            self.pos += 1
            return Sing(self.take("var").text)
        if tok.kind != "var":
            raise FormulaSyntaxError(f"expected an atom, found {tok.text or 'end of input'!r}", tok.line, tok.column)
        left = self.take("var").text
        op = self.peek
        if op.kind == "sub":
            self.pos += 1
            return Sub(left, self.take("var").text)
        if op.kind == "=":
            self.pos += 1
            if self.peek.kind == "zero":
                self.pos += 1
                return Zeroth(left)
            right = self.take("var").text
            self.take("+")
            self.take("one")
            return Succ(left, right)
        raise FormulaSyntaxError(f"expected 'sub' or '=', found {op.text or 'end of input'!r}", op.line, op.column)


def parse_formula(text: str) -> Formula:
    parser = _Parser(text)
    f = parser.formula()
    tok = parser.peek
    if tok.kind != "eof":
        raise FormulaSyntaxError(f"unexpected {tok.text!r}", tok.line, tok.column)
    return f


# ---------------------------------------------------------------- printing

def pretty(f: Formula) -> str:
    """Render ``f`` so that ``parse_formula(pretty(f)) == f``."""
    if isinstance(f, Sub):
        return f"{f.left} sub {f.right}"
    if isinstance(f, Sing):
        return f"sing {f.var}"
    if isinstance(f, Zeroth):
        return f"{f.var} = {{0}}"
    if isinstance(f, Succ):
        return f"{f.left} = {f.right} + 1"
    if isinstance(f, (Exists, Forall)):
        kw = "ex2" if isinstance(f, Exists) else "all2"
        return f"{kw} {', '.join(f.vars)}: {pretty(f.body)}"
    if isinstance(f, Or):
        return " | ".join(_wrap(c, (Or, Exists, Forall)) for c in f.children)
    if isinstance(f, And):
        return " & ".join(_wrap(c, (And, Or, Exists, Forall)) for c in f.children)
    if isinstance(f, Not):
        return "~" + _wrap(f.child, (And, Or, Exists, Forall))
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, needs_parens: tuple) -> str:
    text = pretty(f)
    return f"({text})" if isinstance(f, needs_parens) else text


# ---------------------------------------------------------------- analysis

def free_variables(f: Formula) -> list[str]:
    seen: dict[str, None] = {}

    def walk(g: Formula, bound: frozenset[str]) -> None:
        if isinstance(g, ATOMS):
            for v in atom_vars(g):
                if v not in bound:
                    seen.setdefault(v, None)
        elif isinstance(g, Not):
            walk(g.child, bound)
        elif isinstance(g, (And, Or)):
            for c in g.children:
                walk(c, bound)
        else:
            walk(g.body, bound | set(g.vars))

    walk(f, frozenset())
    return list(seen)


def all_variables(f: Formula) -> list[str]:
    """Every variable name occurring in ``f``, bound or free, first occurrence first."""
    seen: dict[str, None] = {}

    def walk(g: Formula) -> None:
        if isinstance(g, ATOMS):
            for v in atom_vars(g):
                seen.setdefault(v, None)
        elif isinstance(g, Not):
            walk(g.child)
        elif isinstance(g, (And, Or)):
            for c in g.children:
                walk(c)
        else:
            for v in g.vars:
                seen.setdefault(v, None)
            walk(g.body)

    walk(f)
    return list(seen)


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, ATOMS):
        return True
    if isinstance(f, Not):
        return is_quantifier_free(f.child)
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(c) for c in f.children)
    return False


# ---------------------------------------------------------------- rewriting

def desugar(f: Formula) -> Formula:
    """Replace every universal block by a negated existential one."""
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.child))
    if isinstance(f, And):
        return And(tuple(desugar(c) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(desugar(c) for c in f.children))
    if isinstance(f, Exists):
        return Exists(f.vars, desugar(f.body))
    return Not(Exists(f.vars, Not(desugar(f.body))))


def close(f: Formula, task: str) -> Formula:
    """Bind the free variables: universally for validity, existentially for satisfiability."""
    if task not in ("validity", "satisfiability"):
        raise ValueError(f"unknown task {task!r}")
    fv = free_variables(f)
    if not fv:
        return f
    if task == "satisfiability":
        return Exists(tuple(fv), f)
    return Not(Exists(tuple(fv), Not(f)))


def rename(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename free occurrences according to ``mapping``."""
    if not mapping:
        return f
    if isinstance(f, Sub):
        return Sub(mapping.get(f.left, f.left), mapping.get(f.right, f.right))
    if isinstance(f, Succ):
        return Succ(mapping.get(f.left, f.left), mapping.get(f.right, f.right))
    if isinstance(f, Sing):
        return Sing(mapping.get(f.var, f.var))
    if isinstance(f, Zeroth):
        return Zeroth(mapping.get(f.var, f.var))
    if isinstance(f, Not):
        return Not(rename(f.child, mapping))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(rename(c, mapping) for c in f.children))
    inner = {k: v for k, v in mapping.items() if k not in f.vars}
    return type(f)(f.vars, rename(f.body, inner))


def nnf(f: Formula, positive: bool = True) -> Formula:
    """Negation normal form of a quantifier-free formula."""
    if isinstance(f, ATOMS):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return nnf(f.child, not positive)
    if isinstance(f, (And, Or)):
        flip = (isinstance(f, And)) != positive
        cls = Or if flip else And
        return cls(tuple(nnf(c, positive) for c in f.children))
    raise ValueError("nnf expects a quantifier-free formula")


@dataclass(frozen=True)
class PrenexFormula:
    """Quantifier prefix (outermost block first) over a negation-normal matrix."""

    prefix: tuple[tuple[str, tuple[str, ...]], ...]
    matrix: Formula

    def bound_variables(self) -> list[str]:
        return [v for _, block in self.prefix for v in block]

    def to_formula(self) -> Formula:
        f = self.matrix
        for q, block in reversed(self.prefix):
            f = Exists(block, f) if q == "ex" else Forall(block, f)
        return f


def _fresh(name: str, used: set[str]) -> str:
    k = 1
    while f"{name}{k}" in used:
        k += 1
    return f"{name}{k}"


def to_prenex(f: Formula) -> PrenexFormula:
    """Pull quantifiers outward left to right, renaming bound variables apart.

    Negations are pushed to the atoms on the way, flipping quantifiers they
    cross; consecutive blocks of the same quantifier are fused.
    """
    used = set(free_variables(f))
    avoid = set(all_variables(f))
    prefix: list[tuple[str, tuple[str, ...]]] = []

    def walk(g: Formula, positive: bool) -> Formula:
        if isinstance(g, ATOMS):
            return g if positive else Not(g)
        if isinstance(g, Not):
            return walk(g.child, not positive)
        if isinstance(g, (And, Or)):
            cls = type(g) if positive else (Or if isinstance(g, And) else And)
            return cls(tuple(walk(c, positive) for c in g.children))
        mapping = {}
        names = []
        for v in g.vars:
            if v in used:
                mapping[v] = _fresh(v, used | avoid)
                avoid.add(mapping[v])
            names.append(mapping.get(v, v))
        used.update(names)
        is_exists = isinstance(g, Exists) == positive
        prefix.append(("ex" if is_exists else "all", tuple(names)))
        return walk(rename(g.body, mapping), positive)

    matrix = walk(f, True)
    fused: list[tuple[str, tuple[str, ...]]] = []
    for q, block in prefix:
        if fused and fused[-1][0] == q:
            fused[-1] = (q, fused[-1][1] + block)
        else:
            fused.append((q, block))
    return PrenexFormula(tuple(fused), matrix)


def is_prenex(p: PrenexFormula) -> bool:
    """Structural check of the prenex invariants."""

    def literal_nnf(g: Formula) -> bool:
        if isinstance(g, ATOMS):
            return True
        if isinstance(g, Not):
            return isinstance(g.child, ATOMS)
        if isinstance(g, (And, Or)):
            return all(literal_nnf(c) for c in g.children)
        return False

    seen: set[str] = set()
    for _, block in p.prefix:
        if not block or seen & set(block) or len(set(block)) != len(block):
            return False
        seen.update(block)
    return literal_nnf(p.matrix)


def iter_atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, ATOMS):
        yield f
    elif isinstance(f, Not):
        yield from iter_atoms(f.child)
    elif isinstance(f, (And, Or)):
        for c in f.children:
            yield from iter_atoms(c)
    else:
        yield from iter_atoms(f.body)
