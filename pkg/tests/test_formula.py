import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ws1s_nested.automata import decide_classical
from ws1s_nested.bench import default_atom_pool, generate_family, matrices
from ws1s_nested.formula import (
    And,
    Exists,
    Forall,
    FormulaSyntaxError,
    Not,
    Or,
    PrenexFormula,
    Sing,
    Sub,
    Succ,
    Zeroth,
    close,
    desugar,
    free_variables,
    is_prenex,
    parse_formula,
    pretty,
    to_prenex,
)


def test_parse_single_quantifier():
    assert parse_formula("ex2 X: sing X") == Exists(("X",), Sing("X"))


def test_parse_nested_negated_quantifiers():
    f = parse_formula("~ex2 X1: ~ex2 Y: X1 sub Y & sing Y")
    inner = Exists(("Y",), And((Sub("X1", "Y"), Sing("Y"))))
    assert f == Not(Exists(("X1",), Not(inner)))


def test_parse_all_atoms_and_precedence():
    f = parse_formula("X = {0} | ~Y = X + 1 & sing Z")
    assert f == Or((Zeroth("X"), And((Not(Succ("Y", "X")), Sing("Z")))))


def test_parse_comments_and_whitespace():
    text = "# header\nall2 X,\n  Y:  # trailing\n X sub Y"
    assert parse_formula(text) == Forall(("X", "Y"), Sub("X", "Y"))


@pytest.mark.parametrize(
    "text, line, column",
    [("X sub", 1, 6), ("ex2 : sing X", 1, 5), ("sing X &\n& sing Y", 2, 1), ("sing x", 1, 6)],
)
def test_syntax_error_position(text, line, column):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_duplicate_block_rejected():
    with pytest.raises(ValueError):
        Exists(("X", "X"), Sing("X"))
    with pytest.raises(ValueError):
        Exists((), Sing("X"))


def test_chain_text_parses_to_expected_prefix():
    f = parse_formula(generate_family("chain", 2, 1))
    assert isinstance(f, Exists) and f.vars == ("Y",)
    assert isinstance(f.body, Not) and f.body.child.vars == ("X1", "X2")
    assert parse_formula(pretty(f)) == f
    p = to_prenex(f)
    assert p.prefix == (("ex", ("Y",)), ("all", ("X1", "X2")))


def test_desugar():
    assert desugar(Forall(("X",), Sing("X"))) == Not(Exists(("X",), Not(Sing("X"))))
    phi = Sub("X", "Y")
    assert desugar(Forall(("X", "Y"), phi)) == Not(Exists(("X", "Y"), Not(phi)))
    g = And((Sing("X"), Exists(("Y",), phi)))
    assert desugar(g) == g


def test_free_variables_order():
    assert free_variables(Sub("X", "Y")) == ["X", "Y"]
    assert free_variables(Exists(("X",), Sub("X", "Y"))) == ["Y"]
    assert free_variables(parse_formula(generate_family("chain", 3, 2))) == []


def test_close():
    assert close(Sing("X"), "satisfiability") == Exists(("X",), Sing("X"))
    assert close(Sing("X"), "validity") == Not(Exists(("X",), Not(Sing("X"))))
    ground = Exists(("X",), Sing("X"))
    assert close(ground, "validity") == ground
    with pytest.raises(ValueError):
        close(ground, "proof")


def test_prenex_of_prenex_formula():
    p = to_prenex(Not(Exists(("X",), Not(Sing("X")))))
    assert p.prefix == (("all", ("X",)),)
    assert p.matrix == Sing("X")


def test_prenex_without_capture():
    p = to_prenex(And((Exists(("X",), Sub("X", "Y")), Sing("Y"))))
    assert p.prefix == (("ex", ("X",)),)
    assert p.matrix == And((Sub("X", "Y"), Sing("Y")))


def test_prenex_renames_clashing_binder():
    f = And((Exists(("X",), Sub("X", "Y")), Exists(("X",), Sing("X"))))
    p = to_prenex(f)
    assert p.prefix == (("ex", ("X", "X1")),)
    assert p.matrix == And((Sub("X", "Y"), Sing("X1")))
    assert is_prenex(p)
    closed = close(f, "validity")
    assert decide_classical(desugar(closed)).valid == decide_classical(to_prenex(desugar(closed))).valid


def test_prenex_fresh_name_avoids_inner_binders():
    # the fresh name for the second X must not collide with the X1 bound inside
    f = And((Exists(("X",), Sing("X")), Exists(("X",), Exists(("X1",), Sub("X", "X1")))))
    p = to_prenex(f)
    names = p.bound_variables()
    assert len(names) == len(set(names)) == 3
    assert is_prenex(p)


def test_prenex_formula_round_trip():
    p = PrenexFormula((("ex", ("X",)), ("all", ("Y",))), Sub("X", "Y"))
    assert to_prenex(p.to_formula()) == p


MATRICES = matrices(default_atom_pool(), 2)

_names = st.sampled_from(["X", "Y", "Z"])


@st.composite
def formulas(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from(MATRICES))
    kind = draw(st.sampled_from(["not", "and", "or", "ex", "all"]))
    if kind == "not":
        return Not(draw(formulas(depth - 1)))
    if kind in ("and", "or"):
        cls = And if kind == "and" else Or
        return cls((draw(formulas(depth - 1)), draw(formulas(depth - 1))))
    block = tuple(sorted(draw(st.sets(_names, min_size=1, max_size=2))))
    cls = Exists if kind == "ex" else Forall
    return cls(block, draw(formulas(depth - 1)))


@settings(max_examples=150, deadline=None)
@given(formulas())
def test_pretty_round_trip(f):
    assert parse_formula(pretty(f)) == f


@settings(max_examples=80, deadline=None)
@given(formulas(), st.sampled_from(["validity", "satisfiability"]))
def test_front_end_preserves_classical_verdict(f, task):
    closed = close(f, task)
    assert not free_variables(closed)
    reference = decide_classical(closed).valid
    plain = desugar(closed)
    assert "Forall" not in repr(plain)
    assert decide_classical(plain).valid == reference
    p = to_prenex(plain)
    assert is_prenex(p)
    assert decide_classical(p).valid == reference
