from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from cubicinv.polycore import (Polynomial, VariableTable, VariableTableMismatch, key_degree,
                               parse_polynomial)

TABLE = VariableTable.standard(1, aux=("t",))
NAMES = TABLE.names


@st.composite
def polys(draw, max_terms=6, max_exp=3):
    n = draw(st.integers(0, max_terms))
    terms = []
    for _ in range(n):
        exps = {name: draw(st.integers(0, max_exp)) for name in NAMES}
        terms.append((exps, draw(st.integers(-20, 20))))
    return Polynomial.from_terms(TABLE, terms)


def to_sympy(p: Polynomial):
    syms = sympy.symbols(NAMES)
    expr = 0
    for exps, c in p.terms():
        term = sympy.Rational(c)
        for s, e in zip(syms, exps):
            term *= s ** e
        expr += term
    return sympy.expand(expr)


# -- tables ---------------------------------------------------------------------

def test_standard_table_layout():
    t = VariableTable.standard(2, aux=("lam",))
    assert t.names == ("x1", "x2", "x3", "a1", "b1", "c1", "a2", "b2", "c2", "lam")
    assert t.factor_triples() == (("a1", "b1", "c1"), ("a2", "b2", "c2"))
    assert VariableTable.from_header(t.header()) == t


@pytest.mark.parametrize("names,roles", [
    (("x1", "x2"), ("x", "x")),
    (("x1", "x2", "x3", "a1"), ("x", "x", "x", "factor")),
    (("x1", "x2", "x3", "t", "a1", "b1", "c1"), ("x", "x", "x", "aux", "factor", "factor", "factor")),
    (("x1", "x1", "x3"), ("x", "x", "x")),
])
def test_invalid_tables_rejected(names, roles):
    with pytest.raises(ValueError):
        VariableTable(names, roles)


def test_mixing_tables_is_an_error():
    other = VariableTable.standard(0)
    with pytest.raises(VariableTableMismatch):
        Polynomial.variable(TABLE, "x1") + Polynomial.variable(other, "x1")


# -- arithmetic -------------------------------------------------------------------

@given(polys(), polys())
def test_mul_matches_sympy(p, q):
    assert to_sympy(p * q) == sympy.expand(to_sympy(p) * to_sympy(q))


@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == Polynomial(TABLE)


@given(polys(), polys())
def test_leibniz_rule(p, q):
    for name in ("x1", "a1"):
        lhs = (p * q).partial_derivative(name)
        rhs = p.partial_derivative(name) * q + p * q.partial_derivative(name)
        assert lhs == rhs


@given(polys())
def test_text_round_trip(p):
    assert Polynomial.from_text(p.to_text()) == p
    assert Polynomial.from_text(p.to_text()).to_text() == p.to_text()


@given(polys(), st.integers(-3, 3), st.integers(-3, 3))
def test_evaluate_is_a_ring_map(p, u, v):
    q = p * p + p
    point = {n: Fraction(u + i, 1 + abs(v)) for i, n in enumerate(NAMES)}
    val = p.evaluate(point)
    assert q.evaluate(point) == val * val + val


def test_power_and_degree():
    x1 = Polynomial.variable(TABLE, "x1")
    t = Polynomial.variable(TABLE, "t")
    p = (x1 + t) ** 4
    assert len(p) == 5
    assert p.degree() == 4
    assert p.coefficient({"x1": 2, "t": 2}) == 6
    assert key_degree(TABLE.pack({"x1": 3, "t": 2})) == 5


def test_overflow_guard():
    x1 = Polynomial.variable(TABLE, "x1")
    big = x1 ** (2 ** 14)
    bigger = big * big  # exponent 2**15 still fits its field
    assert bigger.max_exponent("x1") == 2 ** 15
    with pytest.raises(OverflowError):
        bigger * x1
    with pytest.raises(OverflowError):
        TABLE.pack({"x1": 2 ** 15})


def test_exact_division():
    p = Polynomial.from_terms(TABLE, [({"x1": 1}, 6), ({"t": 2}, 12)])
    assert p.exact_div(6) == Polynomial.from_terms(TABLE, [({"x1": 1}, 1), ({"t": 2}, 2)])
    with pytest.raises(ArithmeticError):
        p.exact_div(5)


def test_coefficient_of_partial_monomial():
    p = parse_polynomial("3*x1^2*a1 + 5*x1^2*b1*t - x1*a1", TABLE)
    assert p.coefficient_of({"x1": 2}) == parse_polynomial("3*a1 + 5*b1*t", TABLE)


def test_substitute_and_missing_assignment():
    p = parse_polynomial("x1*t^2 + 1/2*t", TABLE)
    assert p.substitute({"t": 2}) == parse_polynomial("4*x1 + 1", TABLE)
    with pytest.raises(KeyError):
        p.evaluate({"t": 1})


def test_parser_accepts_caret_and_rationals():
    p = parse_polynomial("(x1 - x2)^2 / 2", TABLE)
    assert p.coefficient({"x1": 1, "x2": 1}) == -1
    assert p.coefficient({"x1": 2}) == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_polynomial("x1 / x2", TABLE)


def test_terms_graded_lex_order():
    p = parse_polynomial("x2 + x1^2 + 1 + x1*x2", TABLE)
    degs = [sum(e) for e, _ in p.terms()]
    assert degs == sorted(degs, reverse=True)
    assert [e for e, _ in p.terms()][0][:3] == (2, 0, 0)
