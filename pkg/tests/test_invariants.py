import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from cubicinv.cubicgen import (CUBIC_MONOMIALS, CubicForm, DegreeSpec, build_product_cubic,
                               generic_cubic, hesse_cubic, random_integer_cubic)
from cubicinv.invariants import (CubicInvariants, DivisibilityError, S_NORMALIZATION,
                                 generic_s_polynomial, numeric_hessian, s_from_coefficients,
                                 verify_adjoint_identity, verify_adjugate, verify_all_identities,
                                 verify_lemma_1_1, verify_SF_identity)
from cubicinv.polycore import Polynomial, VariableTable, parse_polynomial

T0 = VariableTable.standard(0)


def cubic(expr: str, aux=()) -> CubicForm:
    t = VariableTable.standard(0, aux=aux)
    return CubicForm.from_polynomial(parse_polynomial(expr, t))


def to_sympy(poly: Polynomial):
    syms = sympy.symbols(poly.table.names)
    return sympy.expand(sum(sympy.Rational(c) * sympy.Mul(*[s ** e for s, e in zip(syms, exps)])
                            for exps, c in poly.terms()))


def compose(F: CubicForm, g) -> CubicForm:
    """F(g x) for an integer 3x3 matrix g."""
    t = F.table
    xs = [Polynomial.variable(t, n) for n in ("x1", "x2", "x3")]
    lin = [sum((xs[j] * g[i][j] for j in range(3)), Polynomial(t)) for i in range(3)]
    out = Polynomial(t)
    for (i, j, k), c in F.raw.items():
        out = out + c * lin[0] ** i * lin[1] ** j * lin[2] ** k
    return CubicForm.from_polynomial(out)


def det3(g):
    return sympy.Matrix(g).det()


# -- known values -------------------------------------------------------------------

def test_hesse_family():
    inv = CubicInvariants(hesse_cubic())
    assert inv.S == parse_polynomial("lam^4 - lam", inv.table)


def test_flat_cubic():
    inv = CubicInvariants(cubic("6*x1*x2*x3"))
    assert inv.S == Polynomial.constant(T0, 1)
    assert inv.H == parse_polynomial("432*x1*x2*x3", T0)


def test_fermat_cubic():
    inv = CubicInvariants(cubic("x1^3 + x2^3 + x3^3"))
    assert inv.H == parse_polynomial("216*x1*x2*x3", T0)
    assert inv.S.is_zero()


def test_degenerate_cubic():
    inv = CubicInvariants(cubic("x1^3"))
    assert inv.S.is_zero() and inv.H.is_zero()


def test_s_vanishes_for_split_cubics():
    # a x1^3 + g(x2, x3)
    inv = CubicInvariants(cubic("2*x1^3 + x2^3 - 3*x2^2*x3 + 5*x3^3"))
    assert inv.S.is_zero()


def test_generic_s_shape():
    S = generic_s_polynomial()
    assert len(S) == 25
    t = S.table
    assert S.coefficient({"a111": 4}) == 1
    assert S.coefficient({"a300": 1, "a030": 1, "a003": 1, "a111": 1}) == -1
    # homogeneous of degree 4 in the coefficients
    assert S.degrees(t.names) == {4}


# -- independent oracles ---------------------------------------------------------------

def test_hessian_and_cofactors_match_sympy():
    F = generic_cubic()
    inv = CubicInvariants(F)
    x = sympy.symbols("x1 x2 x3")
    f = to_sympy(inv.F)
    M = sympy.hessian(f, x)
    adj = M.adjugate()
    assert sympy.expand(M.det() - to_sympy(inv.H)) == 0
    for p in range(3):
        for q in range(3):
            assert sympy.expand(adj[p, q] - to_sympy(inv.B[p, q])) == 0


@st.composite
def unimodular_ish(draw):
    g = [[draw(st.integers(-2, 2)) for _ in range(3)] for _ in range(3)]
    return g


@given(unimodular_ish(), st.integers(0, 10 ** 6))
def test_s_is_an_invariant_of_weight_four(g, seed):
    F = random_integer_cubic(random.Random(seed), 5)
    G = compose(F, g)
    assert CubicInvariants(G).S == CubicInvariants(F).S * int(det3(g)) ** 4


@given(unimodular_ish(), st.integers(0, 10 ** 6))
def test_hessian_is_a_covariant(g, seed):
    F = random_integer_cubic(random.Random(seed), 5)
    HF = CubicInvariants(F).H
    lhs = CubicInvariants(compose(F, g)).H
    rhs = compose(CubicForm.from_polynomial(HF), g).polynomial() * int(det3(g)) ** 2
    assert lhs == rhs


def test_golden_files(golden_dir):
    for tag, F in [("generic", generic_cubic()), ("spec211", build_product_cubic(DegreeSpec.of(2, 1, 1)))]:
        inv = CubicInvariants(F)
        items = {"F": inv.F, "S": inv.S, "H": inv.H}
        for p in range(3):
            for q in range(p, 3):
                items[f"B{p + 1}{q + 1}"] = inv.B[p, q]
        for name, poly in items.items():
            text = (golden_dir / f"{tag}_{name}.txt").read_text()
            assert poly.to_text() == text, f"{tag}_{name}"
            assert Polynomial.from_text(text) == poly


def test_golden_generic_h_matches_sympy(golden_dir):
    H = Polynomial.from_text((golden_dir / "generic_H.txt").read_text())
    F = Polynomial.from_text((golden_dir / "generic_F.txt").read_text())
    x = sympy.symbols("x1 x2 x3")
    assert sympy.expand(sympy.hessian(to_sympy(F), x).det() - to_sympy(H)) == 0


# -- identities ------------------------------------------------------------------------

def test_identities_on_hesse_and_products():
    for F in (hesse_cubic(), build_product_cubic(DegreeSpec.of(2, 1, 1)),
              build_product_cubic(DegreeSpec.of(2, 2, 1))):
        assert all(verify_all_identities(F).values())


@given(st.integers(0, 10 ** 9))
def test_identities_random(seed):
    F = random_integer_cubic(random.Random(seed), 9)
    inv = CubicInvariants(F)
    assert verify_adjugate(inv) and verify_adjoint_identity(inv) and verify_SF_identity(inv)
    assert all(verify_lemma_1_1(inv, i, j) for i in range(3) for j in range(3))


def test_identity_detects_corruption():
    inv = CubicInvariants(hesse_cubic())
    inv._cache["S"] = inv.S + Polynomial.constant(inv.table, 1)
    assert not verify_lemma_1_1(inv, 0, 0)
    assert not verify_SF_identity(inv)


def test_divisibility_error_for_integral_coefficients():
    inv = CubicInvariants(build_product_cubic(DegreeSpec.of(1, 1, 1)))
    # corrupt one cofactor second derivative so the sum is no longer divisible
    inv._cache[("d2B", 0, 0, 2, 2)] = inv.d2B(0, 0, 2, 2) + Polynomial.constant(inv.table, 1)
    inv._cache[("d2B", 2, 2, 0, 0)] = Polynomial.constant(inv.table, 1)
    with pytest.raises(DivisibilityError):
        inv.S


def test_rational_s_for_raw_integer_coefficients():
    F = cubic("x1^2*x2 + x3^3")
    S = CubicInvariants(F).S
    coeffs = {idx: F.normalized[idx].constant_term() for idx in CUBIC_MONOMIALS}
    assert S.constant_term() == s_from_coefficients(coeffs)


@given(st.lists(st.integers(-9, 9), min_size=10, max_size=10))
def test_generic_evaluation_matches_direct(vals):
    coeffs = {idx: Fraction(v, 1 + (abs(v) % 3)) for idx, v in zip(CUBIC_MONOMIALS, vals)}
    F = CubicForm.from_coefficients(T0, coeffs)
    assert CubicInvariants(F).S.constant_term() == s_from_coefficients(coeffs)


def test_numeric_hessian_matches_symbolic():
    F = hesse_cubic()
    inv = CubicInvariants(F)
    coeffs = {idx: Fraction(0) for idx in CUBIC_MONOMIALS}
    coeffs.update({(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1, (1, 1, 1): Fraction(2)})
    x = (Fraction(1), Fraction(-2), Fraction(3, 2))
    f, third = numeric_hessian(coeffs, x)
    point = {"x1": x[0], "x2": x[1], "x3": x[2], "lam": 2}
    for p in range(3):
        for q in range(3):
            assert f[p][q] == inv.hessian[p, q].evaluate(point)
    assert S_NORMALIZATION == 4 * 6 ** 4
