import json
import random

import pytest
import sympy

from cubicinv.cubicgen import (CUBIC_MONOMIALS, DegreeSpec, FactorTriple, SpecError,
                               build_product_cubic, coefficient_name, cubic_from_text,
                               cubic_to_text, load_spec, multinomial3, nondegeneracy_check,
                               pad_degrees, random_integer_cubic, select_padded, spec_document)
from cubicinv.invariants import CubicInvariants
from cubicinv.polycore import Polynomial, VariableTable, parse_polynomial


def sympy_product_cubic(d, factors):
    """Brute force: expand the whole product in H and read off H^d."""
    H = sympy.symbols("H1 H2 H3")
    x = sympy.symbols("x1 x2 x3")
    P = (x[0] * H[0] + x[1] * H[1] + x[2] * H[2]) ** 3
    for a, b, c in factors:
        P *= a * H[0] + b * H[1] + c * H[2]
    P = sympy.Poly(sympy.expand(P), *H)
    return sympy.expand(P.coeff_monomial(H[0] ** d[0] * H[1] ** d[1] * H[2] ** d[2]))


def to_sympy(poly: Polynomial):
    syms = sympy.symbols(poly.table.names)
    return sympy.expand(sum(sympy.Rational(c) * sympy.Mul(*[s ** e for s, e in zip(syms, exps)])
                            for exps, c in poly.terms()))


def test_spec_invariant():
    assert DegreeSpec.of(3, 3, 3).r == 6
    with pytest.raises(SpecError):
        DegreeSpec((2, 2, 2), 4)
    with pytest.raises(SpecError):
        DegreeSpec.of(0, 2, 2)


def test_flat_case():
    F = build_product_cubic(DegreeSpec.of(1, 1, 1))
    t = F.table
    assert F.polynomial() == parse_polynomial("6*x1*x2*x3", t)


def test_single_symbolic_factor():
    F = build_product_cubic(DegreeSpec.of(2, 1, 1))
    t = F.table
    assert F.polynomial() == parse_polynomial("6*a1*x1*x2*x3 + 3*b1*x1^2*x3 + 3*c1*x1^2*x2", t)


def test_all_ones_matches_brute_force():
    spec = DegreeSpec.of(3, 3, 3)
    F = build_product_cubic(spec, [FactorTriple((1, 1, 1))] * 6)
    assert to_sympy(F.polynomial()) == sympy_product_cubic(spec.d, [(1, 1, 1)] * 6)


def test_symbolic_matches_brute_force():
    spec = DegreeSpec.of(3, 2, 1)
    F = build_product_cubic(spec)
    syms = [sympy.symbols(f"a{j} b{j} c{j}") for j in range(1, spec.r + 1)]
    assert to_sympy(F.polynomial()) == sympy_product_cubic(spec.d, syms)


def test_numeric_and_symbolic_paths_agree(rng):
    spec = DegreeSpec.of(2, 2, 2)
    values = [tuple(rng.randint(0, 5) for _ in range(3)) for _ in range(spec.r)]
    numeric = build_product_cubic(spec, [FactorTriple(v) for v in values])
    symbolic = build_product_cubic(spec)
    assignment = {}
    for (a, b, c), v in zip(symbolic.table.factor_triples(), values):
        assignment.update({a: v[0], b: v[1], c: v[2]})
    sub = symbolic.polynomial().substitute(assignment).relabel(numeric.table)
    assert sub == numeric.polynomial()


@pytest.mark.parametrize("d", [(2, 1, 1), (2, 2, 2), (3, 2, 1), (3, 3, 3)])
def test_divisibility_and_tridegrees(d):
    spec = DegreeSpec.of(*d)
    F = build_product_cubic(spec)
    triples = F.table.factor_triples()
    rows = [[tr[p] for tr in triples] for p in range(3)]
    for idx in CUBIC_MONOMIALS:
        c = F.raw[idx]
        if c.is_zero():
            assert any(d[p] < idx[p] for p in range(3))
            continue
        a = c.exact_div(multinomial3(*idx))
        for exps, _ in a.terms():
            assert max(exps) <= 1
            assert sum(exps) == spec.r
        for p in range(3):
            assert a.degrees(rows[p]) == {d[p] - idx[p]}


def test_slot_permutation_equivariance():
    spec = DegreeSpec.of(3, 2, 1)
    F = build_product_cubic(spec)
    G = build_product_cubic(DegreeSpec.of(1, 2, 3))
    # swap H1 <-> H3 together with x1 <-> x3 and a_j <-> c_j
    ren = {"x1": "x3", "x3": "x1"}
    for a, b, c in F.table.factor_triples():
        ren.update({a: c, c: a})
    terms = {}
    for exps, coeff in F.polynomial().terms():
        named = {ren.get(n, n): e for n, e in zip(F.table.names, exps) if e}
        terms[G.table.pack(named)] = coeff
    assert Polynomial(G.table, terms) == G.polynomial()


def test_wrong_factor_count_and_negative_entries():
    with pytest.raises(SpecError):
        build_product_cubic(DegreeSpec.of(2, 2, 2), [FactorTriple()] * 2)
    with pytest.raises(SpecError):
        FactorTriple((1, -1, 0))


def test_padding_counts():
    assert pad_degrees(DegreeSpec.of(1, 1, 1)).padding == ()
    padded = pad_degrees(DegreeSpec.of(3, 2, 2))
    assert padded.spec.d == (3, 3, 3)
    assert [slot for _, slot in padded.padding] == [1, 2]


def test_padded_then_filtered_s_matches_unpadded():
    spec = DegreeSpec.of(2, 1, 1)
    padded = pad_degrees(spec)
    S_pad = CubicInvariants(build_product_cubic(padded.spec, padded.factors)).S
    S = CubicInvariants(build_product_cubic(spec)).S
    assert select_padded(S_pad, padded, 4) == S


def test_nondegeneracy():
    t = VariableTable.standard(0)
    from cubicinv.cubicgen import CubicForm
    assert nondegeneracy_check(build_product_cubic(DegreeSpec.of(1, 1, 1)))
    assert not nondegeneracy_check(CubicForm.from_polynomial(parse_polynomial("x1^3", t)))
    assert nondegeneracy_check(CubicForm.from_polynomial(parse_polynomial("x1^3+x2^3+x3^3", t)))


def test_spec_files():
    spec, factors = load_spec('{"d": [2, 2, 2], "factors": [[1, 0, 2], "symbolic", [0, 0, 1]]}')
    assert spec.r == 3 and factors[1].symbolic and factors[0].values == (1, 0, 2)
    assert load_spec(json.dumps(spec_document(spec, factors))) == (spec, factors)
    with pytest.raises(SpecError, match="line 1"):
        load_spec('{"d": [1, 1, 1]')
    with pytest.raises(SpecError):
        load_spec('{"d": [2, 2, 2], "factors": [[1, 1, 1]]}')
    with pytest.raises(SpecError):
        load_spec('{"factors": []}')


def test_cubic_text_round_trip():
    F = build_product_cubic(DegreeSpec.of(2, 2, 1))
    G = cubic_from_text(cubic_to_text(F))
    assert G.polynomial() == F.polynomial()


def test_random_cubic_range():
    F = random_integer_cubic(random.Random(1), 9)
    assert F.is_numeric()
    assert all(-9 <= c.constant_term() <= 9 for c in F.raw.values())
    assert coefficient_name((1, 1, 1)) == "a111"
