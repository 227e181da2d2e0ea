"""Ternary cubics attached to complete intersections in P^d1 x P^d2 x P^d3.

The cubic F is the coefficient of H1^d1 H2^d2 H3^d3 in

    (x1 H1 + x2 H2 + x3 H3)^3 * prod_j (a_j H1 + b_j H2 + c_j H3).

We never expand in the H's.  Instead the factors are folded one at a time into
a table indexed by H-tridegree, discarding any slot that already exceeds
(d1, d2, d3); the cubic part is attached at the end by reading the slot
complementary to each x-monomial.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from .polycore import Polynomial, VariableTable

log = logging.getLogger(__name__)

# customary ordering of the ten coefficients
CUBIC_MONOMIALS: Tuple[Tuple[int, int, int], ...] = (
    (3, 0, 0), (0, 3, 0), (0, 0, 3),
    (2, 1, 0), (2, 0, 1), (1, 2, 0), (0, 2, 1), (1, 0, 2), (0, 1, 2),
    (1, 1, 1),
)


def multinomial3(i: int, j: int, k: int) -> int:
    return math.factorial(i + j + k) // (math.factorial(i) * math.factorial(j) * math.factorial(k))


def coefficient_name(idx: Tuple[int, int, int]) -> str:
    return "a%d%d%d" % idx


class SpecError(ValueError):
    """Invalid degree data or factor list."""


@dataclass(frozen=True)
class DegreeSpec:
    d: Tuple[int, int, int]
    r: int

    def __post_init__(self):
        if len(self.d) != 3 or any(int(x) != x or x < 1 for x in self.d):
            raise SpecError(f"degrees must be three positive integers, got {self.d}")
        if self.r < 0:
            raise SpecError("r must be non-negative")
        if sum(self.d) != self.r + 3:
            raise SpecError(f"d1+d2+d3 = {sum(self.d)} but r+3 = {self.r + 3}")

    @classmethod
    def of(cls, d1: int, d2: int, d3: int) -> "DegreeSpec":
        return cls((d1, d2, d3), d1 + d2 + d3 - 3)

    @property
    def is_equal(self) -> bool:
        return self.d[0] == self.d[1] == self.d[2]

    def label(self) -> str:
        return ",".join(map(str, self.d))


@dataclass(frozen=True)
class FactorTriple:
    """One linear factor a H1 + b H2 + c H3.  ``values`` is None for a
    symbolic triple (variables a_j, b_j, c_j), else three integers >= 0."""

    values: Optional[Tuple[int, int, int]] = None
    padding_slot: Optional[int] = None  # 0,1,2 when added by pad_degrees

    def __post_init__(self):
        if self.values is not None:
            if len(self.values) != 3:
                raise SpecError("a numeric factor has three entries")
            for v in self.values:
                if not isinstance(v, int) or isinstance(v, bool):
                    raise SpecError(f"factor entries must be integers, got {v!r}")
                if v < 0:
                    raise SpecError(f"factor entries must be non-negative, got {v}")

    @property
    def symbolic(self) -> bool:
        return self.values is None


SYMBOLIC = FactorTriple()


@dataclass
class CubicForm:
    """A ternary cubic sum c_ijk x1^i x2^j x3^k.

    ``raw[(i,j,k)]`` is c_ijk; ``normalized`` divides by multinomial(3; i,j,k),
    giving the a_ijk of the classical notation.  Entries are Polynomials in the
    non-x variables of ``table`` (constants for numeric cubics).
    """

    table: VariableTable
    raw: Dict[Tuple[int, int, int], Polynomial]
    spec: Optional[DegreeSpec] = None
    factors: Tuple[FactorTriple, ...] = field(default_factory=tuple)

    @property
    def normalized(self) -> Dict[Tuple[int, int, int], Polynomial]:
        out = {}
        for idx, c in self.raw.items():
            m = multinomial3(*idx)
            try:
                out[idx] = c.exact_div(m)
            except ArithmeticError:
                out[idx] = c * Fraction(1, m)
        return out

    def polynomial(self) -> Polynomial:
        t = self.table
        F = Polynomial(t)
        for (i, j, k), c in self.raw.items():
            F = F + c * Polynomial.monomial(t, {"x1": i, "x2": j, "x3": k})
        return F

    @classmethod
    def from_polynomial(cls, F: Polynomial) -> "CubicForm":
        t = F.table
        xs = ("x1", "x2", "x3")
        if F.degrees(xs) - {3}:
            raise ValueError("not a homogeneous cubic in x1, x2, x3")
        raw = {idx: F.coefficient_of(dict(zip(xs, idx))) for idx in CUBIC_MONOMIALS}
        return cls(t, raw)

    @classmethod
    def from_coefficients(cls, table: VariableTable, coeffs) -> "CubicForm":
        """Build from normalized a_ijk (ints, Fractions or Polynomials)."""
        raw = {}
        for idx in CUBIC_MONOMIALS:
            a = coeffs.get(idx, 0)
            if not isinstance(a, Polynomial):
                a = Polynomial.constant(table, a)
            raw[idx] = a * multinomial3(*idx)
        return cls(table, raw)

    def numeric_coefficients(self) -> Dict[Tuple[int, int, int], Fraction]:
        """Normalized a_ijk as Fractions; fails for symbolic entries."""
        out = {}
        for idx, a in self.normalized.items():
            if set(a.raw_terms) - {0}:
                raise ValueError("cubic has symbolic coefficients")
            out[idx] = Fraction(a.constant_term())
        return out

    def is_numeric(self) -> bool:
        return all(not (set(c.raw_terms) - {0}) for c in self.raw.values())


def generic_cubic() -> CubicForm:
    """The cubic with ten independent symbols a300, ..., a111 as coefficients."""
    names = [coefficient_name(idx) for idx in CUBIC_MONOMIALS]
    table = VariableTable.standard(0, aux=names)
    coeffs = {idx: Polynomial.variable(table, coefficient_name(idx)) for idx in CUBIC_MONOMIALS}
    return CubicForm.from_coefficients(table, coeffs)


def hesse_cubic() -> CubicForm:
    """x1^3 + x2^3 + x3^3 + 6 lam x1 x2 x3 with lam symbolic."""
    table = VariableTable.standard(0, aux=["lam"])
    lam = Polynomial.variable(table, "lam")
    return CubicForm.from_coefficients(
        table, {(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1, (1, 1, 1): lam})


def _factor_polys(table: VariableTable, factors: Sequence[FactorTriple]):
    triples = table.factor_triples()
    out = []
    for j, fac in enumerate(factors):
        if fac.symbolic:
            out.append(tuple(Polynomial.variable(table, n) for n in triples[j]))
        else:
            out.append(tuple(Polynomial.constant(table, v) for v in fac.values))
    return out


def build_product_cubic(spec: DegreeSpec, factors: Optional[Sequence[FactorTriple]] = None,
                        table: Optional[VariableTable] = None) -> CubicForm:
    """Coefficient of H1^d1 H2^d2 H3^d3 in the formal product, by tridegree
    convolution.  ``factors`` defaults to r symbolic triples."""
    if factors is None:
        factors = [SYMBOLIC] * spec.r
    factors = tuple(factors)
    if len(factors) != spec.r:
        raise SpecError(f"expected {spec.r} factors, got {len(factors)}")
    if table is None:
        table = VariableTable.standard(spec.r)
    elif len(table.factor_triples()) < spec.r:
        raise SpecError("variable table has too few factor triples")
    d1, d2, d3 = spec.d
    one = Polynomial.constant(table, 1)
    slots: Dict[Tuple[int, int, int], Polynomial] = {(0, 0, 0): one}
    for lin in _factor_polys(table, factors):
        nxt: Dict[Tuple[int, int, int], Polynomial] = {}
        for (e1, e2, e3), poly in slots.items():
            for slot, coeff in enumerate(lin):
                if coeff.is_zero():
                    continue
                target = [e1, e2, e3]
                target[slot] += 1
                if target[slot] > spec.d[slot]:
                    continue
                target = tuple(target)
                term = poly * coeff
                prev = nxt.get(target)
                nxt[target] = term if prev is None else prev + term
        slots = nxt
    raw = {}
    for idx in CUBIC_MONOMIALS:
        i, j, k = idx
        poly = slots.get((d1 - i, d2 - j, d3 - k))
        raw[idx] = Polynomial(table) if poly is None else poly * multinomial3(i, j, k)
    return CubicForm(table, raw, spec=spec, factors=factors)


@dataclass(frozen=True)
class PaddedSpec:
    spec: DegreeSpec
    factors: Tuple[FactorTriple, ...]
    original: DegreeSpec

    @property
    def padding(self) -> Tuple[Tuple[int, int], ...]:
        """(factor index, H-slot) for each added triple."""
        return tuple((j, f.padding_slot) for j, f in enumerate(self.factors)
                     if f.padding_slot is not None)


def pad_degrees(spec: DegreeSpec, factors: Optional[Sequence[FactorTriple]] = None) -> PaddedSpec:
    """Equalize all d_i to d = max(d_i) by appending 3d - sum(d_i) symbolic
    triples, each tagged with the H-slot it is meant to feed."""
    if factors is None:
        factors = [SYMBOLIC] * spec.r
    d = max(spec.d)
    extra = []
    for slot in range(3):
        extra.extend(FactorTriple(padding_slot=slot) for _ in range(d - spec.d[slot]))
    new = DegreeSpec((d, d, d), spec.r + len(extra))
    return PaddedSpec(new, tuple(factors) + tuple(extra), spec)


def select_padded(poly: Polynomial, padded: PaddedSpec, power: int,
                  target: Optional[VariableTable] = None) -> Polynomial:
    """Keep the monomials of maximal degree ``power`` in the slot variable of
    every padding triple (and free of its two companions), then drop the
    padding variables.  Relabels onto ``target`` (defaults to the standard
    table of the original spec)."""
    table = poly.table
    triples = table.factor_triples()
    pattern = {}
    for j, slot in padded.padding:
        for s, name in enumerate(triples[j]):
            pattern[name] = power if s == slot else 0
    kept = poly.coefficient_of(pattern)
    if target is None:
        target = VariableTable.standard(padded.original.r)
    return kept.relabel(target)


def nondegeneracy_check(F: CubicForm, assignment=None) -> bool:
    """True iff the Hessian determinant is not identically zero (after
    substituting ``assignment`` for symbolic entries, when given)."""
    from .invariants import hessian_determinant

    if assignment:
        F = CubicForm(F.table, {k: v.substitute(assignment) for k, v in F.raw.items()},
                      spec=F.spec, factors=F.factors)
    ok = not hessian_determinant(F).is_zero()
    if not ok:
        log.warning("cubic is degenerate: Hessian determinant vanishes identically")
    return ok


# -- spec files -----------------------------------------------------------------

def parse_spec(data) -> Tuple[DegreeSpec, Tuple[FactorTriple, ...]]:
    """Validate a decoded spec document {"d": [...], "factors": [...]}."""
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    if "d" not in data:
        raise SpecError("spec is missing key 'd'")
    d = data["d"]
    if not isinstance(d, list) or len(d) != 3 or not all(isinstance(x, int) and not isinstance(x, bool) for x in d):
        raise SpecError("'d' must be a list of three integers")
    spec = DegreeSpec.of(*d) if all(x >= 1 for x in d) else DegreeSpec(tuple(d), sum(d) - 3)
    raw_factors = data.get("factors", ["symbolic"] * spec.r)
    if raw_factors == "symbolic":
        raw_factors = ["symbolic"] * spec.r
    if not isinstance(raw_factors, list):
        raise SpecError("'factors' must be a list")
    if len(raw_factors) != spec.r:
        raise SpecError(f"'factors' has {len(raw_factors)} entries, expected r = {spec.r}")
    factors = []
    for j, item in enumerate(raw_factors):
        if item == "symbolic":
            factors.append(SYMBOLIC)
            continue
        if not isinstance(item, list) or len(item) != 3:
            raise SpecError(f"factors[{j}] must be \"symbolic\" or a list of three integers")
        try:
            factors.append(FactorTriple(tuple(item)))
        except SpecError as exc:
            raise SpecError(f"factors[{j}]: {exc}") from None
    return spec, tuple(factors)


def load_spec(text: str) -> Tuple[DegreeSpec, Tuple[FactorTriple, ...]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_spec(data)


def spec_document(spec: DegreeSpec, factors: Sequence[FactorTriple]) -> dict:
    return {"d": list(spec.d),
            "factors": ["symbolic" if f.symbolic else list(f.values) for f in factors]}


def cubic_to_text(F: CubicForm) -> str:
    return F.polynomial().to_text()


def cubic_from_text(text: str) -> CubicForm:
    return CubicForm.from_polynomial(Polynomial.from_text(text))


def random_integer_cubic(rng, bound: int = 9, table: Optional[VariableTable] = None) -> CubicForm:
    """Cubic whose raw x-monomial coefficients are uniform in [-bound, bound]."""
    table = table or VariableTable.standard(0)
    raw = {idx: Polynomial.constant(table, rng.randint(-bound, bound)) for idx in CUBIC_MONOMIALS}
    return CubicForm(table, raw)
