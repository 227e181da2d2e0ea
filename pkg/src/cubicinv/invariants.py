"""Hessian, cofactors, Hessian determinant and the Aronhold S-invariant.

S is obtained from the cofactor identity

    1/4 * sum_{p,q} d^2 B_pq/dx3^2 * d^2 B_33/dx_p dx_q = 6^4 S,

with the division checked to be exact.  The remaining functions verify the
exact polynomial identities tying S, H, F and the cofactors together.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Sequence, Tuple

from .cubicgen import CUBIC_MONOMIALS, CubicForm
from .polycore import Polynomial, _demote

XS = ("x1", "x2", "x3")
S_NORMALIZATION = 4 * 6 ** 4


class DivisibilityError(ArithmeticError):
    """A quotient that must be exact was not; signals a normalization bug."""


Matrix3 = Tuple[Tuple[object, object, object], ...]


def det3(m) -> object:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def adjugate3(m) -> Matrix3:
    """Transpose of the cofactor matrix; works over any commutative ring."""
    def minor(i, j):
        rows = [r for r in range(3) if r != i]
        cols = [c for c in range(3) if c != j]
        (a, b), (c, d) = [[m[r][s] for s in cols] for r in rows]
        return a * d - b * c

    return tuple(tuple((-1) ** (i + j) * minor(j, i) for j in range(3)) for i in range(3))


def matmul3(a, b) -> Matrix3:
    return tuple(tuple(a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j]
                       for j in range(3)) for i in range(3))


class HessianMatrix:
    """Second partials f_pq (linear in x) and the constant third partials."""

    def __init__(self, F: CubicForm):
        self.cubic = F
        poly = F.polynomial()
        self.f = poly
        first = [poly.partial_derivative(x) for x in XS]
        self.entries = tuple(tuple(first[p].partial_derivative(XS[q]) for q in range(3))
                             for p in range(3))
        self.third = tuple(tuple(tuple(self.entries[p][q].partial_derivative(XS[r])
                                       for r in range(3)) for q in range(3)) for p in range(3))

    def __getitem__(self, pq):
        p, q = pq
        return self.entries[p][q]


def hessian(F: CubicForm) -> HessianMatrix:
    return HessianMatrix(F)


class CofactorMatrix:
    """B_pq, the entries of the adjugate of (f_pq); B is symmetric."""

    def __init__(self, hm: HessianMatrix):
        self.hessian = hm
        f = hm.entries
        self.entries = adjugate3(f)

    def __getitem__(self, pq):
        p, q = pq
        return self.entries[p][q]


def cofactors(hm: HessianMatrix) -> CofactorMatrix:
    return CofactorMatrix(hm)


class CubicInvariants:
    """Lazily computed Hessian data of one cubic, shared by the verifiers."""

    def __init__(self, F: CubicForm):
        self.cubic = F
        self.table = F.table
        self._cache: Dict[str, object] = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def hessian(self) -> HessianMatrix:
        return self._get("hessian", lambda: HessianMatrix(self.cubic))

    @property
    def B(self) -> CofactorMatrix:
        return self._get("B", lambda: CofactorMatrix(self.hessian))

    @property
    def F(self) -> Polynomial:
        return self.hessian.f

    @property
    def H(self) -> Polynomial:
        def compute():
            f, B = self.hessian.entries, self.B.entries
            return f[0][0] * B[0][0] + f[0][1] * B[1][0] + f[0][2] * B[2][0]
        return self._get("H", compute)

    def d2B(self, p: int, q: int, i: int, j: int) -> Polynomial:
        """d^2 B_pq / dx_i dx_j (a constant in x)."""
        return self._get(("d2B", p, q, i, j), lambda: self.B[p, q]
                         .partial_derivative(XS[i]).partial_derivative(XS[j]))

    @property
    def S(self) -> Polynomial:
        return self._get("S", self._compute_s)

    def _compute_s(self) -> Polynomial:
        total = Polynomial(self.table)
        for p in range(3):
            for q in range(p, 3):
                term = self.d2B(p, q, 2, 2) * self.d2B(2, 2, p, q)
                total = total + (term if p == q else term * 2)
        try:
            return total.exact_div(S_NORMALIZATION)
        except ArithmeticError as exc:
            # with integral a_ijk the quotient must be exact; otherwise S is
            # merely rational
            if self._integral_normalized():
                raise DivisibilityError(f"cofactor sum not divisible by 4*6^4: {exc}") from None
        return Polynomial(self.table, {k: _demote(Fraction(v, S_NORMALIZATION))
                                       for k, v in total.raw_terms.items()})

    def _integral_normalized(self) -> bool:
        return all(isinstance(c, int) for a in self.cubic.normalized.values()
                   for c in a.raw_terms.values())


def hessian_determinant(F: CubicForm) -> Polynomial:
    return CubicInvariants(F).H


def s_invariant(F: CubicForm) -> Polynomial:
    return CubicInvariants(F).S


def _inv(F) -> CubicInvariants:
    return F if isinstance(F, CubicInvariants) else CubicInvariants(F)


def _x(table, i):
    return Polynomial.variable(table, XS[i])


def verify_lemma_1_1(F, i: int, j: int) -> bool:
    """1/2 sum_{p,q} B_pq d^2 B_ij/dx_p dx_q == 6^4 S x_i x_j (indices 0-based)."""
    inv = _inv(F)
    lhs = Polynomial(inv.table)
    for p in range(3):
        for q in range(3):
            lhs = lhs + inv.B[p, q] * inv.d2B(i, j, p, q)
    rhs = inv.S * (2 * 6 ** 4) * _x(inv.table, i) * _x(inv.table, j)
    return lhs == rhs


def verify_remark_1_2(F, i: int, j: int) -> bool:
    """1/2 sum_{p,q} d^2 B_pq/dx_i dx_j * d^2 B_ij/dx_p dx_q == 6^4 (1+delta_ij) S."""
    inv = _inv(F)
    lhs = Polynomial(inv.table)
    for p in range(3):
        for q in range(3):
            lhs = lhs + inv.d2B(p, q, i, j) * inv.d2B(i, j, p, q)
    rhs = inv.S * (2 * 6 ** 4 * (2 if i == j else 1))
    return lhs == rhs


def verify_adjoint_identity(F) -> bool:
    """Adj(B) == H * (f_pq) entrywise; e.g. f_12 H = -B_33 B_12 + B_23 B_13."""
    inv = _inv(F)
    adj = adjugate3(inv.B.entries)
    f = inv.hessian.entries
    return all(adj[p][q] == inv.H * f[p][q] for p in range(3) for q in range(3))


def verify_adjugate(F) -> bool:
    """(f_pq) . B == H * I."""
    inv = _inv(F)
    prod = matmul3(inv.hessian.entries, inv.B.entries)
    zero = Polynomial(inv.table)
    return all(prod[p][q] == (inv.H if p == q else zero) for p in range(3) for q in range(3))


def verify_SF_identity(F) -> bool:
    """1/2 sum_{i,j} B_ij d^2 H/dx_i dx_j == 6^5 S F."""
    inv = _inv(F)
    H = inv.H
    lhs = Polynomial(inv.table)
    for i in range(3):
        Hi = H.partial_derivative(XS[i])
        for j in range(3):
            lhs = lhs + inv.B[i, j] * Hi.partial_derivative(XS[j])
    return lhs == inv.S * inv.F * (2 * 6 ** 5)


def verify_all_identities(F) -> Dict[str, bool]:
    inv = _inv(F)
    out = {}
    out["lemma_1_1"] = all(verify_lemma_1_1(inv, i, j) for i in range(3) for j in range(3))
    out["remark_1_2"] = all(verify_remark_1_2(inv, i, j) for i in range(3) for j in range(3))
    out["adjugate"] = verify_adjugate(inv)
    out["adjoint_identity"] = verify_adjoint_identity(inv)
    out["SF_identity"] = verify_SF_identity(inv)
    return out


# -- numeric fast path ----------------------------------------------------------

def numeric_hessian(coeffs: Dict[Tuple[int, int, int], Fraction], x: Sequence[Fraction]):
    """(f_pq(x)) and the constant f_pqr of a cubic given by normalized a_ijk.

    Uses f_pq = 6 sum_m a_{e_p+e_q+e_m} x_m, so no polynomial arithmetic is
    involved.
    """
    third = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    for p in range(3):
        for q in range(3):
            for r in range(3):
                idx = [0, 0, 0]
                idx[p] += 1
                idx[q] += 1
                idx[r] += 1
                third[p][q][r] = 6 * coeffs.get(tuple(idx), 0)
    f = tuple(tuple(sum(third[p][q][m] * x[m] for m in range(3)) for q in range(3))
              for p in range(3))
    return f, third


def numeric_value(coeffs, x) -> Fraction:
    from .cubicgen import multinomial3
    total = Fraction(0)
    for (i, j, k) in CUBIC_MONOMIALS:
        total += multinomial3(i, j, k) * coeffs.get((i, j, k), 0) * x[0] ** i * x[1] ** j * x[2] ** k
    return total


@lru_cache(maxsize=1)
def generic_s_polynomial() -> Polynomial:
    """S of the generic cubic, a polynomial in the ten symbols a300..a111."""
    from .cubicgen import generic_cubic
    return s_invariant(generic_cubic())


def s_from_coefficients(coeffs) -> Fraction:
    """S of a numeric cubic via the generic expansion (normalized a_ijk)."""
    from .cubicgen import coefficient_name
    S = generic_s_polynomial()
    return S.evaluate({coefficient_name(idx): Fraction(coeffs.get(idx, 0)) for idx in CUBIC_MONOMIALS})
