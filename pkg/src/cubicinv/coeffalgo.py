"""Coefficient of a single monomial of S without expanding S.

For equal or unequal degrees alike, 6^4 * 4 * S is a sum of nine products
Q1_pq * Q2_pq of quadratics in the cubic's coefficients a_ijk, where
Q1_pq = d^2 B_pq/dx3^2 and Q2_pq = d^2 B_33/dx_p dx_q.  A monomial M in the
factor variables is split column by column into M1 * M2 (each column of M1 and
M2 summing to 2), and the coefficient of M1 in a product a_alpha a_beta is a
count of ways to hand each column's two units to the two factors.

Exponent matrices are handled as multisets of columns: columns of equal type
are interchangeable because every a_ijk is symmetric in the factor index.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, Iterable, List, Sequence, Tuple

from .cubicgen import CUBIC_MONOMIALS, coefficient_name, generic_cubic
from .invariants import S_NORMALIZATION, CubicInvariants, DivisibilityError

Column = Tuple[int, int, int]
Columns = Tuple[Column, ...]


def binom(n: int, k: int) -> int:
    """C(n, k), zero outside 0 <= k <= n."""
    if n < 0 or k < 0 or k > n:
        return 0
    return math.comb(n, k)


# -- exponent matrices ------------------------------------------------------------

def parse_matrix(text: str) -> Tuple[Tuple[int, ...], ...]:
    """'3,0,1;1,3,0;0,1,3' -> rows."""
    rows = tuple(tuple(int(v) for v in row.split(",")) for row in text.strip().split(";"))
    if len(rows) != 3 or len({len(r) for r in rows}) != 1:
        raise ValueError("an exponent matrix has three rows of equal length")
    return rows


def format_matrix(rows) -> str:
    return ";".join(",".join(str(v) for v in row) for row in rows)


def columns_of(rows) -> Columns:
    return tuple(zip(*rows)) if rows and rows[0] else ()


def rows_of(columns: Sequence[Column]) -> Tuple[Tuple[int, ...], ...]:
    if not columns:
        return ((), (), ())
    return tuple(tuple(c[i] for c in columns) for i in range(3))


def replicate(rows, m: int):
    return tuple(tuple(row) * m for row in rows)


def row_sums(columns: Iterable[Column]) -> Tuple[int, int, int]:
    a = b = c = 0
    for x, y, z in columns:
        a += x
        b += y
        c += z
    return (a, b, c)


# -- quadratic entries ---------------------------------------------------------------

@dataclass(frozen=True)
class Quadratic:
    """sum_t const_t * a_alpha_t * a_beta_t, alpha_t <= beta_t in CUBIC_MONOMIALS order."""

    terms: Tuple[Tuple[int, Tuple[int, int, int], Tuple[int, int, int]], ...]

    def tridegree(self, d: Tuple[int, int, int]) -> Tuple[int, int, int]:
        degs = {tuple(2 * d[i] - al[i] - be[i] for i in range(3)) for _, al, be in self.terms}
        if len(degs) != 1:
            raise ValueError("quadratic entry is not tri-homogeneous")
        return degs.pop()


def _to_quadratic(poly) -> Quadratic:
    names = {coefficient_name(idx): idx for idx in CUBIC_MONOMIALS}
    order = {idx: n for n, idx in enumerate(CUBIC_MONOMIALS)}
    terms = []
    for exps, c in poly.terms():
        factors = []
        for name, e in zip(poly.table.names, exps):
            if not e:
                continue
            factors.extend([names[name]] * e)
        if len(factors) != 2:
            raise ValueError("entry is not quadratic in the cubic's coefficients")
        al, be = sorted(factors, key=order.get)
        terms.append((c, al, be))
    return Quadratic(tuple(terms))


@lru_cache(maxsize=1)
def quadratic_entry_polynomials():
    """(Q1, Q2) with Q1[p][q] = d^2 B_pq/dx3^2 and Q2[p][q] = d^2 B_33/dx_p dx_q,
    derived from the cofactors of the generic cubic (no hardcoded constants)."""
    inv = CubicInvariants(generic_cubic())
    q1 = tuple(tuple(inv.d2B(p, q, 2, 2) for q in range(3)) for p in range(3))
    q2 = tuple(tuple(inv.d2B(2, 2, p, q) for q in range(3)) for p in range(3))
    return q1, q2


@lru_cache(maxsize=1)
def quadratic_entries():
    q1, q2 = quadratic_entry_polynomials()
    conv = lambda m: tuple(tuple(_to_quadratic(m[p][q]) for q in range(3)) for p in range(3))
    return conv(q1), conv(q2)


def tridegree_table(s: int):
    """Tridegrees of the entries d^2 B_33/dx_p dx_q for d1 = d2 = d3 = s + 1."""
    _, q2 = quadratic_entries()
    d = (s + 1,) * 3
    return tuple(tuple(q2[p][q].tridegree(d) for q in range(3)) for p in range(3))


def complementary_tridegree_table(s: int):
    """Tridegrees of d^2 B_pq/dx3^2, complementary to the above w.r.t. 4s."""
    q1, _ = quadratic_entries()
    d = (s + 1,) * 3
    return tuple(tuple(q1[p][q].tridegree(d) for q in range(3)) for p in range(3))


# -- coefficients in products of two a_ijk --------------------------------------------

def _pair_count(groups: Tuple[Tuple[Column, int], ...], target: Tuple[int, int, int]) -> int:
    """Ways to hand each column's two units to a first and second factor so
    that the first factor collects exactly ``target``.

    Folds over column groups, tracking the running tridegree of the first
    factor.  A squared column gives both units to each side; a mixed column
    of multiplicity m hands k of its first-row units to the first factor in
    C(m, k) ways.
    """
    if min(target) < 0:
        return 0
    states = {(0, 0, 0): 1}
    for col, m in groups:
        nxt: Dict[Tuple[int, int, int], int] = {}
        rows = [i for i in range(3) if col[i]]
        if len(rows) == 1:
            i = rows[0]
            for st, cnt in states.items():
                new = list(st)
                new[i] += m
                if new[i] <= target[i]:
                    new = tuple(new)
                    nxt[new] = nxt.get(new, 0) + cnt
        else:
            i, j = rows
            for st, cnt in states.items():
                for k in range(m + 1):
                    new = list(st)
                    new[i] += k
                    new[j] += m - k
                    if new[i] <= target[i] and new[j] <= target[j]:
                        new = tuple(new)
                        nxt[new] = nxt.get(new, 0) + cnt * math.comb(m, k)
        states = nxt
        if not states:
            return 0
    return states.get(target, 0)


def _groups(columns: Iterable[Column]) -> Tuple[Tuple[Column, int], ...]:
    cnt = Counter(c for c in columns if any(c))
    return tuple(sorted(cnt.items(), reverse=True))


def product_coefficient(columns: Sequence[Column], alpha, beta, d) -> int:
    """Coefficient of the column-sum-2 monomial in a_alpha * a_beta."""
    rs = row_sums(columns)
    if any(rs[i] != 2 * d[i] - alpha[i] - beta[i] for i in range(3)):
        return 0
    target = tuple(d[i] - alpha[i] for i in range(3))
    return _pair_count(_groups(columns), target)


def coefficient_in_quadratic(columns: Sequence[Column], q: Quadratic, d) -> int:
    """Exact coefficient of the monomial in the quadratic entry ``q``."""
    for c in columns:
        if sum(c) != 2:
            raise ValueError("monomial columns must sum to 2")
    groups = _groups(columns)
    rs = row_sums(columns)
    total = 0
    for const, al, be in q.terms:
        if any(rs[i] != 2 * d[i] - al[i] - be[i] for i in range(3)):
            continue
        total += const * _pair_count(groups, tuple(d[i] - al[i] for i in range(3)))
    return total


# -- coefficient of a monomial in S --------------------------------------------------------

def _split_options(col: Column) -> List[Tuple[Column, Column]]:
    opts = []
    for a in range(min(2, col[0]) + 1):
        for b in range(min(2 - a, col[1]) + 1):
            c = 2 - a - b
            if c <= col[2]:
                first = (a, b, c)
                opts.append((first, (col[0] - a, col[1] - b, col[2] - c)))
    return opts


def _compositions(m: int, k: int):
    if k == 1:
        yield (m,)
        return
    for first in range(m + 1):
        for rest in _compositions(m - first, k - 1):
            yield (first,) + rest


def _multinomial(parts) -> int:
    out = math.factorial(sum(parts))
    for p in parts:
        out //= math.factorial(p)
    return out


def validate_s_monomial(columns: Sequence[Column], d) -> None:
    for c in columns:
        if len(c) != 3 or sum(c) != 4 or min(c) < 0:
            raise ValueError(f"column {c} does not sum to 4")
    rs = row_sums(columns)
    want = tuple(4 * di - 4 for di in d)
    if rs != want:
        raise ValueError(f"row sums {rs} differ from the S tridegree {want}")
    if len(columns) != sum(d) - 3:
        raise ValueError(f"expected {sum(d) - 3} columns, got {len(columns)}")


def s_contributions(columns: Sequence[Column], d) -> Dict[Tuple[int, int], int]:
    """Coefficient of M in Q1_pq * Q2_pq for each (p, q), 0-based and
    un-normalized (their sum is 4 * 6^4 times the coefficient in S)."""
    validate_s_monomial(columns, d)
    d = tuple(d)
    q1, q2 = quadratic_entries()
    deg2 = {(p, q): q2[p][q].tridegree(d) for p in range(3) for q in range(3)}
    groups = _groups(columns)
    group_opts = [(_split_options(col), m) for col, m in groups]
    per_group = [list(_compositions(m, len(opts))) for opts, m in group_opts]
    cache1: Dict = {}
    cache2: Dict = {}
    out = {(p, q): 0 for p in range(3) for q in range(3)}
    for choice in product(*per_group):
        weight = 1
        m1: List[Column] = []
        m2: List[Column] = []
        for (opts, _), parts in zip(group_opts, choice):
            weight *= _multinomial(parts)
            for (first, second), n in zip(opts, parts):
                m1.extend([first] * n)
                m2.extend([second] * n)
        rs2 = row_sums(m2)
        key1 = tuple(sorted(m1))
        key2 = tuple(sorted(m2))
        for pq, deg in deg2.items():
            if deg != rs2:
                continue
            p, q = pq
            c2 = cache2.get((key2, pq))
            if c2 is None:
                c2 = cache2[(key2, pq)] = coefficient_in_quadratic(key2, q2[p][q], d)
            if not c2:
                continue
            c1 = cache1.get((key1, pq))
            if c1 is None:
                c1 = cache1[(key1, pq)] = coefficient_in_quadratic(key1, q1[p][q], d)
            out[pq] += weight * c1 * c2
    return out


def monomial_coefficient_in_S(columns: Sequence[Column], d) -> int:
    """Coefficient in S of the monomial whose exponent matrix has the given
    columns (one per factor triple), for degree data d = (d1, d2, d3)."""
    total = sum(s_contributions(columns, d).values())
    q, rem = divmod(total, S_NORMALIZATION)
    if rem:
        raise DivisibilityError(f"factorization sum {total} not divisible by 4*6^4")
    return q


def coefficient_from_matrix(rows, d=None) -> int:
    columns = columns_of(rows)
    if d is None:
        rs = row_sums(columns)
        if any((x + 4) % 4 for x in rs):
            raise ValueError("row sums are not of the form 4d - 4")
        d = tuple(x // 4 + 1 for x in rs)
    return monomial_coefficient_in_S(columns, d)


def pair_terms(columns: Sequence[Column], d) -> Dict[Tuple[int, int], Fraction]:
    """The six pieces of the coefficient in S, summed over p <= q
    (the off-diagonal pieces carry both (p, q) and (q, p))."""
    raw = s_contributions(columns, d)
    out = {}
    for p in range(3):
        for q in range(p, 3):
            v = raw[(p, q)] + (raw[(q, p)] if p != q else 0)
            out[(p, q)] = Fraction(v, S_NORMALIZATION)
    return out


# -- closed forms ---------------------------------------------------------------------------

def example_matrix(s: int):
    """s copies of the 3x3 block [3,0,1; 1,3,0; 0,1,3]."""
    return replicate(((3, 0, 1), (1, 3, 0), (0, 1, 3)), s)


def family_matrix(t: int):
    """4t columns (3,1,0), 4t columns (0,1,3), t columns (0,4,0); d = 3t + 1."""
    cols = [(3, 1, 0)] * (4 * t) + [(0, 1, 3)] * (4 * t) + [(0, 4, 0)] * t
    return rows_of(cols)


def closed_form_t(t: int) -> int:
    """(4t)!^2 (1/((t-1)!(t+1)!) - 1/t!^2)^4, with value 1 at t = 0."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 1
    f = math.factorial
    inner = Fraction(1, f(t - 1) * f(t + 1)) - Fraction(1, f(t) ** 2)
    val = f(4 * t) ** 2 * inner ** 4
    if val.denominator != 1:
        raise DivisibilityError(f"closed form at t={t} is not an integer: {val}")
    return val.numerator


@dataclass(frozen=True)
class AppendixValues:
    s: int
    parts: Tuple[int, int, int, int, int, int]

    @property
    def total(self) -> int:
        return sum(self.parts)

    def __getitem__(self, i):
        return self.parts[i]


@lru_cache(maxsize=None)
def _row(n: int) -> Tuple[int, ...]:
    row = [1]
    for k in range(n):
        row.append(row[-1] * (n - k) // (k + 1))
    return tuple(row)


def C(n: int, k: int) -> int:
    """Binomial coefficient from cached rows; zero outside 0 <= k <= n."""
    if n < 0 or k < 0 or k > n:
        return 0
    return _row(n)[k]


@lru_cache(maxsize=None)
def _x1(n):
    return sum(C(n, j) ** 2 * (C(n, j + 1) - C(n, j)) for j in range(n + 1))


@lru_cache(maxsize=None)
def _x2(l):
    return sum(C(l, j) * (C(l, j + 1) * C(l + 1, j + 2) + C(l, j + 1) * C(l + 1, j + 1)
                          - 2 * C(l, j) * C(l + 1, j + 1)) for j in range(l + 1))


@lru_cache(maxsize=None)
def _y2(n):
    return sum(C(n, i) * (C(n, i) * C(n - 1, i - 1) - C(n, i + 1) * C(n - 1, i)) for i in range(n + 1))


@lru_cache(maxsize=None)
def _x3(l):
    return sum(C(l, j) * (C(l, j + 1) * C(l + 2, j + 2) - C(l, j) * C(l + 2, j + 1)) for j in range(l + 1))


@lru_cache(maxsize=None)
def _y3(n):
    return sum(C(n, i) * C(n - 2, i - 1) * (C(n, i + 1) - C(n, i)) for i in range(n + 1))


@lru_cache(maxsize=None)
def _x4(l):
    return sum((C(l, j + 1) * C(l + 1, j + 1) + C(l, j) * C(l + 1, j + 1)
                - 2 * C(l + 1, j) * C(l, j - 1)) * C(l + 1, j) for j in range(l + 2))


@lru_cache(maxsize=None)
def _y4(n):
    # n = s - l - 1
    return sum(C(n, i) * C(n + 1, i + 1) * (C(n, i) - C(n, i + 1)) for i in range(n + 1))


@lru_cache(maxsize=None)
def _x5(l):
    return sum(C(l + 1, j) * (C(l, j + 1) * C(l + 2, j + 2) - C(l, j) * C(l + 2, j + 1))
               for j in range(l + 1))


@lru_cache(maxsize=None)
def _y5(n):
    # n = s - l
    return sum(C(n - 1, i) * C(n, i + 1) * (C(n - 2, i) - C(n - 2, i - 1)) for i in range(n))


@lru_cache(maxsize=None)
def _x6(l):
    return sum(C(l + 2, j) * (C(l, j - 2) * C(l + 2, j - 1) - C(l, j - 1) * C(l + 2, j))
               for j in range(1, l + 3))


@lru_cache(maxsize=None)
def _y6(n):
    # n = s - l
    return sum(C(n - 2, i) * C(n, i + 1) * (C(n - 2, i - 1) - C(n - 2, i)) for i in range(n - 1))


def appendix_A(s: int) -> AppendixValues:
    """The six closed binomial sums for the coefficient of s*[3,0,1;1,3,0;0,1,3]
    in S.  The inner sums over j and i separate, so each piece is a single
    sum over l of products of cached one-variable sums."""
    if s < 1:
        raise ValueError("s must be at least 1")
    cs = [math.comb(s, l) for l in range(s + 1)] + [0, 0]
    a1 = sum(cs[l] ** 3 * _x1(l) * _x1(s - l) for l in range(s + 1))
    a2 = sum(cs[l] ** 2 * cs[l + 1] * _x2(l) * _y2(s - l) for l in range(s))
    a3 = sum(cs[l] ** 2 * cs[l + 2] * _x3(l) * _y3(s - l) for l in range(s - 1))
    a4 = sum(cs[l + 1] ** 2 * cs[l] * _x4(l) * _y4(s - l - 1) for l in range(s))
    a5 = sum(cs[l] * cs[l + 1] * cs[l + 2] * _x5(l) * _y5(s - l) for l in range(s - 1))
    a6 = sum(cs[l + 2] ** 2 * cs[l] * _x6(l) * _y6(s - l) for l in range(s - 1))
    return AppendixValues(s, (a1, a2, a3, a4, a5, a6))
