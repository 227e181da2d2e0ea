"""Symmetry-reduced positivity checks.

A monomial in the factor variables is recorded as a 3 x r exponent matrix
(row p = exponents of the p-th variable of each triple, column j = factor j).
Two matrices are of the same *type* when they differ by a permutation of
columns, or of rows whose degrees d_p agree.  Coefficients of S are constant
on types, so the S-check visits one representative per type and weights it
by the orbit size.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import coeffalgo
from .coeffalgo import Column, binom, columns_of, format_matrix, rows_of
from .cubicgen import DegreeSpec, build_product_cubic
from .invariants import CubicInvariants

log = logging.getLogger(__name__)

Matrix = Tuple[Tuple[int, ...], ...]


# -- canonical forms -------------------------------------------------------------

def row_group(d: Sequence[int]) -> List[Tuple[int, int, int]]:
    """Row permutations sigma with d[sigma[i]] == d[i]."""
    return [s for s in permutations(range(3)) if all(d[s[i]] == d[i] for i in range(3))]


@dataclass(frozen=True)
class CanonicalType:
    matrix: Matrix
    orbit_size: int
    group_order: int
    x_exponents: Optional[Tuple[int, int, int]] = None

    @property
    def stabilizer_order(self) -> int:
        return self.group_order // self.orbit_size

    @property
    def columns(self) -> Tuple[Column, ...]:
        return columns_of(self.matrix)

    def label(self) -> str:
        return format_matrix(self.matrix)


def _sorted_cols(cols) -> Tuple[Column, ...]:
    return tuple(sorted(cols, reverse=True))


def _column_arrangements(cols) -> int:
    out = math.factorial(len(cols))
    for m in Counter(cols).values():
        out //= math.factorial(m)
    return out


def canonicalize(rows, d, column_sum: Optional[int] = 4, x_exponents=None) -> CanonicalType:
    """Lexicographic minimum, over the allowed row permutations, of the matrix
    with its columns sorted in descending order."""
    cols = columns_of(rows)
    if column_sum is not None:
        for c in cols:
            if sum(c) != column_sum:
                raise ValueError(f"column {c} does not sum to {column_sum}")
    group = row_group(d)
    images = set()
    best = None
    for sigma in group:
        pc = _sorted_cols(tuple(c[sigma[i]] for i in range(3)) for c in cols)
        x = tuple(x_exponents[sigma[i]] for i in range(3)) if x_exponents is not None else None
        images.add((x, pc))
        key = (x, rows_of(pc))
        if best is None or key < best:
            best = key
    orbit = sum(_column_arrangements(pc) for _, pc in images)
    group_order = len(group) * math.factorial(len(cols))
    x, mat = best
    return CanonicalType(mat, orbit, group_order, x)


# -- enumeration --------------------------------------------------------------------

def _compositions3(n: int) -> List[Column]:
    return [(a, b, n - a - b) for a in range(n, -1, -1) for b in range(n - a, -1, -1)]


def type_row_sums(spec: DegreeSpec, column_sum: int, x_exponents=None) -> Tuple[int, int, int]:
    if column_sum == 4:
        return tuple(4 * d - 4 for d in spec.d)
    if column_sum == 6:
        if x_exponents is None:
            raise ValueError("column sum 6 requires an x-exponent triple")
        return tuple(6 * d - 4 - e for d, e in zip(spec.d, x_exponents))
    raise ValueError("column_sum must be 4 or 6")


def _multisets(options: Sequence[Column], r: int, target) -> Iterator[Tuple[Column, ...]]:
    """Non-increasing sequences of r columns (by index into options) with
    the given row sums."""
    n = len(options)
    chosen: List[Column] = []

    def rec(start, remaining, sums):
        if remaining == 0:
            if sums == target:
                yield tuple(chosen)
            return
        for idx in range(start, n):
            c = options[idx]
            ns = (sums[0] + c[0], sums[1] + c[1], sums[2] + c[2])
            if ns[0] > target[0] or ns[1] > target[1] or ns[2] > target[2]:
                continue
            chosen.append(c)
            yield from rec(idx, remaining - 1, ns)
            chosen.pop()

    yield from rec(0, r, (0, 0, 0))


def enumerate_types(spec: DegreeSpec, column_sum: int = 4, no_fourth_powers: bool = False,
                    x_exponents=None) -> Iterator[CanonicalType]:
    """Every canonical type with the required column and row sums, once, in
    increasing canonical order.  ``no_fourth_powers`` drops matrices with an
    entry equal to the column sum.  For column sum 6 all x-exponent triples
    summing to 6 are visited unless one is given."""
    if column_sum == 6 and x_exponents is None:
        for x in _compositions3(6):
            yield from enumerate_types(spec, 6, no_fourth_powers, x)
        return
    target = type_row_sums(spec, column_sum, x_exponents)
    if min(target) < 0:
        return
    options = _compositions3(column_sum)
    if no_fourth_powers:
        options = [c for c in options if max(c) < column_sum]
    found = []
    for cols in _multisets(options, spec.r, target):
        ct = canonicalize(rows_of(cols), spec.d, column_sum, x_exponents)
        if ct.matrix == rows_of(cols) and ct.x_exponents == (
                tuple(x_exponents) if x_exponents is not None else None):
            found.append(ct)
    found.sort(key=lambda t: t.matrix)
    yield from found


# -- reports --------------------------------------------------------------------------

@dataclass
class PositivityReport:
    spec: DegreeSpec
    filter: Optional[str]
    n_types: int
    n_nonzero: int
    min: Optional[dict]
    max: Optional[dict]
    zeros: List[str]
    violations: List[dict]
    runtime_seconds: Optional[float] = None
    checkpoint: Optional[str] = None
    smallest: List[dict] = field(default_factory=list)
    largest: List[dict] = field(default_factory=list)
    cross_check: Optional[dict] = None
    coefficients: List[Tuple[str, int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self, include_coefficients: bool = False) -> dict:
        out = {
            "spec": list(self.spec.d),
            "filter": self.filter,
            "n_types": self.n_types,
            "n_nonzero": self.n_nonzero,
            "min": self.min,
            "max": self.max,
            "zeros": self.zeros,
            "violations": self.violations,
            "smallest": self.smallest,
            "largest": self.largest,
            "cross_check": self.cross_check,
            "runtime_seconds": self.runtime_seconds,
            "checkpoint": self.checkpoint,
        }
        if include_coefficients:
            out["coefficients"] = [{"matrix": m, "orbit_size": o, "coefficient": c}
                                   for m, o, c in self.coefficients]
        return out


def _value_groups(coeffs: List[Tuple[str, int, int]], k: int, largest: bool) -> List[dict]:
    by_value: Dict[int, List[str]] = {}
    for m, _, c in coeffs:
        if c:
            by_value.setdefault(c, []).append(m)
    values = sorted(by_value, reverse=largest)[:k]
    return [{"value": v, "witnesses": by_value[v]} for v in values]


def _coefficient_job(args):
    cols, d = args
    return coeffalgo.monomial_coefficient_in_S(cols, d)


def _shard_path(directory: Path, index: int) -> Path:
    return directory / f"shard_{index:05d}.json"


def _run_types(types: List[CanonicalType], spec: DegreeSpec, workers: int,
               checkpoint_dir: Optional[str], shard_size: int) -> List[int]:
    jobs = [(t.columns, spec.d) for t in types]
    shards = [jobs[i:i + shard_size] for i in range(0, len(jobs), shard_size)]
    labels = [[t.label() for t in types[i:i + shard_size]] for i in range(0, len(types), shard_size)]
    results: List[Optional[List[int]]] = [None] * len(shards)
    directory = Path(checkpoint_dir) if checkpoint_dir else None
    if directory is not None:
        directory.mkdir(parents=True, exist_ok=True)
        for i in range(len(shards)):
            path = _shard_path(directory, i)
            if path.exists():
                data = json.loads(path.read_text())
                digest = hashlib.sha256("\n".join(labels[i]).encode()).hexdigest()
                if data.get("digest") != digest:
                    raise ValueError(f"checkpoint {path} does not match this run")
                results[i] = data["values"]
    pending = [i for i, r in enumerate(results) if r is None]

    def store(i, values):
        results[i] = values
        if directory is not None:
            digest = hashlib.sha256("\n".join(labels[i]).encode()).hexdigest()
            tmp = _shard_path(directory, i).with_suffix(".tmp")
            tmp.write_text(json.dumps({"digest": digest, "values": values}))
            os.replace(tmp, _shard_path(directory, i))

    if workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.map(_coefficient_job, shards[i]) for i in pending}
            for i in pending:
                store(i, list(futures[i]))
    else:
        for i in pending:
            store(i, [_coefficient_job(job) for job in shards[i]])
    return [v for shard in results for v in shard]


def check_conjecture_2_1(spec: DegreeSpec, no_fourth_powers: bool = False, workers: int = 1,
                         checkpoint_dir: Optional[str] = None, cross_check: Optional[bool] = None,
                         shard_size: int = 256, k_extremes: int = 8) -> PositivityReport:
    """Coefficients of S per canonical type via the factorization algorithm."""
    t0 = time.perf_counter()
    types = list(enumerate_types(spec, 4, no_fourth_powers))
    values = _run_types(types, spec, workers, checkpoint_dir, shard_size)
    coeffs = [(t.label(), t.orbit_size, v) for t, v in zip(types, values)]
    nonzero = [(m, o, c) for m, o, c in coeffs if c]
    report = PositivityReport(
        spec=spec,
        filter="no-fourth-powers" if no_fourth_powers else None,
        n_types=len(types),
        n_nonzero=sum(o for _, o, _ in nonzero),
        min=None, max=None,
        zeros=[m for m, _, c in coeffs if c == 0],
        violations=[{"matrix": m, "value": c} for m, _, c in coeffs if c < 0],
        checkpoint=checkpoint_dir,
        coefficients=coeffs,
    )
    if nonzero:
        lo = min(nonzero, key=lambda t: t[2])
        hi = max(nonzero, key=lambda t: t[2])
        report.min = {"value": lo[2], "witness_matrix": lo[0]}
        report.max = {"value": hi[2], "witness_matrix": hi[0]}
        report.smallest = _value_groups(coeffs, k_extremes, largest=False)
        report.largest = _value_groups(coeffs, k_extremes, largest=True)
    if cross_check is None:
        cross_check = spec.r <= 3
    if cross_check:
        report.cross_check = cross_check_with_expansion(spec, types, values, no_fourth_powers)
        if not report.cross_check["agree"]:
            report.violations.append({"matrix": None, "value": None,
                                      "reason": "factorization disagrees with full expansion"})
    report.runtime_seconds = round(time.perf_counter() - t0, 3)
    return report


def expanded_s_by_type(spec: DegreeSpec):
    """Full symbolic S, grouped by canonical type: {matrix: (coefficient, count)}."""
    S = CubicInvariants(build_product_cubic(spec)).S
    return group_polynomial_by_type(S, spec), S


def monomial_matrix(poly, key) -> Matrix:
    triples = poly.table.factor_triples()
    exps = poly.exponent_dict(key)
    return tuple(tuple(exps.get(tr[p], 0) for tr in triples) for p in range(3))


def group_polynomial_by_type(poly, spec: DegreeSpec):
    out: Dict[Matrix, Tuple[int, int]] = {}
    cache: Dict[Tuple[Column, ...], Matrix] = {}
    for key, c in poly.raw_terms.items():
        rows = monomial_matrix(poly, key)
        sc = _sorted_cols(columns_of(rows))
        canon = cache.get(sc)
        if canon is None:
            canon = cache[sc] = canonicalize(rows, spec.d).matrix
        prev = out.get(canon)
        if prev is None:
            out[canon] = (c, 1)
        else:
            if prev[0] != c:
                raise AssertionError(f"coefficient not constant on type {format_matrix(canon)}")
            out[canon] = (c, prev[1] + 1)
    return out


def cross_check_with_expansion(spec, types, values, no_fourth_powers=False) -> dict:
    grouped, S = expanded_s_by_type(spec)
    mismatches = []
    for t, v in zip(types, values):
        c, count = grouped.get(t.matrix, (0, 0))
        if c != v or (c and count != t.orbit_size):
            mismatches.append(t.label())
    n_terms = len(S)
    if no_fourth_powers:
        n_terms = sum(cnt for m, (c, cnt) in grouped.items() if max(max(r) for r in m) < 4)
    return {"method": "full expansion", "n_terms": n_terms, "agree": not mismatches,
            "mismatches": mismatches[:20]}


# -- full-expansion sign reports ------------------------------------------------------

@dataclass
class SignReport:
    spec: DegreeSpec
    entries: Dict[str, dict]
    identities: Dict[str, bool] = field(default_factory=dict)
    runtime_seconds: Optional[float] = None

    @property
    def ok(self) -> bool:
        return all(e["ok"] for e in self.entries.values()) and all(self.identities.values())

    def to_dict(self) -> dict:
        return {"spec": list(self.spec.d), "ok": self.ok, "entries": self.entries,
                "identities": self.identities, "runtime_seconds": self.runtime_seconds}


def _sign_summary(poly, sign: int, max_witnesses: int = 10) -> dict:
    coeffs = list(poly.coefficients())
    bad = []
    for key, c in poly.raw_terms.items():
        if (c > 0) != (sign > 0):
            if len(bad) < max_witnesses:
                bad.append({"monomial": poly.exponent_dict(key), "value": c})
    n_bad = sum(1 for c in coeffs if (c > 0) != (sign > 0))
    return {"expected_sign": "+" if sign > 0 else "-", "n_terms": len(coeffs),
            "n_violations": n_bad, "violations": bad, "ok": n_bad == 0,
            "min": min(coeffs) if coeffs else None, "max": max(coeffs) if coeffs else None}


def check_theorem_3_1(spec: DegreeSpec, inv: Optional[CubicInvariants] = None) -> SignReport:
    """B_pp must have only negative, B_pq (p != q) only positive coefficients."""
    t0 = time.perf_counter()
    inv = inv or CubicInvariants(build_product_cubic(spec))
    entries = {}
    for p in range(3):
        for q in range(p, 3):
            entries[f"B{p + 1}{q + 1}"] = _sign_summary(inv.B[p, q], -1 if p == q else 1)
    return SignReport(spec, entries, runtime_seconds=round(time.perf_counter() - t0, 3))


def check_theorem_3_2(spec: DegreeSpec, inv: Optional[CubicInvariants] = None,
                      adjoint_entries: Optional[bool] = None) -> SignReport:
    """H must have only positive coefficients; optionally also the entries
    of Adj(B) (B11 B22 - B12^2 = F33 H and its companions)."""
    t0 = time.perf_counter()
    inv = inv or CubicInvariants(build_product_cubic(spec))
    report = SignReport(spec, {"H": _sign_summary(inv.H, 1)})
    if adjoint_entries is None:
        adjoint_entries = spec.r <= 3
    if adjoint_entries:
        from .invariants import adjugate3
        adj = adjugate3(inv.B.entries)
        f = inv.hessian.entries
        report.identities["adjB_equals_H_f"] = all(
            adj[p][q] == inv.H * f[p][q] for p in range(3) for q in range(3))
        for p in range(3):
            for q in range(p, 3):
                report.entries[f"AdjB{p + 1}{q + 1}"] = _sign_summary(adj[p][q], 1)
    report.runtime_seconds = round(time.perf_counter() - t0, 3)
    return report


def check_conjecture_2_2(spec: DegreeSpec) -> PositivityReport:
    """Full expansion of 9 H^2 - 6^6 S F^2; every coefficient must be >= 0."""
    from .curvature import conjecture_2_2_polynomial

    t0 = time.perf_counter()
    poly = conjecture_2_2_polynomial(build_product_cubic(spec))
    xs = ("x1", "x2", "x3")
    entries = []
    for key, c in poly.raw_terms.items():
        rows = monomial_matrix(poly, key)
        exps = poly.exponent_dict(key)
        x = tuple(exps.get(n, 0) for n in xs)
        ct = canonicalize(rows, spec.d, None, x)
        entries.append((ct, c))
    labels = {}
    for ct, c in entries:
        labels.setdefault((ct.x_exponents, ct.matrix), c)
    items = sorted(labels.items())
    label = lambda k: f"x={','.join(map(str, k[0]))} {format_matrix(k[1])}"
    report = PositivityReport(
        spec=spec, filter=None, n_types=len(items), n_nonzero=len(poly),
        min=None, max=None, zeros=[],
        violations=[{"matrix": label(k), "value": c} for k, c in items if c < 0],
    )
    if items:
        lo = min(items, key=lambda kv: kv[1])
        hi = max(items, key=lambda kv: kv[1])
        report.min = {"value": lo[1], "witness_matrix": label(lo[0])}
        report.max = {"value": hi[1], "witness_matrix": label(hi[0])}
    report.runtime_seconds = round(time.perf_counter() - t0, 3)
    return report


# -- closed binomial sums for the cofactor coefficients --------------------------------

def _sum(n, f):
    return sum(f(k) for k in range(n + 1))


C = binom

# case -> (parities of (u~, v~, w~) as offsets, products compared, formula)
# offsets: u~ = 2u + ou, v~ = 2v + ov, w~ = 2w + ow
SECTION3_CASES = {
    # B33/36, x1 x2 term: a300 a030 - a210 a120
    "a300a030": ((1, 0, 0), lambda u, v, w: _sum(2 * u + 1, lambda k: C(2 * u + 1, k)
                 * C(2 * v, v + u - (k + 1)) * C(2 * w, w + u - (k + 1)))),
    "a210a120": ((1, 0, 0), lambda u, v, w: _sum(2 * u + 1, lambda k: C(2 * u + 1, k)
                 * C(2 * v, v + u - k) * C(2 * w, w + u - k))),
    "x1x2": ((1, 0, 0), lambda u, v, w: _sum(2 * u + 1, lambda k: C(2 * u + 1, k) * (
        C(2 * v, v + u - (k + 1)) * C(2 * w, w + u - (k + 1))
        - C(2 * v, v + u - k) * C(2 * w, w + u - k)))),
    # B33/36, x1 x3 term, split into two halves
    "x1x3_a": ((0, 1, 0), lambda u, v, w: _sum(2 * v + 1, lambda k: C(2 * v + 1, k)
               * C(2 * w, w + v - k) * (C(2 * u, u + v - (k + 1)) - C(2 * u, u + v - k)))),
    # the w-bracket is shifted by one against the a-half; checked by direct expansion
    "x1x3_b": ((0, 1, 0), lambda u, v, w: _sum(2 * v + 1, lambda k: C(2 * v + 1, k)
               * C(2 * u, u + v - k) * (C(2 * w, w + v - (k - 1)) - C(2 * w, w + v - k)))),
    # B33/36, x1^2 and x3^2 terms (both parity branches)
    "x1sq_even": ((0, 0, 0), lambda u, v, w: _sum(2 * u, lambda k: C(2 * u, k) * (
        C(2 * v, u + v - 1 - k) * C(2 * w, w + u - 1 - k) - C(2 * v, u + v - k) * C(2 * w, w + u - k)))),
    "x1sq_odd": ((1, 1, 1), lambda u, v, w: _sum(2 * u + 1, lambda k: C(2 * u + 1, k) * (
        C(2 * v + 1, u + v - k) * C(2 * w + 1, w + u - k)
        - C(2 * v + 1, u + v + 1 - k) * C(2 * w + 1, w + u + 1 - k)))),
    # B12/36, x3^2 term: a102 a012 - a111 a003
    "B12_x3sq": ((1, 0, 0), lambda u, v, w: _sum(2 * u + 1, lambda k: C(2 * u + 1, k)
                 * C(2 * v, v + u - k) * (C(2 * w, w + u - k) - C(2 * w, w + u - (k - 1))))),
    # B13/36, x3^2 term: a111 a012 - a102 a021
    "B13_x3sq": ((0, 1, 0), lambda u, v, w: _sum(2 * v + 1, lambda k: C(2 * v + 1, k)
                 * C(2 * u, u + v - k) * (C(2 * w, w + v - k) - C(2 * w, w + v + 1 - k)))),
}
SECTION3_CASES["x3sq_even"] = SECTION3_CASES["x1sq_even"]
SECTION3_CASES["x3sq_odd"] = SECTION3_CASES["x1sq_odd"]

# the products of normalized coefficients each case stands for (sign +1/-1)
SECTION3_PRODUCTS = {
    "a300a030": [(1, (3, 0, 0), (0, 3, 0))],
    "a210a120": [(1, (2, 1, 0), (1, 2, 0))],
    "x1x2": [(1, (3, 0, 0), (0, 3, 0)), (-1, (2, 1, 0), (1, 2, 0))],
    "x1x3_a": [(1, (3, 0, 0), (0, 2, 1)), (-1, (2, 1, 0), (1, 1, 1))],
    "x1x3_b": [(1, (2, 0, 1), (1, 2, 0)), (-1, (2, 1, 0), (1, 1, 1))],
    "x1sq_even": [(1, (3, 0, 0), (1, 2, 0)), (-1, (2, 1, 0), (2, 1, 0))],
    "x1sq_odd": [(1, (3, 0, 0), (1, 2, 0)), (-1, (2, 1, 0), (2, 1, 0))],
    "x3sq_even": [(1, (2, 0, 1), (0, 2, 1)), (-1, (1, 1, 1), (1, 1, 1))],
    "x3sq_odd": [(1, (2, 0, 1), (0, 2, 1)), (-1, (1, 1, 1), (1, 1, 1))],
    "B12_x3sq": [(1, (1, 0, 2), (0, 1, 2)), (-1, (1, 1, 1), (0, 0, 3))],
    "B13_x3sq": [(1, (1, 1, 1), (0, 1, 2)), (-1, (1, 0, 2), (0, 2, 1))],
}


def section3_binomial_coefficient(case: str, u: int, v: int, w: int) -> int:
    """Closed binomial sum for the coefficient of a monomial with mixed-column
    counts (u~, v~, w~) = (2u + ou, 2v + ov, 2w + ow) in the given product
    (equal degrees; the value does not depend on s)."""
    if case not in SECTION3_CASES:
        raise KeyError(f"unknown case {case!r}; known: {sorted(SECTION3_CASES)}")
    if min(u, v, w) < 0:
        raise ValueError("u, v, w must be non-negative")
    _, fn = SECTION3_CASES[case]
    return fn(u, v, w)


def section3_parity(case: str) -> Tuple[int, int, int]:
    return SECTION3_CASES[case][0]


def check_section3_parity(case: str, u_t: int, v_t: int, w_t: int) -> Tuple[int, int, int]:
    """Map raw counts (u~, v~, w~) to (u, v, w); raise on a parity mismatch."""
    offs = section3_parity(case)
    raw = (u_t, v_t, w_t)
    if any((x - o) % 2 or x < o for x, o in zip(raw, offs)):
        raise ValueError(f"counts {raw} violate the parity condition of case {case}")
    return tuple((x - o) // 2 for x, o in zip(raw, offs))


def section3_monomial(case: str, u: int, v: int, w: int, s: int):
    """Columns of a monomial with the case's mixed counts whose tridegree
    matches the case's products for d = s + 1; None if s is too small."""
    ou, ov, ow = section3_parity(case)
    ut, vt, wt = 2 * u + ou, 2 * v + ov, 2 * w + ow
    _, al, be = SECTION3_PRODUCTS[case][0]
    d = s + 1
    rs = tuple(2 * d - al[i] - be[i] for i in range(3))
    twice = (rs[0] - ut - vt, rs[1] - ut - wt, rs[2] - vt - wt)
    if any(x < 0 or x % 2 for x in twice):
        return None
    p1, p2, p3 = (x // 2 for x in twice)
    return ([(2, 0, 0)] * p1 + [(0, 2, 0)] * p2 + [(0, 0, 2)] * p3
            + [(1, 1, 0)] * ut + [(1, 0, 1)] * vt + [(0, 1, 1)] * wt)


def section3_via_dp(case: str, u: int, v: int, w: int, s: int) -> Optional[int]:
    cols = section3_monomial(case, u, v, w, s)
    if cols is None:
        return None
    d = (s + 1,) * 3
    return sum(sign * coeffalgo.product_coefficient(cols, al, be, d)
               for sign, al, be in SECTION3_PRODUCTS[case])
