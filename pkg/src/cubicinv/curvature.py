"""Exact curvature of the Hessian metric g = -(f_pq)/6 of a ternary cubic.

Everything is evaluated in exact rationals at a point x.  The full curvature
tensor comes from the closed formula

    R_ijkl = -(1/144) sum_{p,q} g^{pq} (f_jlp f_ikq - f_ilp f_jkq),

whose only point dependence is through the inverse metric.  A floating-point
Christoffel computation is kept as an independent oracle for the Ricci tensor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Mapping, Optional, Tuple

from .cubicgen import CubicForm
from .invariants import CubicInvariants, adjugate3, det3, numeric_hessian, s_from_coefficients
from .polycore import Polynomial

Vector = Tuple[Fraction, Fraction, Fraction]
Matrix = Tuple[Tuple[Fraction, ...], ...]


class DegenerateMetricError(ArithmeticError):
    """H(x) = 0: the Hessian metric is degenerate at x."""


class BoundaryPointError(DegenerateMetricError):
    """Index-cone test at a point where the Hessian is singular."""


def _vec(x) -> Vector:
    v = tuple(Fraction(c) for c in x)
    if len(v) != 3:
        raise ValueError("expected three coordinates")
    return v


def numeric_form(F: CubicForm, assignment: Optional[Mapping[str, object]] = None) -> Dict:
    """Normalized a_ijk of F as Fractions, after substituting ``assignment``."""
    if assignment:
        coeffs = {}
        for idx, a in F.normalized.items():
            a = a.substitute({k: v for k, v in assignment.items() if k in a.table})
            if set(a.raw_terms) - {0}:
                raise ValueError("assignment leaves symbolic coefficients")
            coeffs[idx] = Fraction(a.constant_term())
        return coeffs
    return F.numeric_coefficients()


@dataclass
class CurvaturePoint:
    """Hessian-metric data of a numeric cubic at one point, all exact."""

    coeffs: Dict[Tuple[int, int, int], Fraction]
    x: Vector
    f: Fraction = field(init=False)
    fpq: Matrix = field(init=False)
    third: List = field(init=False)
    H: Fraction = field(init=False)
    h: Fraction = field(init=False)
    B: Matrix = field(init=False)
    g: Matrix = field(init=False)
    g_inv: Optional[Matrix] = field(init=False)
    S: Fraction = field(init=False)

    def __post_init__(self):
        self.x = _vec(self.x)
        fpq, third = numeric_hessian(self.coeffs, self.x)
        self.fpq = tuple(tuple(Fraction(v) for v in row) for row in fpq)
        self.third = third
        # Euler: a cubic satisfies 6 f = x^T (f_pq) x
        self.f = sum(self.fpq[p][q] * self.x[p] * self.x[q]
                     for p in range(3) for q in range(3)) / 6
        self.H = det3(self.fpq)
        self.h = -self.H / 216
        self.B = adjugate3(self.fpq)
        self.g = tuple(tuple(-v / 6 for v in row) for row in self.fpq)
        # g^{-1} = (-f/6)^{-1} = -6 B / H
        self.g_inv = (tuple(tuple(-6 * b / self.H for b in row) for row in self.B)
                      if self.H else None)
        self.S = s_from_coefficients(self.coeffs)

    @classmethod
    def of(cls, F: CubicForm, x, assignment=None) -> "CurvaturePoint":
        return cls(numeric_form(F, assignment), _vec(x))

    def require_nondegenerate(self):
        if not self.H:
            raise DegenerateMetricError(f"H vanishes at x = {_fmt_vec(self.x)}")


def _point(F, x, assignment=None) -> CurvaturePoint:
    if isinstance(F, CurvaturePoint):
        return F
    if isinstance(F, dict):
        return CurvaturePoint(F, _vec(x))
    return CurvaturePoint.of(F, x, assignment)


def _fmt_vec(v) -> str:
    return "(" + ", ".join(str(c) for c in v) + ")"


# -- exact sign analysis ------------------------------------------------------

def char_coefficients(m) -> Tuple[Fraction, Fraction, Fraction]:
    """(trace, sum of principal 2-minors, det) of a 3x3 matrix."""
    c1 = m[0][0] + m[1][1] + m[2][2]
    c2 = (m[0][0] * m[1][1] - m[0][1] * m[1][0]
          + m[0][0] * m[2][2] - m[0][2] * m[2][0]
          + m[1][1] * m[2][2] - m[1][2] * m[2][1])
    return c1, c2, det3(m)


def _sign_changes(seq) -> int:
    signs = [1 if v > 0 else -1 for v in seq if v]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def eigen_signs(m) -> Tuple[int, int, int]:
    """(positive, zero, negative) eigenvalue counts of a symmetric 3x3 matrix.

    All roots of the characteristic polynomial are real, so Descartes' rule
    of signs is exact for them.
    """
    c1, c2, c3 = char_coefficients(m)
    # lambda^3 - c1 lambda^2 + c2 lambda - c3
    poly = [Fraction(1), -c1, c2, -c3]
    zeros = 0
    while zeros < 3 and not poly[3 - zeros]:
        zeros += 1
    trimmed = poly[:4 - zeros]
    pos = _sign_changes(trimmed)
    neg = _sign_changes([c * (-1) ** (len(trimmed) - 1 - i) for i, c in enumerate(trimmed)])
    return pos, zeros, neg


def index_cone_membership(F, x, assignment=None) -> bool:
    """f(x) > 0 and (f_pq(x)) of signature (1, 2)."""
    pt = _point(F, x, assignment)
    if not any(pt.x):
        raise ValueError("x must be nonzero")
    if pt.f <= 0:
        return False
    if not pt.H:
        raise BoundaryPointError(f"Hessian is singular at x = {_fmt_vec(pt.x)}")
    pos, _, neg = eigen_signs(pt.fpq)
    return (pos, neg) == (1, 2)


# -- curvature tensor --------------------------------------------------------------

@dataclass
class CurvatureTensor:
    point: CurvaturePoint
    R: Dict[Tuple[int, int, int, int], Fraction]

    def __getitem__(self, ijkl) -> Fraction:
        return self.R[ijkl]

    def evaluate(self, xi, eta) -> Fraction:
        """R(xi, eta, xi, eta)."""
        xi, eta = _vec(xi), _vec(eta)
        return sum(r * xi[i] * eta[j] * xi[k] * eta[l] for (i, j, k, l), r in self.R.items())

    def symmetries_hold(self) -> bool:
        R = self.R
        for i, j, k, l in product(range(3), repeat=4):
            r = R[i, j, k, l]
            if r != -R[j, i, k, l] or r != -R[i, j, l, k] or r != R[k, l, i, j]:
                return False
        return True


def curvature_tensor(F, x, assignment=None) -> CurvatureTensor:
    pt = _point(F, x, assignment)
    pt.require_nondegenerate()
    t, gi = pt.third, pt.g_inv
    # contract the inverse metric against the third derivatives once
    u = [[[sum(gi[p][q] * t[a][b][q] for q in range(3)) for p in range(3)]
          for b in range(3)] for a in range(3)]
    R = {}
    for i, j, k, l in product(range(3), repeat=4):
        s = sum(t[j][l][p] * u[i][k][p] - t[i][l][p] * u[j][k][p] for p in range(3))
        R[i, j, k, l] = -Fraction(s) / 144
    return CurvatureTensor(pt, R)


def bracket(x, xi, eta) -> Fraction:
    """l1 m2 x3 + l2 m3 x1 + l3 m1 x2 - l2 m1 x3 - l3 m2 x1 - l1 m3 x2."""
    (x1, x2, x3), (l1, l2, l3), (m1, m2, m3) = _vec(x), _vec(xi), _vec(eta)
    return l1 * m2 * x3 + l2 * m3 * x1 + l3 * m1 * x2 - l2 * m1 * x3 - l3 * m2 * x1 - l1 * m3 * x2


def theorem_1_3_sides(F, x, xi, eta, assignment=None) -> Tuple[Fraction, Fraction]:
    """(-4 h R(xi, eta, xi, eta), S * bracket^2)."""
    T = curvature_tensor(F, x, assignment)
    pt = T.point
    return -4 * pt.h * T.evaluate(xi, eta), pt.S * bracket(pt.x, xi, eta) ** 2


def theorem_1_3_check(F, x, xi, eta, assignment=None) -> bool:
    lhs, rhs = theorem_1_3_sides(F, x, xi, eta, assignment)
    return lhs == rhs


def level_set_curvature(F, x, assignment=None) -> Fraction:
    """Curvature of the surface f = 1 at the point on the ray through x."""
    pt = _point(F, x, assignment)
    pt.require_nondegenerate()
    return Fraction(-9, 4) + Fraction(6 ** 6, 4) * pt.S * pt.f ** 2 / pt.H ** 2


# -- Ricci ---------------------------------------------------------------------------

def ricci_tensor(F, x, assignment=None) -> Matrix:
    """Ric_jl = sum_{i,k} g^{ik} R_ijkl."""
    T = curvature_tensor(F, x, assignment)
    gi = T.point.g_inv
    return tuple(tuple(sum(gi[i][k] * T.R[i, j, k, l] for i in range(3) for k in range(3))
                       for l in range(3)) for j in range(3))


def ricci_eigen_signs(F, x, assignment=None) -> Tuple[int, int, int]:
    return eigen_signs(ricci_tensor(F, x, assignment))


def _christoffel(coeffs, x):
    f, third = numeric_hessian(coeffs, x)
    d = det3(f)
    adj = adjugate3(f)
    # g = -f/6, so g^{il} = -6 adj_il / d and d_k g_ij = -f_ijk / 6
    gi = [[-6 * Fraction(adj[i][j]) / d for j in range(3)] for i in range(3)]
    dg = [[[-Fraction(third[i][j][k]) / 6 for k in range(3)] for j in range(3)] for i in range(3)]
    # Gamma^i_jk = 1/2 g^{il} (d_j g_lk + d_k g_lj - d_l g_jk)
    return [[[sum(gi[i][l] * (dg[l][k][j] + dg[l][j][k] - dg[j][k][l]) for l in range(3)) / 2
              for k in range(3)] for j in range(3)] for i in range(3)]


def ricci_finite_difference(F, x, step=Fraction(1, 10 ** 6), assignment=None):
    """Ricci from Christoffel symbols with five-point central differences.

    Independent of the closed curvature formula.  The difference quotients
    are taken in rationals so that only truncation error (order step^4)
    remains; the result is returned as floats.

    Ric_jk = d_i G^i_jk - d_k G^i_ij + G^i_ip G^p_jk - G^i_kp G^p_ij.
    """
    coeffs = F if isinstance(F, dict) else numeric_form(F, assignment)
    x = _vec(x)
    step = Fraction(step)
    G = _christoffel(coeffs, x)
    dG = []
    for m in range(3):
        samples = []
        for off in (2, 1, -1, -2):
            y = list(x)
            y[m] += off * step
            samples.append(_christoffel(coeffs, y))
        G2, G1, Gm1, Gm2 = samples
        dG.append([[[(-G2[i][j][k] + 8 * G1[i][j][k] - 8 * Gm1[i][j][k] + Gm2[i][j][k]) / (12 * step)
                     for k in range(3)] for j in range(3)] for i in range(3)])
    ric = [[0.0] * 3 for _ in range(3)]
    for j in range(3):
        for k in range(3):
            v = Fraction(0)
            for i in range(3):
                v += dG[i][i][j][k] - dG[k][i][i][j]
                for p in range(3):
                    v += G[i][i][p] * G[p][j][k] - G[i][k][p] * G[p][i][j]
            ric[j][k] = float(v)
    return ric


# -- bound polynomial and scans ------------------------------------------------------

def conjecture_2_2_polynomial(F: CubicForm, inv: Optional[CubicInvariants] = None) -> Polynomial:
    """9 H^2 - 6^6 S F^2 in all variables."""
    inv = inv or CubicInvariants(F)
    H, S, f = inv.H, inv.S, inv.F
    return H * H * 9 - S * f * f * 6 ** 6


def _q(v: Fraction) -> str:
    return str(v)


def point_report(F, x, assignment=None) -> dict:
    pt = _point(F, x, assignment)
    rec = {
        "x": [_q(c) for c in pt.x],
        "f": _q(pt.f),
        "H": _q(pt.H),
        "S": _q(pt.S),
        "level_set_curvature": None,
        "ricci_eigen_signs": None,
        "in_index_cone": None,
    }
    if pt.H:
        k = level_set_curvature(pt, pt.x)
        rec["level_set_curvature"] = _q(k)
        pos, zero, neg = ricci_eigen_signs(pt, pt.x)
        rec["ricci_eigen_signs"] = {"positive": pos, "zero": zero, "negative": neg}
    if pt.f <= 0:
        rec["in_index_cone"] = False
    elif pt.H:
        rec["in_index_cone"] = index_cone_membership(pt, pt.x)
    return rec


def grid_points(resolution: int) -> List[Vector]:
    """Rational points k/resolution, k = 1..resolution, of the open positive octant."""
    if resolution < 1:
        raise ValueError("resolution must be positive")
    vals = [Fraction(k, resolution) for k in range(1, resolution + 1)]
    return [tuple(p) for p in product(vals, repeat=3)]


def scan(F, resolution: int = 5, assignment=None) -> List[dict]:
    coeffs = F if isinstance(F, dict) else numeric_form(F, assignment)
    out = []
    for x in grid_points(resolution):
        rec = point_report(CurvaturePoint(coeffs, x), x)
        if rec["level_set_curvature"] is not None:
            rec["level_set_curvature_float"] = float(Fraction(rec["level_set_curvature"]))
        out.append(rec)
    return out


def ricci_psd_on_grid(F, resolution: int = 5, assignment=None) -> bool:
    coeffs = F if isinstance(F, dict) else numeric_form(F, assignment)
    for x in grid_points(resolution):
        pt = CurvaturePoint(coeffs, x)
        if not pt.H:
            continue
        if eigen_signs(ricci_tensor(pt, x))[2]:
            return False
    return True


__all__ = [
    "BoundaryPointError", "CurvaturePoint", "CurvatureTensor", "DegenerateMetricError",
    "bracket", "char_coefficients", "conjecture_2_2_polynomial", "curvature_tensor",
    "eigen_signs", "grid_points", "index_cone_membership", "level_set_curvature",
    "numeric_form", "point_report", "ricci_eigen_signs", "ricci_finite_difference",
    "ricci_psd_on_grid", "ricci_tensor", "scan", "theorem_1_3_check", "theorem_1_3_sides",
]
