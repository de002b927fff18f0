"""Fredholm determinants, L-function assembly and comparison with exact sums.

Power series in t carry, per coefficient, a certified precision in pi-units:
the computed coefficient agrees with the true one modulo pi^prec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import gfq, polytope, precision
from .dwork_operator import FrobMatrix, build_alpha_matrix, build_F0
from .gfq import CycInt, SpaceSpec
from .laurent import LaurentPoly, format_laurent, specialize_zero
from .linalg import TowerMatrix
from .padic import (
    ARTIN_HASSE,
    PrecisionError,
    TowerElem,
    TowerParams,
    get_tower,
    splitting_coefficients,
    vp_factorial,
    vp_int,
)


class CertificationError(ValueError):
    """The requested precision cannot be certified at the given cutoff."""

    def __init__(self, message: str, required_W=None):
        super().__init__(message)
        self.required_W = required_W


# --- certified series -------------------------------------------------------------------

@dataclass
class CertSeries:
    """sum c_k t^k, k <= deg, with c_k known modulo pi^prec[k]."""

    T: TowerParams
    coeffs: list
    prec: list

    @classmethod
    def one(cls, T: TowerParams, deg: int) -> "CertSeries":
        return cls(T, [T.one()] + [T.zero()] * deg, [T.max_units] * (deg + 1))

    @classmethod
    def exact(cls, T: TowerParams, coeffs: Sequence[TowerElem], deg: int) -> "CertSeries":
        cs = list(coeffs[: deg + 1]) + [T.zero()] * max(0, deg + 1 - len(coeffs))
        return cls(T, cs, [T.max_units] * (deg + 1))

    @property
    def deg(self) -> int:
        return len(self.coeffs) - 1

    def lower_val(self, k: int) -> int:
        """Lower bound (pi-units) for the valuation of the true coefficient."""
        return min(self.coeffs[k].val_units(), self.prec[k])

    def __mul__(self, other: "CertSeries") -> "CertSeries":
        deg = min(self.deg, other.deg)
        cap = self.T.max_units
        cs, ps = [], []
        for k in range(deg + 1):
            acc = self.T.zero()
            pr = cap
            for i in range(k + 1):
                acc = acc + self.coeffs[i] * other.coeffs[k - i]
                pr = min(pr, self.prec[i] + other.lower_val(k - i), self.lower_val(i) + other.prec[k - i])
            cs.append(acc)
            ps.append(min(pr, cap))
        return CertSeries(self.T, cs, ps)

    def inverse(self) -> "CertSeries":
        if self.lower_val(0) > 0:
            raise PrecisionError("series constant term is not a unit")
        inv0 = self.coeffs[0].inverse()
        cap = self.T.max_units
        out = [inv0]
        ps = [self.prec[0]]
        for k in range(1, self.deg + 1):
            acc = self.T.zero()
            pr = cap
            for i in range(1, k + 1):
                acc = acc + self.coeffs[i] * out[k - i]
                lv_out = min(out[k - i].val_units(), ps[k - i])
                pr = min(pr, self.prec[i] + lv_out, self.lower_val(i) + ps[k - i])
            out.append(-(inv0 * acc))
            ps.append(min(pr, ps[0] + min(acc.val_units(), pr)))
        return CertSeries(self.T, out, ps)

    def __pow__(self, e: int) -> "CertSeries":
        base = self if e >= 0 else self.inverse()
        e = abs(e)
        result = CertSeries.one(self.T, self.deg)
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def scale_variable(self, i: int) -> "CertSeries":
        """f(q^i t)."""
        T = self.T
        qi = T.q**i
        cs, ps = [], []
        for k, (c, pr) in enumerate(zip(self.coeffs, self.prec)):
            cs.append(c * pow(qi, k, T.P))
            ps.append(min(T.max_units, pr + i * k * T.a * (T.p - 1)))
        return CertSeries(T, cs, ps)

    def canonical(self) -> "CertSeries":
        return CertSeries(self.T, [c.reduce_units(pr) for c, pr in zip(self.coeffs, self.prec)], list(self.prec))

    def certified_val(self, k: int) -> Fraction:
        return Fraction(self.prec[k], self.T.p - 1)

    def known_valuation(self, k: int):
        """Exact valuation when it is below the certified precision, else None."""
        v = self.coeffs[k].val_units()
        if v < self.prec[k]:
            return Fraction(v, self.T.p - 1)
        return None

    def power_sums(self, M: int) -> list[tuple[TowerElem, int]]:
        """S_1..S_M with t L'/L = sum S_m t^m (no divisions needed)."""
        out: list[tuple[TowerElem, int]] = []
        cap = self.T.max_units
        if self.coeffs[0] != 1 or self.prec[0] < cap:
            raise ValueError("power sums need constant term exactly 1")
        for m in range(1, M + 1):
            acc = self.coeffs[m] * m
            pr = self.prec[m] + vp_int(m, self.T.p) * (self.T.p - 1) if m <= self.deg else 0
            for k in range(1, m):
                s, sp = out[k - 1]
                acc = acc - s * self.coeffs[m - k]
                pr = min(pr, sp + self.lower_val(m - k), min(s.val_units(), sp) + self.prec[m - k])
            out.append((acc, min(pr, cap)))
        return out

    def to_json(self, start: int = 0) -> list[dict]:
        can = self.canonical()
        out = []
        for k in range(start, self.deg + 1):
            out.append({
                "t_deg": k,
                "coeff": can.coeffs[k].coeffs,
                "certified_val": str(self.certified_val(k)),
            })
        return out


# --- Fredholm determinant ------------------------------------------------------------------

def traces_of_powers(A: TowerMatrix, M: int) -> list[TowerElem]:
    out = []
    P = A
    for m in range(1, M + 1):
        if m > 1:
            P = P @ A
        out.append(P.trace())
    return out


def det_from_traces(traces: Sequence[TowerElem], T: TowerParams) -> tuple[list[TowerElem], list[int]]:
    """Coefficients of det(1 - tA) from Tr(A^m) via Newton's identities.

    With traces exact mod p^N the t^s coefficient is exact mod p^(N - v_p(s!));
    the returned precisions are in pi-units.
    """
    p = T.p
    e = [T.one()]
    for s in range(1, len(traces) + 1):
        acc = T.zero()
        for i in range(1, s + 1):
            term = e[s - i] * traces[i - 1]
            acc = acc + (term if i % 2 == 1 else -term)
        v = vp_int(s, p)
        e.append(acc.divide_by_p(v) * pow(s // p**v, -1, T.P))
    coeffs = [x if s % 2 == 0 else -x for s, x in enumerate(e)]
    prec = [max(0, (T.N - vp_factorial(s, p)) * (p - 1)) for s in range(len(e))]
    return coeffs, prec


@dataclass
class FredholmResult:
    series: CertSeries
    W: Fraction
    W_next: Fraction
    basis_size: int
    floors: list[Fraction]


def fredholm_det(frob: FrobMatrix, t_deg: int, N: int) -> FredholmResult:
    """det(1 - t alpha) to order t^t_deg, certified to min(N, truncation floor) per coefficient.

    ``frob`` should be built at working precision N + v_p(t_deg!) or more.
    """
    Tw = frob.T
    T = get_tower(Tw.p, Tw.a, N)
    weights = frob.basis.weights
    floors = [precision.fredholm_floor(frob.b, frob.q, frob.W_next, weights, s, N) for s in range(t_deg + 1)]
    if t_deg >= 1 and floors[1] < N:
        target = precision.auto_cutoff_target(frob.b, frob.q, N)
        raise CertificationError(
            f"cutoff W={frob.W} certifies only ord >= {floors[1]} < N={N}; need next weight >= {target}",
            required_W=target,
        )
    traces = traces_of_powers(frob.matrix, t_deg)
    coeffs, prec = det_from_traces(traces, Tw)
    cs, ps = [], []
    for s in range(t_deg + 1):
        units = min(prec[s], math.floor(floors[s] * (T.p - 1)), T.max_units)
        cs.append(coeffs[s].change_precision(T))
        ps.append(units)
    return FredholmResult(CertSeries(T, cs, ps), frob.W, frob.W_next, len(frob.basis), floors)


def working_precision(N: int, t_deg: int, p: int) -> int:
    return N + vp_factorial(max(t_deg, 1), p) + 1


# --- exact-sum embedding -------------------------------------------------------------------

def zeta_image(T: TowerParams, kind: str = ARTIN_HASSE) -> TowerElem:
    """theta(1) = sum of the splitting coefficients, a primitive p-th root of unity."""
    lam = splitting_coefficients(kind, T).lam
    acc = T.zero()
    for x in lam:
        acc = acc + x
    return acc


def embed_cyc(c: CycInt, T: TowerParams, kind: str = ARTIN_HASSE) -> TowerElem:
    z = zeta_image(T, kind)
    acc = T.zero()
    power = T.one()
    for k in c.coeffs:
        acc = acc + power * int(k)
        power = power * z
    return acc


# --- reports ----------------------------------------------------------------------------

@dataclass
class OracleRecord:
    m: int
    residual_val: Fraction | float
    floor: Fraction

    @property
    def ok(self) -> bool:
        return self.residual_val >= self.floor

    def to_json(self) -> dict:
        return {"m": self.m,
                "residual_val": "inf" if self.residual_val == math.inf else str(self.residual_val),
                "floor": str(self.floor), "pass": self.ok}


@dataclass
class DegreeResult:
    degree: int | None
    status: str  # "exact", "ambiguous", "not_polynomial"
    detail: str = ""


def detect_degree(P: CertSeries) -> DegreeResult:
    """Smallest d with coefficients d+1..deg certified zero and c_d certified nonzero."""
    top = None
    for k in range(P.deg, -1, -1):
        if P.known_valuation(k) is not None:
            top = k
            break
    if top is None:
        return DegreeResult(None, "ambiguous", "no coefficient is provably nonzero")
    if top == P.deg:
        return DegreeResult(None, "not_polynomial",
                            f"coefficient of t^{top} is nonzero; t_deg too small or not a polynomial")
    return DegreeResult(top, "exact", f"t^{top} nonzero, t^{top + 1}..t^{P.deg} vanish to certified precision")


@dataclass
class SlopeResult:
    slopes: list
    ambiguous: list


def newton_slopes(P: CertSeries, degree: int | None = None) -> SlopeResult:
    """Slopes of the lower convex hull of (i, ord c_i), i <= degree.

    Coefficients whose valuation is not pinned below the certified precision
    are treated as points at height >= prec; if such a point could lie below the
    hull through the known points its index is flagged.
    """
    d = P.deg if degree is None else degree
    pts = [(i, P.known_valuation(i)) for i in range(d + 1)]
    known = [(i, v) for i, v in pts if v is not None]
    if not known:
        return SlopeResult([], list(range(d + 1)))
    hull: list = []
    for pt in known:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y2 - y1) / (x2 - x1)
        slopes.extend([s] * (x2 - x1))
    ambiguous = []
    for i, v in pts:
        if v is None:
            for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
                if x1 < i < x2:
                    line = y1 + Fraction(y2 - y1) * (i - x1) / (x2 - x1)
                    if P.certified_val(i) < line:
                        ambiguous.append(i)
    return SlopeResult(slopes, ambiguous)


@dataclass
class StratumResult:
    A: tuple[int, ...]
    dim: int
    poly: str
    method: str
    W: Fraction | None
    W_next: Fraction | None
    basis_size: int
    L: CertSeries

    def to_json(self) -> dict:
        return {"A": list(self.A), "torus_dim": self.dim, "poly": self.poly, "method": self.method,
                "W": None if self.W is None else str(self.W),
                "W_next": None if self.W_next is None else str(self.W_next),
                "basis_size": self.basis_size}


@dataclass
class LFunctionReport:
    space: SpaceSpec
    f: LaurentPoly
    p: int
    a: int
    N: int
    t_deg: int
    kind: str
    L: CertSeries
    P: CertSeries
    sign: int
    strata: list = field(default_factory=list)
    degree: DegreeResult | None = None
    expected_degree: int | None = None
    volume_status: str = "skipped"
    volume_reason: str = ""
    nondegeneracy: dict = field(default_factory=dict)
    commode: dict | None = None
    oracle: list = field(default_factory=list)
    slopes: SlopeResult | None = None

    @property
    def verified(self) -> bool:
        return all(r.ok for r in self.oracle) and self.volume_status != "fail"

    def to_json(self) -> dict:
        return {
            "space": {"n": self.space.n, "r": self.space.r, "label": self.space.label()},
            "poly": format_laurent(self.f),
            "p": self.p,
            "a": self.a,
            "N": self.N,
            "W": [s.to_json() for s in self.strata],
            "splitting": self.kind,
            "sign": self.sign,
            "L_series": self.L.to_json(),
            "P_series": self.P.to_json(),
            "degree": None if self.degree is None else self.degree.degree,
            "degree_detail": None if self.degree is None else {"status": self.degree.status,
                                                                "detail": self.degree.detail},
            "volume_check": {"expected": self.expected_degree, "status": self.volume_status,
                             "reason": self.volume_reason},
            "nondegeneracy": self.nondegeneracy,
            "commode": self.commode,
            "oracle": [r.to_json() for r in self.oracle],
            "slopes": None if self.slopes is None else {
                "values": [str(s) for s in self.slopes.slopes],
                "ambiguous": self.slopes.ambiguous},
            "verified": self.verified,
        }


# --- torus strata ---------------------------------------------------------------------------

def constant_torus_L(k: int, c, T: TowerParams, t_deg: int, kind: str = ARTIN_HASSE) -> CertSeries:
    """L(T^k, c) = prod_i (1 - zeta^tau q^i t)^(-(-1)^(k-i) C(k,i)), tau = Tr(c)."""
    code = c.code if hasattr(c, "code") else int(c) % T.p
    tau = T.field.trace(code) if code else 0
    z = zeta_image(T, kind) ** tau
    total = CertSeries.one(T, t_deg)
    for i in range(k + 1):
        lin = CertSeries.exact(T, [T.one(), -(z * T.q**i)], t_deg)
        total = total * (lin ** (-((-1) ** (k - i)) * math.comb(k, i)))
    return total


def _constant_of(f: LaurentPoly):
    if not f.terms:
        return 0
    return f.terms[(0,) * f.n]


def torus_stratum(f: LaurentPoly, T: TowerParams, t_deg: int, kind: str = ARTIN_HASSE,
                  W=None, A: tuple[int, ...] = ()) -> StratumResult:
    """L(T^n, f) from the Fredholm series, or in closed form when f is constant."""
    n = f.n
    if all(not any(e) for e in f.terms):
        L = constant_torus_L(n, _constant_of(f), T, t_deg, kind)
        return StratumResult(A, n, format_laurent(f), "closed form", None, None, 0, L)
    g = polytope.build_geometry(f.support(), n)
    b = precision.b_frobenius(T.p, T.q) if kind == ARTIN_HASSE else precision.b_dwork(T.p, T.q)
    if W is None:
        W, _ = precision.auto_cutoff(g, b, T.q, T.N)
    Nw = working_precision(T.N, t_deg, T.p)
    Tw = get_tower(T.p, T.a, Nw)
    F0 = build_F0(f, g, Tw, kind)
    frob = build_alpha_matrix(F0, W, Tw, kind)
    res = fredholm_det(frob, t_deg, T.N)
    D = res.series
    P = CertSeries.one(T, t_deg)
    for i in range(n + 1):
        P = P * (D.scale_variable(i) ** ((-1) ** i * math.comb(n, i)))
    L = P if n % 2 == 1 else P.inverse()
    return StratumResult(A, n, format_laurent(f), "fredholm", res.W, res.W_next, res.basis_size, L)


def l_function_mixed(space: SpaceSpec, f: LaurentPoly, N: int, t_deg: int, *,
                     kind: str = ARTIN_HASSE, W=None, oracle_m: int = 0, m_max: int = 2,
                     check_degree: bool = True) -> LFunctionReport:
    """L(T^r x A^(n-r), f) as the product of torus L-functions of the coordinate strata."""
    F = f.ring
    if F is None:
        raise ValueError("polynomial must have finite-field coefficients")
    n = space.n
    T = get_tower(F.p, F.a, N)
    affine = list(space.affine_axes)
    strata = []
    L = CertSeries.one(T, t_deg)
    for A in polytope.coordinate_subsets(affine):
        fA = specialize_zero(f, sorted(A))
        st = torus_stratum(fA, T, t_deg, kind, W if not A else None, tuple(sorted(A)))
        strata.append(st)
        L = L * st.L
    sign = 1 if n % 2 == 1 else -1
    P = L if sign == 1 else L.inverse()
    report = LFunctionReport(space, f, F.p, F.a, N, t_deg, kind, L, P, sign, strata)

    # degree law
    if check_degree:
        _degree_checks(report, f, space, m_max)
    if report.degree is None:
        report.degree = detect_degree(P)
    if report.degree.degree is not None:
        report.slopes = newton_slopes(P, report.degree.degree)

    # oracle
    if oracle_m:
        sums = [gfq.exp_sum(space, f, m) for m in range(1, oracle_m + 1)]
        report.oracle = verify_against_oracle(L, sums, T, kind)
    return report


def _degree_checks(report: LFunctionReport, f: LaurentPoly, space: SpaceSpec, m_max: int) -> None:
    n = space.n
    try:
        g = polytope.build_geometry(f.support(), n)
    except polytope.DegenerateGeometry:
        report.volume_reason = "polytope is a point"
        return
    if g.dim < n:
        report.volume_reason = f"dim of polytope is {g.dim} < {n}"
        return
    nd = gfq.is_nondegenerate(f, g, m_max)
    if nd.degenerate:
        report.nondegeneracy = {"status": "degenerate", "face": [list(x) for x in nd.face.lattice_points_of_support],
                                "point": list(nd.point), "m": nd.m, "modulus": list(nd.modulus)}
        report.volume_reason = "degenerate: degree check skipped"
        report.volume_status = "skipped"
        return
    report.nondegeneracy = {"status": "nondegenerate_up_to", "m_max": nd.m_max}
    affine = list(space.affine_axes)
    if affine:
        cm = polytope.is_commode(f, affine)
        report.commode = {"commode": cm.commode, "r_tilde": cm.r_tilde,
                          "rows": [{"A": list(A), "dim": d, "required": need} for A, d, need in cm.rows]}
        if not cm.commode:
            report.volume_reason = "not commode: degree check skipped"
            return
        expected = polytope.v_A(list(f.support()), affine, n)
    else:
        expected = polytope.normalized_volume(g)
    report.expected_degree = expected
    deg = detect_degree(report.P)
    report.degree = deg
    if deg.degree is None:
        report.volume_status = "inconclusive" if deg.status != "not_polynomial" else "fail"
        report.volume_reason = deg.detail
        if deg.status == "not_polynomial" and report.P.deg <= expected:
            report.volume_status = "inconclusive"
            report.volume_reason = f"t_deg={report.P.deg} must exceed the expected degree {expected}"
    elif deg.degree == expected:
        report.volume_status = "pass"
    else:
        report.volume_status = "fail"
        report.volume_reason = f"detected degree {deg.degree} != expected {expected}"


def l_function_torus(f: LaurentPoly, N: int, t_deg: int, **kw) -> LFunctionReport:
    return l_function_mixed(SpaceSpec(f.n, f.n), f, N, t_deg, **kw)


def verify_against_oracle(L: CertSeries, sums: Sequence[CycInt], T: TowerParams,
                          kind: str = ARTIN_HASSE) -> list[OracleRecord]:
    """Compare t L'/L = sum S_m t^m with exact sums embedded via zeta -> theta(1)."""
    M = min(len(sums), L.deg)
    ps = L.power_sums(M)
    out = []
    for m in range(1, M + 1):
        s, pr = ps[m - 1]
        diff = s - embed_cyc(sums[m - 1], T, kind)
        v = diff.val_units()
        val = math.inf if v >= T.max_units else Fraction(v, T.p - 1)
        out.append(OracleRecord(m, val, Fraction(pr, T.p - 1)))
    return out


def default_t_deg(expected_degree: int | None, oracle_m: int) -> int:
    base = oracle_m
    if expected_degree is not None:
        base = max(base, expected_degree + 1)
    return max(base, 1)
