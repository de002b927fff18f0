"""Dwork's series and operators on the cone, truncated by weight.

A series on the cone is a dict exponent -> TowerElem together with a weight
cutoff W (``math.inf`` when every coefficient that is nonzero mod p^N has been
kept) and a claimed decay ``ord(c_u) >= b w(u) + c``.

Operators are realized as matrices on weight-truncated monomial bases, with
rows indexed by outputs and columns by inputs, both sorted by (w(u), lex).
"""

from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import precision
from .gfq import GFElem
from .laurent import LaurentPoly
from .linalg import TowerMatrix, block
from .padic import (
    ARTIN_HASSE,
    DWORK_EXP,
    TowerElem,
    TowerParams,
    exp_coefficients,
    gamma_l,
    gamma_root,
    get_tower,
    splitting_coefficients,
    teichmuller_lift,
    vp_factorial,
)
from .polytope import NewtonGeometry, OutsideCone

Vec = tuple[int, ...]


class CutoffError(ValueError):
    """A coefficient was requested beyond the weight cutoff of a truncated series."""


class InsufficientCutoff(ValueError):
    def __init__(self, message: str, required):
        super().__init__(message)
        self.required = required


class DecayViolation(AssertionError):
    pass


@dataclass
class ConeSeries:
    geometry: NewtonGeometry
    T: TowerParams
    coeffs: dict
    W: Fraction | float = math.inf
    decay: tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
    label: str = ""

    def __post_init__(self):
        g = self.geometry
        clean = {}
        for u, c in self.coeffs.items():
            if c.is_zero():
                continue
            if not g.in_cone(u):
                raise OutsideCone(f"{self.label}: exponent {u} outside the cone")
            if self.W != math.inf and g.weight(u) > self.W:
                continue
            clean[u] = c
        self.coeffs = dict(sorted(clean.items(), key=lambda kv: (g.weight(kv[0]), kv[0])))

    def get(self, u: Sequence[int]) -> TowerElem:
        u = tuple(u)
        c = self.coeffs.get(u)
        if c is not None:
            return c
        if self.W != math.inf and self.geometry.in_cone(u) and self.geometry.weight(u) > self.W:
            raise CutoffError(f"{self.label}: weight of {u} exceeds cutoff {self.W}")
        return self.T.zero()

    def __len__(self) -> int:
        return len(self.coeffs)

    def max_weight(self) -> Fraction:
        return max((self.geometry.weight(u) for u in self.coeffs), default=Fraction(0))

    def restrict(self, W) -> "ConeSeries":
        g = self.geometry
        return ConeSeries(g, self.T, {u: c for u, c in self.coeffs.items() if g.weight(u) <= W},
                          Fraction(W), self.decay, self.label)

    def audit(self) -> list[tuple[Vec, Fraction | float, Fraction]]:
        """Stored coefficients violating ord >= b w(u) + c (ord past precision counts as inf)."""
        b, c = self.decay
        bad = []
        for u, x in self.coeffs.items():
            bound = b * self.geometry.weight(u) + c
            v = x.valuation()
            if v < bound:
                bad.append((u, v, bound))
        return bad

    def assert_decay(self) -> None:
        bad = self.audit()
        if bad:
            raise DecayViolation(f"{self.label}: {len(bad)} coefficients violate decay, first {bad[0]}")

    def min_normalized_valuation(self) -> Fraction | float:
        """min over stored u != 0 of ord(c_u) / w(u)."""
        best: Fraction | float = math.inf
        for u, x in self.coeffs.items():
            w = self.geometry.weight(u)
            if w == 0:
                continue
            v = x.valuation()
            if v != math.inf and v / w < best:
                best = v / w
        return best

    def __mul__(self, other: "ConeSeries") -> "ConeSeries":
        cap = self.T.max_units
        out: dict = {}
        for u, x in self.coeffs.items():
            vx = x.val_units()
            for v, y in other.coeffs.items():
                if vx + y.val_units() >= cap:
                    continue
                key = tuple(a + b for a, b in zip(u, v))
                prod = x * y
                out[key] = out[key] + prod if key in out else prod
        W = min(self.W, other.W)
        return ConeSeries(self.geometry, self.T, out, W, (Fraction(0), Fraction(0)), "product")

    def __sub__(self, other: "ConeSeries") -> "ConeSeries":
        out = dict(self.coeffs)
        for u, y in other.coeffs.items():
            out[u] = out[u] - y if u in out else -y
        return ConeSeries(self.geometry, self.T, out, min(self.W, other.W), (Fraction(0), Fraction(0)), "difference")


# --- Teichmueller lifted polynomial --------------------------------------------------------

def teichmuller_terms(f: LaurentPoly, T: TowerParams) -> list[tuple[Vec, TowerElem]]:
    """(w_j, a_hat_j) for the support of f."""
    out = []
    for e, c in f.terms.items():
        if isinstance(c, GFElem):
            out.append((e, teichmuller_lift(c, T)))
        else:
            out.append((e, teichmuller_lift(int(c) % T.p, T)))
    return out


def _product_of_rays(T: TowerParams, factors: Iterable[tuple[Vec, Sequence[TowerElem]]], n: int) -> dict:
    """prod over factors of sum_k c_k x^(k step), keeping every term nonzero mod p^N."""
    cap = T.max_units
    acc: dict = {(0,) * n: T.one()}
    for step, cs in factors:
        vals = [c.val_units() for c in cs]
        new: dict = {}
        for u, x in acc.items():
            vx = x.val_units()
            for k, c in enumerate(cs):
                if vx + vals[k] >= cap:
                    continue
                prod = x if k == 0 and c == 1 else x * c
                if prod.is_zero():
                    continue
                key = tuple(a + k * s for a, s in zip(u, step))
                new[key] = new[key] + prod if key in new else prod
        acc = {u: x for u, x in new.items() if not x.is_zero()}
    return acc


def build_F0(f: LaurentPoly, g: NewtonGeometry, T: TowerParams, kind: str = ARTIN_HASSE,
             W_F=math.inf) -> ConeSeries:
    """prod_j prod_{i<a} theta((a_hat_j x^{w_j})^{p^i}) for the chosen splitting function.

    With ``kind="DworkExp"`` this is G = exp(pi (f(x) - f(x^q))).
    """
    split = splitting_coefficients(kind, T)
    factors = []
    for w, ahat in teichmuller_terms(f, T):
        for i in range(T.a):
            pi_ = T.p**i
            step = tuple(pi_ * x for x in w)
            base = ahat ** pi_
            cs = []
            power = T.one()
            for lam in split.lam:
                cs.append(lam * power)
                power = power * base
            factors.append((step, cs))
    coeffs = _product_of_rays(T, factors, g.n)
    if kind == ARTIN_HASSE:
        b = precision.b_frobenius(T.p, T.q)
        label = "F0"
    else:
        b = precision.b_dwork(T.p, T.q)
        label = "G"
    return ConeSeries(g, T, coeffs, W_F, (b, Fraction(0)), label)


def build_H(f: LaurentPoly, g: NewtonGeometry, T: TowerParams, W=math.inf) -> ConeSeries:
    """H(x) = sum_j sum_l gamma_l (a_hat_j x^{w_j})^{p^l}."""
    out: dict = {}
    terms = teichmuller_terms(f, T)
    l = 0
    while True:
        # ord gamma_l >= p^(l+1)/(p-1) - (l+1); stop once that passes N
        if l > 0 and Fraction(T.p ** (l + 1), T.p - 1) - (l + 1) >= T.N:
            break
        gl = gamma_l(T, l)
        if gl.is_zero() and l > 0:
            break
        for w, ahat in terms:
            key = tuple(T.p**l * x for x in w)
            c = gl * ahat ** (T.p**l)
            out[key] = out[key] + c if key in out else c
        l += 1
    return ConeSeries(g, T, out, W, (Fraction(1, T.p - 1), Fraction(0)), "H")


def derivative_series(s: ConeSeries, i: int) -> ConeSeries:
    """E_i s = x_i d/dx_i s (i is 1-based)."""
    out = {u: c * u[i - 1] for u, c in s.coeffs.items() if u[i - 1]}
    return ConeSeries(s.geometry, s.T, out, s.W, s.decay, f"E{i}{s.label}")


def pi_f_hat(f: LaurentPoly, g: NewtonGeometry, T: TowerParams) -> ConeSeries:
    pi = T.pi()
    return ConeSeries(g, T, {w: pi * ahat for w, ahat in teichmuller_terms(f, T)}, math.inf,
                      (Fraction(0), Fraction(1, T.p - 1)), "pi*f")


def _exp_ray_coeffs(c: TowerElem, T: TowerParams) -> list[TowerElem]:
    """Coefficients c^k/k! of exp(c t), reduced to T, for all k that can be nonzero mod p^N.

    ``c`` lives in a tower of higher precision so the divisions by k! are exact.
    """
    v = c.valuation()
    if v == math.inf:
        return [T.one()]
    e = Fraction(1, T.p - 1)
    if v <= e:
        raise ValueError("exp(c t) needs ord c > 1/(p-1)")
    kmax = math.ceil((T.N - e) / (v - e)) + 1
    return [x.change_precision(T) for x in exp_coefficients(c, kmax)]


def _r_factor_args(f: LaurentPoly, Tw: TowerParams) -> list[tuple[Vec, TowerElem]]:
    """Exponents and arguments of the monomial exponentials whose product is exp(H - pi f)."""
    out = []
    terms = teichmuller_terms(f, Tw)
    gam = gamma_root(Tw)
    pi = Tw.pi()
    for w, ahat in terms:
        out.append((w, (gam - pi) * ahat))
    l = 1
    while Fraction(Tw.p ** (l + 1), Tw.p - 1) - (l + 1) < Tw.N:
        gl = gamma_l(Tw, l)
        for w, ahat in terms:
            out.append((tuple(Tw.p**l * x for x in w), gl * ahat ** (Tw.p**l)))
        l += 1
    return out


def build_R(f: LaurentPoly, g: NewtonGeometry, T: TowerParams, W=math.inf) -> tuple[ConeSeries, ConeSeries]:
    """R = exp(H - pi f_hat) and its inverse, as products of monomial exponentials."""
    e = Fraction(1, T.p - 1)
    # worst digit loss: v_p(k!) for the largest k needed, with ord(arg) >= 2/(p-1)
    kmax = math.ceil((T.N - e) / e) + 1
    Tw = get_tower(T.p, T.a, T.N + vp_factorial(kmax, T.p) + 1)
    args = _r_factor_args(f, Tw)
    fac_pos = [(w, _exp_ray_coeffs(c, T)) for w, c in args]
    fac_neg = [(w, _exp_ray_coeffs(-c, T)) for w, c in args]
    b0 = precision.b_zero(T.p)
    R = ConeSeries(g, T, _product_of_rays(T, fac_pos, g.n), W, (b0, Fraction(0)), "R")
    Rinv = ConeSeries(g, T, _product_of_rays(T, fac_neg, g.n), W, (b0, Fraction(0)), "R^-1")
    return R, Rinv


# --- bases and matrices -------------------------------------------------------------------

@dataclass(frozen=True)
class Basis:
    points: tuple[Vec, ...]
    weights: tuple[Fraction, ...]
    W: Fraction
    W_next: Fraction

    def __len__(self) -> int:
        return len(self.points)

    def index(self) -> dict:
        return {u: i for i, u in enumerate(self.points)}

    def prefix(self, W) -> int:
        """Number of leading basis elements of weight <= W."""
        return sum(1 for w in self.weights if w <= W)


def make_basis(g: NewtonGeometry, W) -> Basis:
    pts = g.lattice_points(W)
    return Basis(tuple(u for u, _ in pts), tuple(w for _, w in pts), Fraction(W), g.next_weight(W))


def required_frobenius_cutoff(g: NewtonGeometry, basis: Basis, q: int, b_F: Fraction, N: int) -> Fraction:
    """max over basis pairs with qv - u in the cone of w(qv - u), capped where b_F w reaches N."""
    best = Fraction(0)
    for v in basis.points:
        for u in basis.points:
            z = tuple(q * a - b for a, b in zip(v, u))
            if g.in_cone(z):
                w = g.weight(z)
                if w > best:
                    best = w
    return min(best, Fraction(N) / b_F)


def psi_matrix(S: ConeSeries, rows: Basis, cols: Basis, q: int) -> TowerMatrix:
    """psi_q o (multiplication by S): entry [v][u] = S[qv - u]."""
    g = S.geometry
    entries = {}
    for r, v in enumerate(rows.points):
        for c, u in enumerate(cols.points):
            z = tuple(q * a - b for a, b in zip(v, u))
            x = S.coeffs.get(z)
            if x is None:
                if S.W != math.inf and g.in_cone(z) and g.weight(z) > S.W:
                    raise CutoffError(f"{S.label} needed at {z} beyond cutoff {S.W}")
                continue
            entries[(r, c)] = x
    return TowerMatrix.from_entries(S.T, len(rows), len(cols), entries)


def mult_matrix(S: ConeSeries, rows: Basis, cols: Basis) -> TowerMatrix:
    """Multiplication by S: entry [v][u] = S[v - u]."""
    g = S.geometry
    entries = {}
    for r, v in enumerate(rows.points):
        for c, u in enumerate(cols.points):
            z = tuple(a - b for a, b in zip(v, u))
            x = S.coeffs.get(z)
            if x is None:
                if S.W != math.inf and g.in_cone(z) and g.weight(z) > S.W:
                    raise CutoffError(f"{S.label} needed at {z} beyond cutoff {S.W}")
                continue
            entries[(r, c)] = x
    return TowerMatrix.from_entries(S.T, len(rows), len(cols), entries)


def euler_matrix(i: int, rows: Basis, cols: Basis, T: TowerParams) -> TowerMatrix:
    """E_i: x^u -> u_i x^u."""
    idx = rows.index()
    entries = {}
    for c, u in enumerate(cols.points):
        r = idx.get(u)
        if r is not None and u[i - 1]:
            entries[(r, c)] = T.from_int(u[i - 1])
    return TowerMatrix.from_entries(T, len(rows), len(cols), entries)


def twisted_derivation_matrix(i: int, twist: ConeSeries, rows: Basis, cols: Basis) -> TowerMatrix:
    """E_i + (multiplication by E_i twist); twist = H gives D_hat_i, twist = pi f_hat gives D_i."""
    return euler_matrix(i, rows, cols, twist.T) + mult_matrix(derivative_series(twist, i), rows, cols)


@dataclass
class FrobMatrix:
    basis: Basis
    matrix: TowerMatrix
    b: Fraction
    q: int
    kind: str
    T: TowerParams

    @property
    def W(self) -> Fraction:
        return self.basis.W

    @property
    def W_next(self) -> Fraction:
        return self.basis.W_next

    def entry_bound_violations(self, g: NewtonGeometry) -> list:
        """Entries with ord < b (q w(v) - w(u)) (or nonzero where qv - u leaves the cone)."""
        bad = []
        ws = self.basis.weights
        for r, row in enumerate(self.matrix.to_rows()):
            v = self.basis.points[r]
            for c, x in enumerate(row):
                if x.is_zero():
                    continue
                u = self.basis.points[c]
                z = tuple(self.q * a - b for a, b in zip(v, u))
                if not g.in_cone(z):
                    bad.append((v, u, "outside cone"))
                    continue
                bound = self.b * (self.q * ws[r] - ws[c])
                if x.valuation() < bound:
                    bad.append((v, u, x.valuation(), bound))
        return bad

    # binary dump
    MAGIC = b"DWFM"
    VERSION = 1

    def dump(self, fh) -> None:
        header = {
            "p": self.T.p, "a": self.T.a, "N": self.T.N, "q": self.q, "kind": self.kind,
            "b": str(self.b), "W": str(self.W), "W_next": str(self.W_next),
            "basis": [list(u) for u in self.basis.points],
            "weights": [str(w) for w in self.basis.weights],
        }
        raw = json.dumps(header, sort_keys=True).encode()
        fh.write(self.MAGIC)
        fh.write(struct.pack("<HI", self.VERSION, len(raw)))
        fh.write(raw)
        width = (self.T.P.bit_length() + 7) // 8
        fh.write(struct.pack("<H", width))
        for m in self.matrix.coords:
            for x in m.entries():
                fh.write(int(x).to_bytes(width, "little"))

    def dumps(self) -> bytes:
        buf = io.BytesIO()
        self.dump(buf)
        return buf.getvalue()

    @classmethod
    def load(cls, fh) -> "FrobMatrix":
        if fh.read(4) != cls.MAGIC:
            raise ValueError("not a Frobenius matrix dump")
        version, hlen = struct.unpack("<HI", fh.read(6))
        if version != cls.VERSION:
            raise ValueError(f"unsupported dump version {version}")
        header = json.loads(fh.read(hlen))
        (width,) = struct.unpack("<H", fh.read(2))
        T = get_tower(header["p"], header["a"], header["N"])
        pts = tuple(tuple(u) for u in header["basis"])
        basis = Basis(pts, tuple(Fraction(w) for w in header["weights"]),
                      Fraction(header["W"]), Fraction(header["W_next"]))
        n = len(pts)
        entries = {}
        flat = []
        for _ in range(T.d):
            flat.append([int.from_bytes(fh.read(width), "little") for _ in range(n * n)])
        for pos in range(n * n):
            coords = tuple(f[pos] for f in flat)
            if any(coords):
                entries[divmod(pos, n)] = TowerElem(T, coords)
        mat = TowerMatrix.from_entries(T, n, n, entries)
        return cls(basis, mat, Fraction(header["b"]), header["q"], header["kind"], T)

    @classmethod
    def loads(cls, data: bytes) -> "FrobMatrix":
        return cls.load(io.BytesIO(data))


def build_alpha_matrix(F0: ConeSeries, W, T: TowerParams, kind: str = ARTIN_HASSE,
                       basis: Basis | None = None) -> FrobMatrix:
    """alpha = psi_q o F0 on the basis of weight <= W."""
    g = F0.geometry
    basis = basis or make_basis(g, W)
    b = F0.decay[0]
    need = required_frobenius_cutoff(g, basis, T.q, b, T.N)
    if F0.W != math.inf and F0.W < need:
        raise InsufficientCutoff(f"F0 truncated at weight {F0.W}, need {need}", need)
    mat = psi_matrix(F0, basis, basis, T.q)
    return FrobMatrix(basis, mat, b, T.q, kind, T)


def frobenius_matrix(f: LaurentPoly, g: NewtonGeometry, T: TowerParams, W,
                     kind: str = ARTIN_HASSE) -> FrobMatrix:
    return build_alpha_matrix(build_F0(f, g, T, kind), W, T, kind)


# --- operator identities -------------------------------------------------------------------

@dataclass
class Residual:
    name: str
    val: Fraction | float
    floor: Fraction

    @property
    def ok(self) -> bool:
        return self.val >= self.floor

    def to_json(self) -> dict:
        return {"name": self.name, "residual_val": "inf" if self.val == math.inf else str(self.val),
                "floor": str(self.floor), "pass": self.ok}


def _residual_val(M: TowerMatrix, ncols: int) -> Fraction | float:
    """Smallest entry valuation in the first ``ncols`` columns."""
    sub = M.submatrix(range(M.nrows), range(ncols))
    u = sub.min_val_units()
    return math.inf if u >= M.T.max_units else Fraction(u, M.T.p - 1)


class OperatorSuite:
    """All truncated operators for one polynomial, tower and cutoff W."""

    def __init__(self, f: LaurentPoly, g: NewtonGeometry, T: TowerParams, W):
        self.f, self.g, self.T = f, g, T
        self.basis = make_basis(g, W)
        self.W_safe = precision.safe_weight(self.basis.weights, self.basis.W)
        self.k_safe = self.basis.prefix(self.W_safe)
        self._cache: dict = {}

    def _get(self, key, fn: Callable):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def H(self) -> ConeSeries:
        return self._get("H", lambda: build_H(self.f, self.g, self.T))

    @property
    def F0(self) -> ConeSeries:
        return self._get("F0", lambda: build_F0(self.f, self.g, self.T, ARTIN_HASSE))

    @property
    def G(self) -> ConeSeries:
        return self._get("G", lambda: build_F0(self.f, self.g, self.T, DWORK_EXP))

    @property
    def R_pair(self) -> tuple[ConeSeries, ConeSeries]:
        return self._get("R", lambda: build_R(self.f, self.g, self.T))

    @property
    def pif(self) -> ConeSeries:
        return self._get("pif", lambda: pi_f_hat(self.f, self.g, self.T))

    def alpha(self) -> TowerMatrix:
        return self._get("alpha", lambda: psi_matrix(self.F0, self.basis, self.basis, self.T.q))

    def alpha1(self) -> TowerMatrix:
        return self._get("alpha1", lambda: psi_matrix(self.G, self.basis, self.basis, self.T.q))

    def D_hat(self, i: int, rows: Basis | None = None, cols: Basis | None = None) -> TowerMatrix:
        rows, cols = rows or self.basis, cols or self.basis
        return twisted_derivation_matrix(i, self.H, rows, cols)

    def D(self, i: int, rows: Basis | None = None, cols: Basis | None = None) -> TowerMatrix:
        rows, cols = rows or self.basis, cols or self.basis
        return twisted_derivation_matrix(i, self.pif, rows, cols)

    def _b_F(self) -> Fraction:
        return precision.b_frobenius(self.T.p, self.T.q)

    def chain_map_residual(self, i: int) -> Residual:
        A = self.alpha()
        Dh = self.D_hat(i)
        res = A @ Dh - (Dh @ A).scale(self.T.q)
        floor = precision.chain_map_floor(self.T.p, self.T.a, self.T.N, self._b_F(),
                                          self.basis.W, self.basis.W_next, self.W_safe)
        return Residual(f"alpha D_hat_{i} - q D_hat_{i} alpha", _residual_val(res, self.k_safe),
                        precision.quantize(floor, self.T.p))

    def conjugation_residual(self) -> Residual:
        R, Rinv = self.R_pair
        B = self.basis
        res = self.alpha1() - mult_matrix(R, B, B) @ self.alpha() @ mult_matrix(Rinv, B, B)
        floor = precision.conjugation_floor(self.T.p, self.T.a, self.T.N, self._b_F(),
                                            B.W, B.W_next, self.W_safe)
        return Residual("alpha_1 - R alpha R^-1", _residual_val(res, self.k_safe),
                        precision.quantize(floor, self.T.p))

    def mid_basis(self) -> Basis:
        """Intermediate basis for R D_hat R^-1, wide enough that E_i H cannot reach past it below p^N."""
        return self._get("mid", lambda: make_basis(self.g, self.basis.W + (self.T.p - 1) * self.T.N))

    def derivation_conjugation_residual(self, i: int) -> Residual:
        R, Rinv = self.R_pair
        B, Mid = self.basis, self.mid_basis()
        rhs = mult_matrix(R, B, Mid) @ self.D_hat(i, Mid, B) @ mult_matrix(Rinv, B, B)
        res = self.D(i) - rhs
        floor = precision.derivation_conjugation_floor(self.T.p, self.T.N, B.W, B.W_next, self.W_safe,
                                                       Mid.W, Mid.W_next)
        return Residual(f"D_{i} - R D_hat_{i} R^-1", _residual_val(res, self.k_safe),
                        precision.quantize(floor, self.T.p))

    def commutator_residual(self, i: int, j: int, twist: str = "hat") -> Residual:
        op = self.D_hat if twist == "hat" else self.D
        Di, Dj = op(i), op(j)
        res = Di @ Dj - Dj @ Di
        if twist == "hat":
            floor = precision.commutator_floor(self.T.p, self.T.N, self.basis.W_next, self.W_safe)
        else:
            top = max((self.g.weight(w) for w in self.g.support), default=Fraction(0))
            floor = precision.pi_commutator_floor(self.T.N, self.basis.W, self.W_safe, top)
        return Residual(f"[D{'_hat' if twist == 'hat' else ''}_{i}, D{'_hat' if twist == 'hat' else ''}_{j}]",
                        _residual_val(res, self.k_safe), precision.quantize(floor, self.T.p))

    def koszul_boundaries(self, twist: str = "hat") -> list[TowerMatrix]:
        return koszul_boundaries([self.D_hat(i) if twist == "hat" else self.D(i)
                                  for i in range(1, self.g.n + 1)], self.T, len(self.basis))

    def koszul_residuals(self, twist: str = "hat") -> list[Residual]:
        """d o d on the safe sub-basis blocks, for consecutive boundaries."""
        bds = self.koszul_boundaries(twist)
        n, m = self.g.n, len(self.basis)
        out = []
        for k in range(2, n + 1):
            prod = bds[k - 2] @ bds[k - 1]
            safe_cols = [blk * m + c for blk in range(math.comb(n, k)) for c in range(self.k_safe)]
            sub = prod.submatrix(range(prod.nrows), safe_cols)
            u = sub.min_val_units()
            val = math.inf if u >= self.T.max_units else Fraction(u, self.T.p - 1)
            floor = precision.commutator_floor(self.T.p, self.T.N, self.basis.W_next, self.W_safe)
            out.append(Residual(f"d_{k - 1} d_{k}", val, precision.quantize(floor, self.T.p)))
        return out

    def inverse_pair_residual(self) -> Residual:
        R, Rinv = self.R_pair
        W = self.basis.W
        prod = R.restrict(W) * Rinv.restrict(W)
        worst: Fraction | float = math.inf
        one = self.T.one()
        for u, _ in self.g.lattice_points(W):
            x = prod.coeffs.get(u, self.T.zero())
            if not any(u):
                x = x - one
            v = x.valuation()
            if v < worst:
                worst = v
        floor = precision.inverse_pair_floor(self.T.p, self.T.N, self.basis.W_next)
        return Residual("R R^-1 - 1", worst, precision.quantize(floor, self.T.p))


def koszul_boundaries(ops: Sequence[TowerMatrix], T: TowerParams, m: int) -> list[TowerMatrix]:
    """Boundaries d_k: K_k -> K_{k-1} of the Koszul complex on commuting operators.

    K_k has one copy of the truncated space per k-subset I of {1..n}, ordered
    lexicographically, and d(s e_I) = sum_t (-1)^(t-1) D_{i_t} s e_{I - i_t}.
    """
    import itertools

    n = len(ops)
    subsets = [list(itertools.combinations(range(n), k)) for k in range(n + 1)]
    out = []
    for k in range(1, n + 1):
        src, dst = subsets[k], subsets[k - 1]
        dst_idx = {I: r for r, I in enumerate(dst)}
        blocks: list[list[TowerMatrix | None]] = [[None] * len(src) for _ in dst]
        for c, I in enumerate(src):
            for t, i in enumerate(I):
                J = I[:t] + I[t + 1:]
                sign = 1 if t % 2 == 0 else -1
                blocks[dst_idx[J]][c] = ops[i] if sign == 1 else -ops[i]
        out.append(block(T, blocks, [m] * len(dst), [m] * len(src)))
    return out


def unit_block_invertible(frob: FrobMatrix) -> bool:
    """Whether the block of entries on weight-0 rows/cols is invertible mod p.

    Exploratory only: the finite-truncation shadow of bijectivity on homology.
    """
    k = frob.basis.prefix(Fraction(0))
    sub = frob.matrix.submatrix(range(k), range(k))
    rows = [[x.residue() for x in row] for row in sub.to_rows()]
    F = frob.T.field
    # Gaussian elimination over F_q on codes
    n = len(rows)
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col]), None)
        if piv is None:
            return False
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = F.inv(rows[col][col])
        for r in range(col + 1, n):
            if rows[r][col]:
                fac = F.mul(rows[r][col], inv)
                rows[r] = [F.sub(x, F.mul(fac, y)) for x, y in zip(rows[r], rows[col])]
    return True
