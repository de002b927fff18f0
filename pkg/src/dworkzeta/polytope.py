"""Exact lattice and convex geometry of Newton polytopes.

The polytope of a support set is conv(support + {0}).  Facets are found by
brute force over point subsets with exact integer arithmetic, which is plenty
for the handful of exponents that appear in practice.

Facets are stored as primitive integer normals ``L`` with integer offset ``c``
so that the polytope is ``{x in span : L.x <= c}``; ``c > 0`` exactly when the
facet misses the origin.  The weight of ``u`` in the cone is then
``max(0, max_{c>0} L.u / c)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Vec = tuple[int, ...]


class DegenerateGeometry(ValueError):
    pass


class OutsideCone(ValueError):
    pass


class LowerDimensional(ValueError):
    def __init__(self, dim: int, n: int):
        super().__init__(f"polytope has dimension {dim} < {n}")
        self.dim = dim


class NoDecomposition(ArithmeticError):
    pass


# --- exact linear algebra ---------------------------------------------------------

def _rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    mat = [[Fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    if not mat:
        return mat, pivots
    ncols = len(mat[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                fac = mat[i][c]
                mat[i] = [x - fac * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(_rref(rows)[1])


def _det(mat: list[list[int]]) -> int:
    """Exact integer determinant (Bareiss)."""
    k = len(mat)
    if k == 0:
        return 1
    m = [list(r) for r in mat]
    sign = 1
    prev = 1
    for i in range(k - 1):
        if m[i][i] == 0:
            swap = next((j for j in range(i + 1, k) if m[j][i] != 0), None)
            if swap is None:
                return 0
            m[i], m[swap] = m[swap], m[i]
            sign = -sign
        for j in range(i + 1, k):
            for l in range(i + 1, k):
                m[j][l] = (m[j][l] * m[i][i] - m[j][i] * m[i][l]) // prev
        prev = m[i][i]
    return sign * m[k - 1][k - 1]


def _normal(vectors: list[Vec], k: int) -> Vec:
    """Generalized cross product of k-1 vectors in Z^k."""
    out = []
    for i in range(k):
        minor = [[v[j] for j in range(k) if j != i] for v in vectors]
        out.append((-1) ** i * _det(minor))
    return tuple(out)


def _primitive(v: Sequence[int]) -> Vec:
    g = 0
    for x in v:
        g = math.gcd(g, int(x))
    return tuple(int(x) // g for x in v) if g else tuple(int(x) for x in v)


def _nullspace_int(rows: Sequence[Sequence[int]], ncols: int) -> list[Vec]:
    red, pivots = _rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        vec = [Fraction(0)] * ncols
        vec[fcol] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -red[r][fcol]
        den = 1
        for x in vec:
            den = den * x.denominator // math.gcd(den, x.denominator)
        basis.append(_primitive([int(x * den) for x in vec]))
    return basis


def _solve_exact(columns: list[Vec], target: Vec) -> list[Fraction] | None:
    """Solve sum r_j columns_j = target for linearly independent columns."""
    n = len(target)
    rows = [[Fraction(columns[j][i]) for j in range(len(columns))] + [Fraction(target[i])]
            for i in range(n)]
    red, pivots = _rref(rows)
    if len(columns) in pivots:
        return None
    if len(pivots) < len(columns):
        return None
    sol = [Fraction(0)] * len(columns)
    for r, pc in enumerate(pivots):
        sol[pc] = red[r][-1]
    return sol


# --- geometry ----------------------------------------------------------------------

@dataclass(frozen=True)
class Facet:
    normal: Vec
    offset: int

    @property
    def through_origin(self) -> bool:
        return self.offset == 0

    def inequality(self) -> tuple[tuple[Fraction, ...], int]:
        """(l, rhs) with the polytope on the side l.x <= rhs and rhs in {0, 1}."""
        if self.offset == 0:
            return tuple(Fraction(x) for x in self.normal), 0
        return tuple(Fraction(x, self.offset) for x in self.normal), 1


@dataclass(frozen=True)
class FaceDescriptor:
    dim: int
    active_facets: tuple[int, ...]
    lattice_points_of_support: tuple[Vec, ...]
    points: tuple[Vec, ...] = field(default=(), compare=False, repr=False)

    def contains_origin(self) -> bool:
        return any(not any(p) for p in self.points)


class NewtonGeometry:
    """Newton polytope of a support set together with its cone and weight function."""

    def __init__(self, support: Iterable[Sequence[int]], n: int | None = None):
        supp = sorted(set(tuple(int(x) for x in e) for e in support))
        if n is None:
            if not supp:
                raise DegenerateGeometry("empty support")
            n = len(supp[0])
        self.n = n
        self.support: tuple[Vec, ...] = tuple(supp)
        zero = (0,) * n
        self.points: tuple[Vec, ...] = tuple(sorted(set(supp) | {zero}))
        red, pivots = _rref(self.points) if n else ([], [])
        self.dim = len(pivots)
        if self.dim == 0:
            raise DegenerateGeometry("support spans dimension 0")
        self.pivots = tuple(pivots)
        self.kernel = _nullspace_int(self.points, n)
        self._compute_facets()
        self._compute_faces()

    # facets
    def _compute_facets(self) -> None:
        k, P = self.dim, self.pivots
        proj = [tuple(p[c] for c in P) for p in self.points]
        found: dict[tuple[Vec, int], None] = {}
        for subset in itertools.combinations(range(len(proj)), k):
            base = proj[subset[0]]
            diffs = [tuple(a - b for a, b in zip(proj[j], base)) for j in subset[1:]]
            nv = _normal(diffs, k)
            if not any(nv):
                continue
            c = sum(a * b for a, b in zip(nv, base))
            vals = [sum(a * b for a, b in zip(nv, q)) for q in proj]
            if all(v <= c for v in vals):
                pass
            elif all(v >= c for v in vals):
                nv = tuple(-x for x in nv)
                c = -c
            else:
                continue
            if all(sum(a * b for a, b in zip(nv, q)) == c for q in proj):
                continue
            g = 0
            for x in nv:
                g = math.gcd(g, x)
            nv = tuple(x // g for x in nv)
            c //= g
            full = [0] * self.n
            for idx, col in enumerate(P):
                full[col] = nv[idx]
            found[(tuple(full), c)] = None
        self.facets: tuple[Facet, ...] = tuple(
            Facet(nv, c) for nv, c in sorted(found, key=lambda t: (t[1] == 0, t[0], t[1]))
        )
        self._outer = [f for f in self.facets if f.offset > 0]
        self._origin_facets = [f for f in self.facets if f.offset == 0]
        D = 1
        for f in self._outer:
            D = D * f.offset // math.gcd(D, f.offset)
        self.denominator_bound = D

    def _on(self, facet: Facet, p: Vec) -> bool:
        return sum(a * b for a, b in zip(facet.normal, p)) == facet.offset

    def _compute_faces(self) -> None:
        facet_sets = [frozenset(i for i, p in enumerate(self.points) if self._on(f, p))
                      for f in self.facets]
        seen = set(facet_sets)
        frontier = list(seen)
        while frontier:
            new = []
            for s in frontier:
                for t in facet_sets:
                    inter = s & t
                    if inter and inter not in seen:
                        seen.add(inter)
                        new.append(inter)
            frontier = new
        faces = []
        for s in seen:
            active = tuple(i for i, fs in enumerate(facet_sets) if s <= fs)
            pts = tuple(self.points[i] for i in sorted(s))
            faces.append(FaceDescriptor(
                dim=_affine_dim(pts),
                active_facets=active,
                lattice_points_of_support=tuple(p for p in pts if p in set(self.support)),
                points=pts,
            ))
        faces.sort(key=lambda f: (f.dim, f.active_facets))
        whole = FaceDescriptor(self.dim, (), self.support, self.points)
        self.faces: tuple[FaceDescriptor, ...] = tuple(faces) + (whole,)

    @cached_property
    def vertices(self) -> tuple[Vec, ...]:
        return tuple(sorted(f.points[0] for f in self.faces if f.dim == 0))

    @property
    def cone_rays(self) -> tuple[Vec, ...]:
        return self.support

    @cached_property
    def M(self) -> int:
        """Least M with M*w(u) integral on the cone's lattice points."""
        S = semigroup_generators(self)
        m = 1
        for s in S:
            d = self.weight(s).denominator
            m = m * d // math.gcd(m, d)
        return m

    # cone and weight
    def in_span(self, u: Sequence[int]) -> bool:
        return all(sum(a * b for a, b in zip(k, u)) == 0 for k in self.kernel)

    def in_cone(self, u: Sequence[int]) -> bool:
        if len(u) != self.n or not self.in_span(u):
            return False
        return all(sum(a * b for a, b in zip(f.normal, u)) <= 0 for f in self._origin_facets)

    def weight(self, u: Sequence[int]) -> Fraction:
        u = tuple(int(x) for x in u)
        if not self.in_cone(u):
            raise OutsideCone(f"{u} is not in the cone of the polytope")
        best = Fraction(0)
        for f in self._outer:
            v = Fraction(sum(a * b for a, b in zip(f.normal, u)), f.offset)
            if v > best:
                best = v
        return best

    def weights_scaled(self, pts: np.ndarray) -> np.ndarray:
        """denominator_bound * w(u) for an (N, n) integer array of cone points."""
        D = self.denominator_bound
        if not self._outer:
            return np.zeros(len(pts), dtype=np.int64)
        normals = np.array([[x * (D // f.offset) for x in f.normal] for f in self._outer],
                           dtype=np.int64)
        vals = pts @ normals.T
        return np.maximum(vals.max(axis=1), 0)

    def _box_points(self, W) -> np.ndarray:
        W = Fraction(W)
        lo = [math.floor(W * min(v[i] for v in self.points)) for i in range(self.n)]
        hi = [math.ceil(W * max(v[i] for v in self.points)) for i in range(self.n)]
        axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        mask = np.ones(len(pts), dtype=bool)
        for k in self.kernel:
            mask &= (pts @ np.array(k, dtype=np.int64)) == 0
        for f in self._origin_facets:
            mask &= (pts @ np.array(f.normal, dtype=np.int64)) <= 0
        return pts[mask]

    def lattice_points(self, W) -> list[tuple[Vec, Fraction]]:
        """Cone lattice points of weight <= W, sorted by (weight, lex)."""
        W = Fraction(W)
        pts = self._box_points(W)
        D = self.denominator_bound
        ws = self.weights_scaled(pts)
        keep = ws <= W * D
        pts, ws = pts[keep], ws[keep]
        order = sorted(range(len(pts)), key=lambda i: (int(ws[i]), tuple(int(x) for x in pts[i])))
        return [(tuple(int(x) for x in pts[i]), Fraction(int(ws[i]), D)) for i in order]

    def next_weight(self, W) -> Fraction:
        """Smallest weight value of a cone lattice point strictly above W."""
        W = Fraction(W)
        span = Fraction(1)
        while True:
            cands = [w for _, w in self.lattice_points(W + span) if w > W]
            if cands:
                return min(cands)
            span *= 2

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dim": self.dim,
            "vertices": [list(v) for v in self.vertices],
            "facets": [
                {"normal": [str(x) for x in f.inequality()[0]], "rhs": f.inequality()[1]}
                for f in self.facets
            ],
            "M": self.M,
        }


def _affine_dim(pts: Sequence[Vec]) -> int:
    if len(pts) <= 1:
        return 0
    base = pts[0]
    return rank([tuple(a - b for a, b in zip(p, base)) for p in pts[1:]])


def build_geometry(support: Iterable[Sequence[int]], n: int | None = None) -> NewtonGeometry:
    return NewtonGeometry(support, n)


def weight(g: NewtonGeometry, u: Sequence[int]) -> Fraction:
    return g.weight(u)


def faces_not_containing_origin(g: NewtonGeometry) -> list[FaceDescriptor]:
    return [f for f in g.faces if not f.contains_origin()]


def lattice_points(g: NewtonGeometry, W) -> list[tuple[Vec, Fraction]]:
    return g.lattice_points(W)


# --- volumes -------------------------------------------------------------------------

def _triangulate(g: NewtonGeometry, face: FaceDescriptor) -> list[list[Vec]]:
    if face.dim == 0:
        return [[face.points[0]]]
    fset = set(face.points)
    verts = sorted(v for v in g.vertices if v in fset)
    apex = verts[0]
    out = []
    for sub in g.faces:
        if sub.dim == face.dim - 1 and set(sub.points) < fset and apex not in sub.points:
            for simplex in _triangulate(g, sub):
                out.append(simplex + [apex])
    return out


def normalized_volume(g: NewtonGeometry) -> int:
    """n! times the Euclidean volume of the polytope."""
    if g.dim < g.n:
        raise LowerDimensional(g.dim, g.n)
    total = 0
    for simplex in _triangulate(g, g.faces[-1]):
        base = simplex[0]
        total += abs(_det([[a - b for a, b in zip(v, base)] for v in simplex[1:]]))
    return total


def _restrict_support(support: Iterable[Vec], A: Iterable[int], n: int) -> list[Vec]:
    A = set(A)
    keep = [j for j in range(n) if j + 1 not in A]
    out = []
    for e in support:
        if any(e[i - 1] < 0 for i in A):
            raise ValueError(f"exponent {e} has a pole in a coordinate of {sorted(A)}")
        if all(e[i - 1] == 0 for i in A):
            out.append(tuple(e[j] for j in keep))
    return out


def _subset_volume(support: list[Vec], dim: int) -> Fraction:
    if dim == 0:
        # Lebesgue measure on R^0 is the counting measure and the slice is {0}.
        return Fraction(1)
    supp = [e for e in support if any(e)]
    if not supp:
        return Fraction(0)
    g = NewtonGeometry(supp, dim)
    if g.dim < dim:
        return Fraction(0)
    return Fraction(normalized_volume(g), math.factorial(dim))


def coordinate_subsets(S: Sequence[int]) -> list[frozenset[int]]:
    S = sorted(S)
    return [frozenset(c) for k in range(len(S) + 1) for c in itertools.combinations(S, k)]


def restricted_volumes(support_or_geometry, S_r: Iterable[int], n: int | None = None) -> dict[frozenset, Fraction]:
    """Volume of the polytope sliced by {x_i = 0 : i in A}, for every A inside S_r."""
    if isinstance(support_or_geometry, NewtonGeometry):
        support, n = list(support_or_geometry.support), support_or_geometry.n
    else:
        support = [tuple(e) for e in support_or_geometry]
        if n is None:
            n = len(support[0])
    return {A: _subset_volume(_restrict_support(support, A, n), n - len(A)) for A in coordinate_subsets(list(S_r))}


def v_A(support_or_geometry, A: Iterable[int], n: int | None = None) -> int:
    """sum over B in A of (-1)^|B| (n-|B|)! V_B."""
    if isinstance(support_or_geometry, NewtonGeometry):
        n = support_or_geometry.n
    elif n is None:
        n = len(next(iter(support_or_geometry)))
    vols = restricted_volumes(support_or_geometry, A, n)
    total = Fraction(0)
    for B, vol in vols.items():
        total += (-1) ** len(B) * math.factorial(n - len(B)) * vol
    if total.denominator != 1:
        raise ArithmeticError(f"v_A is not an integer: {total}")
    return int(total)


@dataclass(frozen=True)
class CommodeReport:
    commode: bool
    r_tilde: int
    rows: tuple[tuple[tuple[int, ...], int, int], ...]  # (A, dim of slice polytope, required dim)

    def __bool__(self) -> bool:
        return self.commode


def _support_dim(support: list[Vec]) -> int:
    supp = [e for e in support if any(e)]
    if not supp:
        return 0
    return rank(supp)


def is_commode(support_or_poly, S_r: Iterable[int], n: int | None = None) -> CommodeReport:
    """Check dim of the polytope of f_A equals dim(f_{S_r}) + |S_r - A| for all A in S_r."""
    if hasattr(support_or_poly, "terms"):
        support, n = list(support_or_poly.terms), support_or_poly.n
    elif isinstance(support_or_poly, NewtonGeometry):
        support, n = list(support_or_poly.support), support_or_poly.n
    else:
        support = [tuple(e) for e in support_or_poly]
        if n is None:
            n = len(support[0])
    S_r = sorted(set(S_r))
    r_tilde = _support_dim(_restrict_support(support, S_r, n))
    rows = []
    ok = True
    for A in coordinate_subsets(S_r):
        d = _support_dim(_restrict_support(support, A, n))
        need = r_tilde + len(S_r) - len(A)
        rows.append((tuple(sorted(A)), d, need))
        ok &= d == need
    return CommodeReport(ok, r_tilde, tuple(rows))


# --- the semigroup set and its combinatorics --------------------------------------------

def semigroup_generators(g_or_gens) -> list[Vec]:
    """Lattice points of the zonotope sum_j [0,1] w_j, sorted lexicographically."""
    if isinstance(g_or_gens, NewtonGeometry):
        gens = list(g_or_gens.support)
    else:
        gens = [tuple(int(x) for x in w) for w in g_or_gens]
    gens = [w for w in gens if any(w)]
    if not gens:
        return []
    n = len(gens[0])
    red, P = _rref(gens)
    k = len(P)
    kernel = _nullspace_int(gens, n)
    proj = [tuple(w[c] for c in P) for w in gens]
    ineqs = []
    for sub in itertools.combinations(range(len(gens)), k - 1):
        nv = _normal([proj[j] for j in sub], k)
        if not any(nv):
            continue
        nv = _primitive(nv)
        dots = [sum(a * b for a, b in zip(nv, w)) for w in proj]
        ineqs.append((nv, sum(min(0, d) for d in dots), sum(max(0, d) for d in dots)))
    lo = [sum(min(0, w[i]) for w in gens) for i in range(n)]
    hi = [sum(max(0, w[i]) for w in gens) for i in range(n)]
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gr.ravel() for gr in grids], axis=1)
    mask = np.ones(len(pts), dtype=bool)
    for kv in kernel:
        mask &= (pts @ np.array(kv, dtype=np.int64)) == 0
    pp = pts[:, list(P)]
    for nv, a, b in ineqs:
        vals = pp @ np.array(nv, dtype=np.int64)
        mask &= (vals >= a) & (vals <= b)
    return sorted(tuple(int(x) for x in p) for p in pts[mask])


def dickson_minimal(points: Iterable[Sequence[int]]) -> list[Vec]:
    """Minimal elements under coordinatewise order, sorted lexicographically."""
    pts = sorted(set(tuple(int(x) for x in p) for p in points), key=lambda p: (sum(p), p))
    minimal: list[Vec] = []
    for p in pts:
        if not any(all(a <= b for a, b in zip(m, p)) for m in minimal):
            minimal.append(p)
    return sorted(minimal)


def _compositions(L: int, D: int):
    """All a in Z_{>=0}^L with |a| <= D."""
    for total in range(D + 1):
        for bars in itertools.combinations(range(total + L - 1), L - 1):
            prev = -1
            a = []
            for b in bars:
                a.append(b - prev - 1)
                prev = b
            a.append(total + L - 1 - prev - 1)
            yield tuple(a)


@dataclass
class Binomial:
    """y^a - y^b."""

    a: Vec
    b: Vec

    def degree(self) -> int:
        return max(sum(self.a), sum(self.b))

    def __str__(self) -> str:
        def mono(e):
            parts = [f"y{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k]
            return "*".join(parts) or "1"
        return f"{mono(self.a)} - {mono(self.b)}"


@dataclass
class ToricRelations:
    generators: list[Vec]
    relations: list[Binomial]
    basis_pairs: list[tuple[Vec, Vec]]
    pairs_checked: int
    max_cofactor_excess: int  # max over pairs of (cofactor degree - max(|a|,|b|)); <= 0 when the bound holds

    @property
    def degree_bound_holds(self) -> bool:
        return self.max_cofactor_excess <= 0


def _poly_add(acc: dict, mono: Vec, coeff: int) -> None:
    acc[mono] = acc.get(mono, 0) + coeff
    if acc[mono] == 0:
        del acc[mono]


def _rewrite(a: Vec, b: Vec, basis: list[tuple[Vec, Vec]]) -> dict[int, dict]:
    """Cofactors g_i with y^a - y^b = sum g_i (y^{a_i} - y^{b_i}), following the descent on |a|+|b|."""
    cof: dict[int, dict] = {}
    shift = (0,) * len(a)
    sign = 1
    # Invariant: target = sign * y^shift * (y^a - y^b)
    while a != b:
        idx = next(i for i, (ai, bi) in enumerate(basis)
                   if ai != bi and all(x >= y for x, y in zip(a, ai)) and all(x >= y for x, y in zip(b, bi)))
        ai, bi = basis[idx]
        if sum(ai) >= sum(bi):
            # y^a - y^b = y^{a-ai} h + y^{bi} (y^{a-ai} - y^{b-bi})
            mono = tuple(s + x - y for s, x, y in zip(shift, a, ai))
            shift = tuple(s + y for s, y in zip(shift, bi))
        else:
            # y^a - y^b = y^{b-bi} h + y^{ai} (y^{a-ai} - y^{b-bi})
            mono = tuple(s + x - y for s, x, y in zip(shift, b, bi))
            shift = tuple(s + y for s, y in zip(shift, ai))
        _poly_add(cof.setdefault(idx, {}), mono, sign)
        a = tuple(x - y for x, y in zip(a, ai))
        b = tuple(x - y for x, y in zip(b, bi))
    return cof


def _expand(cof: dict[int, dict], basis: list[tuple[Vec, Vec]]) -> dict:
    out: dict = {}
    for idx, poly in cof.items():
        ai, bi = basis[idx]
        for mono, c in poly.items():
            _poly_add(out, tuple(m + x for m, x in zip(mono, ai)), c)
            _poly_add(out, tuple(m + x for m, x in zip(mono, bi)), -c)
    return out


def toric_relations(S: Sequence[Sequence[int]], degree_bound: int) -> ToricRelations:
    """Binomial relations among the points of S up to ``degree_bound``.

    Pairs (a, b) with sum a_i s_i = sum b_i s_i and |a|, |b| <= degree_bound
    are minimalized coordinatewise in Z^{2L}.  Every enumerated pair is then
    rewritten in terms of the minimal ones by descent on |a| + |b|, and the
    cofactor degrees are compared with max(|a|, |b|).
    """
    S = [tuple(int(x) for x in s) for s in S]
    L = len(S)
    by_value: dict[Vec, list[Vec]] = {}
    for a in _compositions(L, degree_bound):
        val = tuple(sum(ai * s[i] for ai, s in zip(a, S)) for i in range(len(S[0]))) if S else ()
        by_value.setdefault(val, []).append(a)
    pairs = []
    for group in by_value.values():
        for a in group:
            for b in group:
                if any(a) or any(b):
                    pairs.append((a, b))
    minimal = dickson_minimal(a + b for a, b in pairs)
    basis = [(m[:L], m[L:]) for m in minimal]
    excess = -10**9
    for a, b in pairs:
        cof = _rewrite(a, b, basis)
        target: dict = {}
        _poly_add(target, a, 1)
        _poly_add(target, b, -1)
        if _expand(cof, basis) != target:
            raise AssertionError(f"rewriting failed for {(a, b)}")
        bound = max(sum(a), sum(b))
        for poly in cof.values():
            for mono in poly:
                excess = max(excess, sum(mono) - bound)
    rels = [Binomial(a, b) for a, b in basis if a > b]
    return ToricRelations(S, rels, basis, len(pairs), excess if pairs else 0)


def weight_additive_decompose(g: NewtonGeometry, u: Sequence[int]) -> list[tuple[Vec, int]]:
    """Write u = sum v_i s_i with s_i in the semigroup set and w(u) = sum v_i w(s_i).

    Pick a facet F attaining w(u); u lies in the cone over the support points
    on F, so u = sum r_j w_j with independent w_j on F and r_j >= 0.  Then
    u = sum floor(r_j) w_j + s where s = sum frac(r_j) w_j is in the
    semigroup set, and all pieces lie on the cone over F.
    """
    u = tuple(int(x) for x in u)
    w = g.weight(u)
    if not any(u):
        raise NoDecomposition("u = 0 has no decomposition")
    S = set(semigroup_generators(g))
    if u in S:
        return [(u, 1)]
    for f in g._outer:
        if Fraction(sum(a * b for a, b in zip(f.normal, u)), f.offset) != w:
            continue
        on_face = [p for p in g.support if g._on(f, p)]
        for size in range(1, g.dim + 1):
            for cols in itertools.combinations(on_face, size):
                if rank(cols) < size:
                    continue
                sol = _solve_exact(list(cols), u)
                if sol is None or any(r < 0 for r in sol):
                    continue
                pieces: dict[Vec, int] = {}
                rest = [Fraction(0)] * g.n
                for col, r in zip(cols, sol):
                    fl = math.floor(r)
                    if fl:
                        pieces[col] = pieces.get(col, 0) + fl
                    rest = [x + (r - fl) * c for x, c in zip(rest, col)]
                s = tuple(int(x) for x in rest)
                if any(s):
                    if s not in S:
                        raise NoDecomposition(f"remainder {s} is not in the semigroup set")
                    pieces[s] = pieces.get(s, 0) + 1
                out = sorted(pieces.items())
                if sum(v * g.weight(sv) for sv, v in out) != w:
                    continue
                return out
    raise NoDecomposition(f"no weight-additive decomposition found for {u}")
