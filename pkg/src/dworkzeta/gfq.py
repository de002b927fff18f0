"""Finite fields, exact exponential sums in Z[zeta_p] and brute-force nondegeneracy search.

Everything here is deliberately elementary: it is the independent check for the
p-adic side of the package, so it shares no code with :mod:`dworkzeta.padic`.

Field elements are encoded as integers ``0 <= code < q`` whose base-p digits are
the coefficients (low to high) of a polynomial in the generator ``g`` modulo the
field's defining polynomial.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import polytope

DEFAULT_POINT_CAP = 20_000_000
MAX_FIELD_SIZE = 2_000_000
_CHUNK = 1 << 18


class FieldError(ValueError):
    pass


class EnumerationCapExceeded(RuntimeError):
    pass


class IntegralityError(ArithmeticError):
    """An L-series coefficient computed from exact sums left Z[zeta_p]."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# --- polynomials over F_p, coefficient lists low -> high -------------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    a = [x % p for x in a]
    _trim(a)
    dm = len(m) - 1
    inv_lead = pow(m[-1], -1, p)
    while len(a) - 1 >= dm:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _trim(a)
    return a


def _pmul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim([c % p for c in out])


def _pgcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a, b = _trim([x % p for x in a]), _trim([x % p for x in b])
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _ppowmod(base: Sequence[int], e: int, m: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(base, m, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), m, p)
        base = _pmod(_pmul(base, base, p), m, p)
        e >>= 1
    return result


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Rabin-style test: no factor of degree <= deg/2 divides ``poly``."""
    poly = _trim([c % p for c in poly])
    deg = len(poly) - 1
    if deg <= 0:
        return False
    if deg == 1:
        return True
    h = [0, 1]
    for _ in range(deg // 2):
        h = _ppowmod(h, p, poly, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        if len(_pgcd(poly, _trim(diff), p)) > 1:
            return False
    return True


# --- fields ---------------------------------------------------------------------

class FieldParams:
    """The finite field F_q, q = p^a, with deterministic tables."""

    def __init__(self, p: int, a: int, modulus: Sequence[int]):
        if not is_prime(p):
            raise FieldError(f"p={p} is not prime")
        if len(modulus) != a + 1 or modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree a")
        if not is_irreducible(modulus, p):
            raise FieldError(f"modulus {tuple(modulus)} is reducible over F_{p}")
        self.p = p
        self.a = a
        self.q = p**a
        self.modulus = tuple(int(c) % p for c in modulus)
        if self.q > MAX_FIELD_SIZE:
            raise FieldError(f"field of size {self.q} exceeds table limit {MAX_FIELD_SIZE}")
        self._powers = [p**i for i in range(a)]
        self._build_tables()
        self._trace: np.ndarray | None = None
        self._digits: np.ndarray | None = None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldParams) and (self.p, self.modulus) == (other.p, other.modulus)

    def __hash__(self) -> int:
        return hash((self.p, self.modulus))

    def __repr__(self) -> str:
        return f"FieldParams(p={self.p}, a={self.a}, modulus={self.modulus})"

    # code <-> polynomial
    def to_poly(self, code: int) -> list[int]:
        out = []
        for _ in range(self.a):
            code, r = divmod(code, self.p)
            out.append(r)
        return out

    def from_poly(self, coeffs: Sequence[int]) -> int:
        red = _pmod(coeffs, self.modulus, self.p)
        return sum(c * self._powers[i] for i, c in enumerate(red))

    def _build_tables(self) -> None:
        q, p = self.q, self.p
        order = q - 1
        primes = _prime_factors(order) if order > 1 else []
        gen = None
        for code in range(1, q):
            poly = self.to_poly(code)
            if order == 1 or all(
                _ppowmod(poly, order // ell, self.modulus, p) != [1] for ell in primes
            ):
                gen = poly
                break
        assert gen is not None
        exp = [0] * order
        log = [-1] * q
        cur = [1]
        for k in range(order):
            c = self.from_poly(cur)
            exp[k] = c
            log[c] = k
            cur = _pmod(_pmul(cur, gen, p), self.modulus, p)
        self.exp_table = np.array(exp, dtype=np.int64)
        self.log_table = np.array(log, dtype=np.int64)
        self._exp = exp
        self._log = log

    # arithmetic on codes
    def add(self, x: int, y: int) -> int:
        p = self.p
        out = 0
        for pw in self._powers:
            out += ((x // pw + y // pw) % p) * pw
        return out

    def neg(self, x: int) -> int:
        p = self.p
        return sum(((-(x // pw)) % p) * pw for pw in self._powers)

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if x == 0 or y == 0:
            return 0
        return self._exp[(self._log[x] + self._log[y]) % (self.q - 1)]

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("inverse of 0 in finite field")
        return self._exp[(-self._log[x]) % (self.q - 1)]

    def power(self, x: int, e: int) -> int:
        if x == 0:
            if e < 0:
                raise ZeroDivisionError("0 to a negative power")
            return 1 if e == 0 else 0
        return self._exp[(self._log[x] * e) % (self.q - 1)]

    def from_int(self, k: int) -> int:
        return k % self.p

    @property
    def generator_code(self) -> int:
        """Code of the class of ``g`` (the polynomial variable)."""
        if self.a == 1:
            raise FieldError("prime field has no generator g")
        return self.p

    def element(self, code: int) -> "GFElem":
        return GFElem(self, code)

    def one(self) -> "GFElem":
        return GFElem(self, 1)

    def gen(self) -> "GFElem":
        return GFElem(self, self.generator_code)

    @property
    def digits_table(self) -> np.ndarray:
        if self._digits is None:
            codes = np.arange(self.q, dtype=np.int64)
            self._digits = np.stack(
                [(codes // pw) % self.p for pw in self._powers], axis=1
            )
        return self._digits

    @property
    def trace_table(self) -> np.ndarray:
        """Absolute trace to F_p of every code."""
        if self._trace is None:
            basis_tr = []
            for i in range(self.a):
                y = self._powers[i]
                t = 0
                for _ in range(self.a):
                    t = self.add(t, y)
                    y = self.power(y, self.p)
                assert t < self.p
                basis_tr.append(t)
            self._trace = (self.digits_table @ np.array(basis_tr, dtype=np.int64)) % self.p
        return self._trace

    def trace(self, code: int) -> int:
        return int(self.trace_table[code])

    def format(self, code: int) -> str:
        if self.a == 1:
            return str(code)
        parts = []
        for i, c in reversed(list(enumerate(self.to_poly(code)))):
            if c == 0:
                continue
            mono = "" if i == 0 else ("g" if i == 1 else f"g^{i}")
            if not mono:
                parts.append(str(c))
            else:
                parts.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(parts) if parts else "0"

    def extension(self, m: int) -> tuple["FieldParams", list[int]]:
        """F_{q^m} built directly over F_p, with the embedding of F_q into it."""
        return _extension(self, m)


@lru_cache(maxsize=None)
def _extension(base: FieldParams, m: int) -> tuple[FieldParams, list[int]]:
    if m == 1:
        return base, list(range(base.q))
    big = make_field(base.p, base.a * m)
    root = None
    for code in range(big.q):
        acc = 0
        for c in reversed(base.modulus):
            acc = big.add(big.mul(acc, code), big.from_int(c))
        if acc == 0:
            root = code
            break
    assert root is not None
    embed = []
    for code in range(base.q):
        acc = 0
        for c in reversed(base.to_poly(code)):
            acc = big.add(big.mul(acc, root), big.from_int(c))
        embed.append(acc)
    return big, embed


@lru_cache(maxsize=None)
def make_field(p: int, a: int = 1) -> FieldParams:
    """F_{p^a} with the lexicographically smallest monic irreducible modulus.

    Coefficient tuples (c_0, ..., c_{a-1}) are compared low degree first.
    """
    if not is_prime(p):
        raise FieldError(f"p={p} is not prime")
    if a < 1:
        raise FieldError("extension degree must be positive")
    for low in itertools.product(range(p), repeat=a):
        poly = list(low) + [1]
        if is_irreducible(poly, p):
            return FieldParams(p, a, poly)
    raise AssertionError("no irreducible polynomial found")


@dataclass(frozen=True)
class GFElem:
    field: FieldParams
    code: int

    def _coerce(self, other: object) -> int:
        if isinstance(other, GFElem):
            if other.field != self.field:
                raise FieldError("mixing elements of different fields")
            return other.code
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return GFElem(self.field, self.field.add(self.code, c))

    __radd__ = __add__

    def __neg__(self):
        return GFElem(self.field, self.field.neg(self.code))

    def __sub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return GFElem(self.field, self.field.sub(self.code, c))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return GFElem(self.field, self.field.mul(self.code, c))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return GFElem(self.field, self.field.power(self.code, e))

    def inverse(self) -> "GFElem":
        return GFElem(self.field, self.field.inv(self.code))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GFElem):
            return self.field == other.field and self.code == other.code
        if isinstance(other, int):
            return self.code == self.field.from_int(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.field, self.code))

    def __bool__(self) -> bool:
        return self.code != 0

    def is_zero(self) -> bool:
        return self.code == 0

    def __str__(self) -> str:
        return self.field.format(self.code)

    def __repr__(self) -> str:
        return f"GF({self.field.q})<{self}>"


# --- cyclotomic integers ----------------------------------------------------------

class CycInt:
    """Element of Z[zeta_p] (or transiently Q(zeta_p)) on the basis 1, zeta, ..., zeta^(p-2)."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs: Iterable):
        coeffs = list(coeffs)
        if len(coeffs) != p - 1:
            coeffs = _cyc_reduce(coeffs, p)
        self.p = p
        self.coeffs = tuple(coeffs)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "CycInt":
        p = len(counts)
        top = counts[-1]
        return cls(p, [int(c) - int(top) for c in counts[:-1]])

    @classmethod
    def integer(cls, p: int, k) -> "CycInt":
        return cls(p, [k] + [0] * (p - 2))

    @classmethod
    def zeta_power(cls, p: int, j: int) -> "CycInt":
        vec = [0] * p
        vec[j % p] = 1
        return cls(p, _cyc_reduce(vec, p))

    def __add__(self, other: "CycInt") -> "CycInt":
        return CycInt(self.p, [x + y for x, y in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "CycInt") -> "CycInt":
        return CycInt(self.p, [x - y for x, y in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "CycInt":
        return CycInt(self.p, [-x for x in self.coeffs])

    def __mul__(self, other) -> "CycInt":
        if not isinstance(other, CycInt):
            return CycInt(self.p, [x * other for x in self.coeffs])
        p = self.p
        full = [0] * p
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    full[(i + j) % p] += x * y
        return CycInt(p, _cyc_reduce(full, p))

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CycInt) and self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.p, self.coeffs))

    def __repr__(self) -> str:
        return f"CycInt(p={self.p}, {list(self.coeffs)})"

    def is_integral(self) -> bool:
        return all(Fraction(c).denominator == 1 for c in self.coeffs)

    def to_integral(self) -> "CycInt":
        if not self.is_integral():
            raise IntegralityError(f"{self!r} is not in Z[zeta_{self.p}]")
        return CycInt(self.p, [int(Fraction(c)) for c in self.coeffs])

    def to_json(self) -> list:
        return [str(c) if isinstance(c, Fraction) else int(c) for c in self.coeffs]


def _cyc_reduce(vec: Sequence, p: int):
    full = [0] * p
    for i, c in enumerate(vec):
        full[i % p] += c
    top = full[p - 1]
    return [c - top for c in full[: p - 1]]


# --- spaces and exponential sums ---------------------------------------------------

@dataclass(frozen=True)
class SpaceSpec:
    """T^r x A^(n-r); coordinates 1..r are torus coordinates, r+1..n affine."""

    n: int
    r: int

    def __post_init__(self):
        if not 0 <= self.r <= self.n:
            raise ValueError(f"torus rank {self.r} outside 0..{self.n}")

    @property
    def affine_axes(self) -> tuple[int, ...]:
        return tuple(range(self.r + 1, self.n + 1))

    def point_count(self, Q: int) -> int:
        return (Q - 1) ** self.r * Q ** (self.n - self.r)

    def label(self) -> str:
        parts = []
        if self.r:
            parts.append(f"T^{self.r}")
        if self.n - self.r:
            parts.append(f"A^{self.n - self.r}")
        return " x ".join(parts) if parts else "point"


def _coefficient_logs(f, big: FieldParams, embed: list[int]) -> list[tuple[tuple[int, ...], int]]:
    out = []
    for e, c in f.terms.items():
        code = embed[c.code] if isinstance(c, GFElem) else big.from_int(int(c))
        out.append((e, int(big.log_table[code])))
    return out


def _point_chunks(value_lists: list[np.ndarray]):
    """Yield coordinate arrays for all points, in lexicographic order, chunk by chunk."""
    n = len(value_lists)
    k = n
    size = 1
    for vals in reversed(value_lists):
        if size * len(vals) > _CHUNK and k < n:
            break
        size *= len(vals)
        k -= 1
    head, tail = value_lists[:k], value_lists[k:]
    if tail:
        grids = np.meshgrid(*tail, indexing="ij")
        tail_flat = [g.ravel() for g in grids]
        width = tail_flat[0].shape[0]
    else:
        tail_flat, width = [], 1
    for prefix in itertools.product(*[list(v) for v in head]):
        coords = [np.full(width, int(x), dtype=np.int64) for x in prefix] + tail_flat
        yield coords, width


def exp_sum_counts(space: SpaceSpec, f, m: int, *, cap: int = DEFAULT_POINT_CAP) -> list[int]:
    """Tally of points of X(k_m) by the absolute trace of f(x), as counts c_0..c_{p-1}."""
    field: FieldParams = f.ring
    if f.n != space.n:
        raise ValueError("polynomial dimension does not match space")
    for e in f.terms:
        for axis in space.affine_axes:
            if e[axis - 1] < 0:
                raise ValueError(f"pole in affine coordinate x{axis}")
    big, embed = field.extension(m)
    Q, p = big.q, big.p
    if space.point_count(Q) > cap:
        raise EnumerationCapExceeded(f"{space.point_count(Q)} points exceed cap {cap}")
    terms = _coefficient_logs(f, big, embed)
    trlog = big.trace_table[big.exp_table]
    torus_vals = np.arange(Q - 1, dtype=np.int64)
    affine_vals = np.arange(-1, Q - 1, dtype=np.int64)
    value_lists = [torus_vals if i < space.r else affine_vals for i in range(space.n)]
    counts = np.zeros(p, dtype=np.int64)
    for coords, width in _point_chunks(value_lists):
        total = np.zeros(width, dtype=np.int64)
        for e, la in terms:
            logsum = np.full(width, la, dtype=np.int64)
            zero = np.zeros(width, dtype=bool)
            for i, ei in enumerate(e):
                if ei == 0:
                    continue
                logsum += ei * coords[i]
                if i >= space.r:
                    zero |= coords[i] < 0
            tr = trlog[logsum % (Q - 1)]
            tr[zero] = 0
            total += tr
        counts += np.bincount(total % p, minlength=p)
    return [int(c) for c in counts]


def exp_sum(space: SpaceSpec, f, m: int, *, cap: int = DEFAULT_POINT_CAP) -> CycInt:
    """S_m(X, f) = sum over x in X(k_m) of zeta_p^Tr(f(x)), exactly."""
    return CycInt.from_counts(exp_sum_counts(space, f, m, cap=cap))


def lfun_series_from_sums(sums: Sequence[CycInt], M_t: int) -> list[CycInt]:
    """Coefficients L_0..L_{M_t} of exp(sum S_m t^m / m), checked to be in Z[zeta_p]."""
    if len(sums) < M_t:
        raise ValueError(f"need {M_t} sums, got {len(sums)}")
    p = sums[0].p
    L = [CycInt.integer(p, Fraction(1))]
    for k in range(1, M_t + 1):
        acc = CycInt.integer(p, Fraction(0))
        for mm in range(1, k + 1):
            acc = acc + sums[mm - 1] * L[k - mm]
        L.append(CycInt(p, [Fraction(c) / k for c in acc.coeffs]))
    return [c.to_integral() for c in L]


# --- nondegeneracy ---------------------------------------------------------------

@dataclass(frozen=True)
class DegenerateWitness:
    face: "polytope.FaceDescriptor"
    point: tuple[int, ...]
    m: int
    modulus: tuple[int, ...]

    @property
    def degenerate(self) -> bool:
        return True


@dataclass(frozen=True)
class NondegenerateUpTo:
    """No common torus zero found over k_1..k_m_max.  Not a proof."""

    m_max: int

    @property
    def degenerate(self) -> bool:
        return False


def is_nondegenerate(f, g: "polytope.NewtonGeometry", m_max: int = 2, *,
                     cap: int = DEFAULT_POINT_CAP):
    field: FieldParams = f.ring
    faces = polytope.faces_not_containing_origin(g)
    n = f.n
    for m in range(1, m_max + 1):
        big, embed = field.extension(m)
        Q, p = big.q, big.p
        if (Q - 1) ** n > cap:
            raise EnumerationCapExceeded(f"{(Q - 1) ** n} torus points exceed cap {cap}")
        digits = big.digits_table
        torus_vals = np.arange(Q - 1, dtype=np.int64)
        for face in faces:
            on_face = set(face.lattice_points_of_support)
            terms = [(e, la) for e, la in _coefficient_logs(f, big, embed) if e in on_face]
            for coords, width in _point_chunks([torus_vals] * n):
                zero_all = np.ones(width, dtype=bool)
                for i in range(n):
                    acc = np.zeros((width, big.a), dtype=np.int64)
                    for e, la in terms:
                        if e[i] % p == 0:
                            continue
                        logsum = np.full(width, la, dtype=np.int64)
                        for j, ej in enumerate(e):
                            if ej:
                                logsum += ej * coords[j]
                        acc += (e[i] % p) * digits[big.exp_table[logsum % (Q - 1)]]
                    zero_all &= ~np.any(acc % p, axis=1)
                hits = np.flatnonzero(zero_all)
                if hits.size:
                    h = int(hits[0])
                    point = tuple(int(big.exp_table[c[h]]) for c in coords)
                    return DegenerateWitness(face, point, m, big.modulus)
    return NondegenerateUpTo(m_max)
