"""Truncated p-adic tower Z_q[pi] / (pi^(p-1) + p), everything modulo p^N.

Z_q is the unramified extension of Z_p of degree a, generated by a root
theta of the naive lift of the finite-field modulus.  An element is stored as
its integer coordinates on pi^j theta^i (0 <= j < p-1, 0 <= i < a), index
``j*a + i``, each reduced mod p^N.  Valuations are normalized with ord p = 1
and are tracked internally in "pi-units" (multiples of 1/(p-1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .gfq import FieldParams, GFElem, make_field


class PrecisionError(ArithmeticError):
    pass


class NotAUnit(ZeroDivisionError):
    pass


def vp_int(x: int, p: int) -> int:
    if x == 0:
        return math.inf  # type: ignore[return-value]
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def vp_factorial(m: int, p: int) -> int:
    v, pk = 0, p
    while pk <= m:
        v += m // pk
        pk *= p
    return v


class TowerParams:
    """Shared constants of one tower Z_q[pi] mod p^N."""

    def __init__(self, p: int, a: int, N: int):
        if N < 1:
            raise ValueError("precision N must be positive")
        self.p, self.a, self.N = p, a, N
        self.q = p**a
        self.P = p**N
        self.e = p - 1
        self.d = (p - 1) * a
        self.field: FieldParams = make_field(p, a)
        self.modulus = tuple(int(c) for c in self.field.modulus)
        self.max_units = N * (p - 1)

    def __repr__(self) -> str:
        return f"TowerParams(p={self.p}, a={self.a}, N={self.N})"

    def __reduce__(self):
        return (get_tower, (self.p, self.a, self.N))

    # constructors
    def zero(self) -> "TowerElem":
        return TowerElem(self, (0,) * self.d)

    def one(self) -> "TowerElem":
        return self.from_int(1)

    def from_int(self, k: int) -> "TowerElem":
        c = [0] * self.d
        c[0] = k % self.P
        return TowerElem(self, tuple(c))

    def from_fraction(self, x) -> "TowerElem":
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise PrecisionError(f"{x} is not p-integral")
        return self.from_int(x.numerator * pow(x.denominator, -1, self.P))

    def pi(self) -> "TowerElem":
        if self.p == 2:
            return self.from_int(-2)
        c = [0] * self.d
        c[self.a] = 1
        return TowerElem(self, tuple(c))

    def pi_power(self, m: int) -> "TowerElem":
        e, r = divmod(m, self.p - 1)
        c = [0] * self.d
        c[r * self.a] = pow(-self.p, e, self.P) if e < 10**6 else 0
        return TowerElem(self, tuple(x % self.P for x in c))

    def theta(self) -> "TowerElem":
        if self.a == 1:
            return self.from_int(-self.modulus[0])
        c = [0] * self.d
        c[1] = 1
        return TowerElem(self, tuple(c))

    def from_zq(self, coeffs: Sequence[int]) -> "TowerElem":
        """Element of Z_q from theta-coordinates."""
        c = [0] * self.d
        for i, x in enumerate(coeffs):
            c[i] = int(x) % self.P
        return TowerElem(self, tuple(c))

    def from_coords(self, coords: Sequence[int]) -> "TowerElem":
        return TowerElem(self, tuple(int(x) % self.P for x in coords))

    def lift_residue(self, x: GFElem | int) -> "TowerElem":
        """Naive lift of an F_q element (digits as integers)."""
        code = x.code if isinstance(x, GFElem) else int(x)
        return self.from_zq(self.field.to_poly(code))

    def with_precision(self, N: int) -> "TowerParams":
        return get_tower(self.p, self.a, N)


@lru_cache(maxsize=None)
def get_tower(p: int, a: int, N: int) -> TowerParams:
    return TowerParams(p, a, N)


def _mul_coords(T: TowerParams, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
    p1, a, P = T.p - 1, T.a, T.P
    if a == 1:
        out = [0] * (2 * p1 - 1)
        for j1, c1 in enumerate(x):
            if c1:
                for j2, c2 in enumerate(y):
                    if c2:
                        out[j1 + j2] += c1 * c2
        for j in range(2 * p1 - 2, p1 - 1, -1):
            if out[j]:
                out[j - p1] -= T.p * out[j]
        return tuple(c % P for c in out[:p1])
    rows = [[0] * (2 * a - 1) for _ in range(2 * p1 - 1)]
    for idx1, c1 in enumerate(x):
        if not c1:
            continue
        j1, i1 = divmod(idx1, a)
        for idx2, c2 in enumerate(y):
            if c2:
                j2, i2 = divmod(idx2, a)
                rows[j1 + j2][i1 + i2] += c1 * c2
    mod = T.modulus
    for row in rows:
        for deg in range(2 * a - 2, a - 1, -1):
            c = row[deg]
            if c:
                row[deg] = 0
                for k in range(a):
                    row[deg - a + k] -= c * mod[k]
    for j in range(2 * p1 - 2, p1 - 1, -1):
        for i in range(a):
            if rows[j][i]:
                rows[j - p1][i] -= T.p * rows[j][i]
    return tuple(rows[j][i] % P for j in range(p1) for i in range(a))


class TowerElem:
    __slots__ = ("T", "c")

    def __init__(self, T: TowerParams, coeffs: tuple[int, ...]):
        self.T = T
        self.c = coeffs

    @property
    def coeffs(self) -> list[list[int]]:
        """(p-1) x a coordinate matrix."""
        a = self.T.a
        return [list(self.c[j * a:(j + 1) * a]) for j in range(self.T.p - 1)]

    def _other(self, other) -> "TowerElem":
        if isinstance(other, TowerElem):
            if other.T is not self.T:
                raise ValueError(f"mixing towers {self.T} and {other.T}")
            return other
        if isinstance(other, int):
            return self.T.from_int(other)
        if isinstance(other, Fraction):
            return self.T.from_fraction(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return NotImplemented
        P = self.T.P
        return TowerElem(self.T, tuple((x + y) % P for x, y in zip(self.c, o.c)))

    __radd__ = __add__

    def __neg__(self):
        P = self.T.P
        return TowerElem(self.T, tuple((-x) % P for x in self.c))

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return NotImplemented
        P = self.T.P
        return TowerElem(self.T, tuple((x - y) % P for x, y in zip(self.c, o.c)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            P = self.T.P
            return TowerElem(self.T, tuple(x * other % P for x in self.c))
        o = self._other(other)
        if o is NotImplemented:
            return NotImplemented
        return TowerElem(self.T, _mul_coords(self.T, self.c, o.c))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "TowerElem":
        if k < 0:
            return self.inverse() ** (-k)
        result = self.T.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        o = self._other(other)
        if o is NotImplemented:
            return NotImplemented
        return self.c == o.c

    def __hash__(self) -> int:
        return hash((self.T.p, self.T.a, self.T.N, self.c))

    def is_zero(self) -> bool:
        return not any(self.c)

    def __repr__(self) -> str:
        v = self.valuation()
        return f"TowerElem(p={self.T.p}, a={self.T.a}, N={self.T.N}, coords={list(self.c)}, ord={v})"

    # valuations
    def val_units(self) -> int:
        """Valuation in units of 1/(p-1); the cap N(p-1) when the element is 0 mod p^N."""
        T = self.T
        best = T.max_units
        a = T.a
        for idx, x in enumerate(self.c):
            if x:
                j = idx // a
                v = j + (T.p - 1) * vp_int(x, T.p)
                if v < best:
                    best = v
        return best

    def valuation(self):
        u = self.val_units()
        if u >= self.T.max_units:
            return math.inf
        return Fraction(u, self.T.p - 1)

    def reduce_units(self, k: int) -> "TowerElem":
        """Drop everything of valuation >= k/(p-1)."""
        T = self.T
        if k >= T.max_units:
            return self
        out = []
        for idx, x in enumerate(self.c):
            j = idx // T.a
            digits = max(0, -(-(k - j) // (T.p - 1)))
            out.append(x % T.p**digits if digits < T.N else x)
        return TowerElem(T, tuple(out))

    def residue(self) -> int:
        """Image in F_q as a field code."""
        T = self.T
        digits = [self.c[i] % T.p for i in range(T.a)]
        return T.field.from_poly(digits)

    def is_unit(self) -> bool:
        return self.residue() != 0

    def inverse(self) -> "TowerElem":
        T = self.T
        r = self.residue()
        if r == 0:
            raise NotAUnit("inverse of a non-unit")
        x = T.lift_residue(T.field.inv(r))
        prec = 1
        while prec < T.max_units:
            x = x * (2 - self * x)
            prec *= 2
        return x

    def divide_by_p(self, k: int) -> "TowerElem":
        """x / p^k; the result is only meaningful mod p^(N-k)."""
        if k == 0:
            return self
        pk = self.T.p**k
        if any(x % pk for x in self.c):
            raise PrecisionError(f"element not divisible by p^{k}")
        return TowerElem(self.T, tuple(x // pk for x in self.c))

    def change_precision(self, T2: TowerParams) -> "TowerElem":
        """Reduce to (or zero-extend into) a tower of different precision."""
        if (T2.p, T2.a) != (self.T.p, self.T.a):
            raise ValueError("incompatible towers")
        return TowerElem(T2, tuple(x % T2.P for x in self.c))

    def frobenius(self) -> "TowerElem":
        """Apply the lift of x -> x^p on Z_q, fixing pi."""
        T = self.T
        if T.a == 1:
            return self
        images = frobenius_basis(T)
        a = T.a
        out = [0] * T.d
        for j in range(T.p - 1):
            for i in range(a):
                x = self.c[j * a + i]
                if x:
                    for k, y in enumerate(images[i]):
                        out[j * a + k] += x * y
        return TowerElem(T, tuple(v % T.P for v in out))

    def to_json(self) -> dict:
        v = self.valuation()
        return {"coords": self.coeffs, "ord": "inf" if v == math.inf else str(v)}


def frobenius_unramified(x: TowerElem) -> TowerElem:
    return x.frobenius()


@lru_cache(maxsize=None)
def frobenius_basis(T: TowerParams) -> tuple[tuple[int, ...], ...]:
    """theta-coordinates of sigma(theta^i), sigma(theta) the root of the modulus near theta^p."""
    a = T.a
    theta = T.theta()
    mod = [T.from_int(c) for c in T.modulus]

    def evalp(y):
        acc = T.zero()
        for c in reversed(mod):
            acc = acc * y + c
        return acc

    def deriv(y):
        acc = T.zero()
        for k in range(len(mod) - 1, 0, -1):
            acc = acc * y + mod[k] * k
        return acc

    y = theta ** T.p
    for _ in range(2 * T.N.bit_length() + 4):
        y = y - evalp(y) * deriv(y).inverse()
    assert evalp(y).is_zero()
    images = []
    cur = T.one()
    for _ in range(a):
        images.append(tuple(cur.c[:a]))
        cur = cur * y
    return tuple(images)


# --- Teichmueller lifts ------------------------------------------------------------

def teichmuller_lift(x: GFElem | int, T: TowerParams) -> TowerElem:
    """The root of t^q = t congruent to x mod p."""
    code = x.code if isinstance(x, GFElem) else int(x) % T.p
    if isinstance(x, GFElem) and x.field != T.field:
        raise ValueError("field and tower parameters do not match")
    y = T.lift_residue(code)
    if code == 0:
        return y
    for _ in range(T.N):
        y = y ** T.q
    return y


# --- gamma and splitting functions -----------------------------------------------------

def _gamma_terms(N: int, p: int) -> int:
    """Largest i whose term t^(p^i)/p^i can matter mod p^N when ord t = 1/(p-1)."""
    i = 0
    while Fraction(p ** (i + 1), p - 1) - (i + 1) < N + 1:
        i += 1
    return i


def truncated_log_series(t: TowerElem, I: int) -> TowerElem:
    """sum_{i<=I} t^(p^i) / p^i, evaluated in t's tower (loses I digits at the top)."""
    T = t.T
    acc = T.zero()
    power = t
    for i in range(I + 1):
        if i:
            power = power ** T.p
        acc = acc + power.divide_by_p(i)
    return acc


@lru_cache(maxsize=None)
def gamma_root(T: TowerParams) -> TowerElem:
    """The zero of sum_i t^(p^i)/p^i with gamma = pi mod pi^2."""
    I = _gamma_terms(T.N, T.p)
    Tw = get_tower(T.p, 1, T.N + I + 2)
    t = Tw.pi()
    for _ in range(64):
        g = truncated_log_series(t, I)
        dg = Tw.zero()
        power = Tw.one()
        for i in range(I + 1):
            # derivative of t^(p^i)/p^i is t^(p^i - 1)
            dg = dg + (t ** (T.p**i - 1) if i else power)
        step = g * dg.inverse()
        t_new = (t - step).change_precision(get_tower(T.p, 1, T.N + 2)).change_precision(Tw)
        if (t_new - t).val_units() >= (T.N + 1) * (T.p - 1):
            t = t_new
            break
        t = t_new
    else:
        raise PrecisionError("Newton iteration for gamma did not converge")
    return _embed_prime_field(t, T)


def _embed_prime_field(x: TowerElem, T: TowerParams) -> TowerElem:
    """Move an element of Z_p[pi] into the tower T (a may be > 1)."""
    a = T.a
    c = [0] * T.d
    for j in range(T.p - 1):
        c[j * a] = x.c[j * x.T.a] % T.P
    return TowerElem(T, tuple(c))


def gamma_l(T: TowerParams, l: int) -> TowerElem:
    """sum_{i<=l} gamma^(p^i)/p^i, computed at extra precision."""
    Tw = get_tower(T.p, 1, T.N + l + 1)
    g = gamma_root(Tw)
    return _embed_prime_field(truncated_log_series(g, l).change_precision(get_tower(T.p, 1, T.N)), T)


@lru_cache(maxsize=None)
def artin_hasse_coeffs(kmax: int, p: int) -> tuple[Fraction, ...]:
    """Rational coefficients E_0..E_kmax of exp(sum_i t^(p^i)/p^i)."""
    E = [Fraction(1)]
    for k in range(1, kmax + 1):
        acc = Fraction(0)
        pk = 1
        while pk <= k:
            acc += E[k - pk]
            pk *= p
        E.append(acc / k)
    return tuple(E)


def pi_power_over_factorial(m: int, T: TowerParams) -> TowerElem:
    """pi^m / m! exactly; it is integral since ord = s_p(m)/(p-1)."""
    p = T.p
    e, r = divmod(m, p - 1)
    v = vp_factorial(m, p)
    unit = math.factorial(m) // p**v
    val = (-1) ** e * p ** (e - v)
    c = [0] * T.d
    c[r * T.a] = val * pow(unit, -1, T.P) % T.P
    return TowerElem(T, tuple(c))


ARTIN_HASSE = "ArtinHasse"
DWORK_EXP = "DworkExp"
KINDS = (ARTIN_HASSE, DWORK_EXP)


def decay_rate(kind: str, p: int) -> Fraction:
    """Guaranteed slope b with ord lambda_i >= b*i."""
    if kind == ARTIN_HASSE:
        return Fraction(1, p - 1)
    if kind == DWORK_EXP:
        return Fraction(p - 1, p * p)
    raise ValueError(f"unknown splitting kind {kind!r}")


def default_i_max(kind: str, T: TowerParams) -> int:
    """Smallest i whose guaranteed valuation exceeds N."""
    b = decay_rate(kind, T.p)
    return math.floor(T.N / b) + 1


@dataclass(frozen=True)
class SplittingCoeffs:
    kind: str
    lam: tuple[TowerElem, ...]

    @property
    def i_max(self) -> int:
        return len(self.lam) - 1

    def decay(self) -> Fraction:
        return decay_rate(self.kind, self.lam[0].T.p)


@lru_cache(maxsize=None)
def splitting_coefficients(kind: str, T: TowerParams, i_max: int | None = None) -> SplittingCoeffs:
    """Coefficients of theta(t) = E(gamma t) (ArtinHasse) or exp(pi(t - t^p)) (DworkExp)."""
    if kind not in KINDS:
        raise ValueError(f"unknown splitting kind {kind!r}")
    if i_max is None:
        i_max = default_i_max(kind, T)
    if i_max < 0 or decay_rate(kind, T.p) * i_max > 2 * T.N + 2:
        raise PrecisionError(f"i_max={i_max} is far beyond what precision N={T.N} can resolve")
    if kind == ARTIN_HASSE:
        E = artin_hasse_coeffs(i_max, T.p)
        g = gamma_root(T)
        lam = []
        power = T.one()
        for k in range(i_max + 1):
            lam.append(power * T.from_fraction(E[k]))
            power = power * g
        return SplittingCoeffs(kind, tuple(lam))
    p = T.p
    lam = []
    for k in range(i_max + 1):
        acc = T.zero()
        j = 0
        while k - j * (p - 1) >= j:
            m = k - j * (p - 1)
            term = pi_power_over_factorial(m, T) * ((-1) ** j * math.comb(m, j))
            acc = acc + term
            j += 1
        lam.append(acc)
    return SplittingCoeffs(kind, tuple(lam))


def exp_coefficients(c: TowerElem, kmax: int) -> list[TowerElem]:
    """c^k / k! for k <= kmax, in c's tower.

    Each division by p^v_p(k!) costs that many digits at the top; callers run
    this in a tower with enough extra precision.
    """
    T = c.T
    out = [T.one()]
    power = T.one()
    for k in range(1, kmax + 1):
        power = power * c
        v = vp_factorial(k, T.p)
        unit = math.factorial(k) // T.p**v
        if power.val_units() < v * (T.p - 1) and not power.is_zero():
            raise PrecisionError("exponential series does not converge for this argument")
        out.append(power.divide_by_p(v) * pow(unit, -1, T.P))
    return out


def cyclotomic_residual(x: TowerElem) -> TowerElem:
    """Phi_p(x) = 1 + x + ... + x^(p-1)."""
    T = x.T
    acc = T.zero()
    power = T.one()
    for _ in range(T.p):
        acc = acc + power
        power = power * x
    return acc
