"""Sparse Laurent polynomials in x1..xn with a small text grammar.

Grammar (no implicit multiplication)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' exponent)?
    atom   := INTEGER | 'g' | 'x' INDEX | '(' expr ')'
    exponent := ['-'] INTEGER | '(' ['-'] INTEGER ')'

``g`` denotes the generator of F_q over F_p and is only available when a > 1.
Negative exponents are only allowed on monomials.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .gfq import FieldParams, GFElem


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


def _is_zero(c) -> bool:
    z = getattr(c, "is_zero", None)
    if z is not None:
        return z()
    return c == 0


class LaurentPoly:
    """Map from exponent tuples to nonzero coefficients, kept in lex order.

    ``ring`` is the coefficient field (a :class:`FieldParams`) when the
    coefficients are finite-field elements, otherwise ``None``.
    """

    __slots__ = ("n", "terms", "ring")

    def __init__(self, n: int, terms: Mapping[tuple[int, ...], object] | None = None,
                 ring: FieldParams | None = None):
        self.n = n
        self.ring = ring
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != n:
                raise ValueError(f"exponent {e} has wrong length for n={n}")
            if not _is_zero(c):
                clean[e] = c
        self.terms = dict(sorted(clean.items()))

    # construction helpers
    @classmethod
    def constant(cls, n: int, c, ring=None) -> "LaurentPoly":
        return cls(n, {(0,) * n: c}, ring)

    @classmethod
    def monomial(cls, e: Iterable[int], c, ring=None) -> "LaurentPoly":
        e = tuple(e)
        return cls(len(e), {e: c}, ring)

    def _lift(self, c):
        if self.ring is not None and isinstance(c, int):
            return GFElem(self.ring, self.ring.from_int(c))
        return c

    def support(self) -> list[tuple[int, ...]]:
        return list(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.terms.items())))

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return LaurentPoly(self.n, out, self.ring or other.ring)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.n, {e: -c for e, c in self.terms.items()}, self.ring)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other) -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            other = self._lift(other)
            return LaurentPoly(self.n, {e: c * other for e, c in self.terms.items()}, self.ring)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                out[e] = out[e] + prod if e in out else prod
        return LaurentPoly(self.n, out, self.ring or other.ring)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            if len(self.terms) != 1:
                raise ValueError("negative power of a non-monomial")
            (e, c), = self.terms.items()
            inv = c.inverse() if hasattr(c, "inverse") else Fraction(1) / c
            return LaurentPoly(self.n, {tuple(x * k for x in e): inv ** (-k)}, self.ring)
        result = LaurentPoly.constant(self.n, self._lift(1), self.ring)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def map_coeffs(self, fn: Callable, ring=None) -> "LaurentPoly":
        return LaurentPoly(self.n, {e: fn(c) for e, c in self.terms.items()}, ring)

    def __repr__(self) -> str:
        return f"LaurentPoly({format_laurent(self)!r})"

    def __str__(self) -> str:
        return format_laurent(self)


# --- parsing ---------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(x\d+)|(g)|([-+*^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            j = pos
            while j < len(text) and text[j].isspace():
                j += 1
            raise ParseError(f"unexpected character {text[j]!r}", j)
        start = m.start(m.lastindex)
        kind = ("int", "var", "gen", "op")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int, field: FieldParams | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n
        self.field = field

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind != "op":
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def const(self, value) -> LaurentPoly:
        c = GFElem(self.field, self.field.from_int(value)) if self.field else Fraction(value)
        return LaurentPoly.constant(self.n, c, self.field)

    def parse(self) -> LaurentPoly:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        result = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return result

    def expr(self) -> LaurentPoly:
        acc = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> LaurentPoly:
        acc = self.unary()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            acc = acc * self.unary()
        return acc

    def unary(self) -> LaurentPoly:
        if self.peek()[0] == "op" and self.peek()[1] in ("-", "+"):
            op = self.take()[1]
            inner = self.unary()
            return -inner if op == "-" else inner
        return self.power()

    def exponent(self) -> int:
        paren = False
        if self.peek()[:2] == ("op", "("):
            self.take()
            paren = True
        sign = 1
        if self.peek()[:2] == ("op", "-"):
            self.take()
            sign = -1
        kind, val, pos = self.take()
        if kind != "int":
            raise ParseError("expected integer exponent", pos)
        if paren:
            self.expect(")")
        return sign * int(val)

    def power(self) -> LaurentPoly:
        base_pos = self.peek()[2]
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            k = self.exponent()
            if k < 0 and len(base.terms) != 1:
                raise ParseError("negative exponent on a non-monomial", base_pos)
            if k < 0 and self.field is None and 0 in base.terms.values():
                raise ParseError("division by zero", base_pos)
            return base ** k
        return base

    def atom(self) -> LaurentPoly:
        kind, val, pos = self.take()
        if kind == "int":
            return self.const(int(val))
        if kind == "var":
            idx = int(val[1:])
            if not 1 <= idx <= self.n:
                raise ParseError(f"variable {val} out of range 1..{self.n}", pos)
            e = [0] * self.n
            e[idx - 1] = 1
            one = GFElem(self.field, 1) if self.field else Fraction(1)
            return LaurentPoly(self.n, {tuple(e): one}, self.field)
        if kind == "gen":
            if self.field is None or self.field.a == 1:
                raise ParseError("coefficient not in field: g requires a > 1", pos)
            return LaurentPoly.constant(self.n, self.field.gen(), self.field)
        if (kind, val) == ("op", "("):
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {val or 'end of input'!r}", pos)


def parse_laurent(text: str, n: int, field: FieldParams | None = None) -> LaurentPoly:
    """Parse ``text`` as a Laurent polynomial in x1..xn.

    With ``field`` the coefficients are reduced into F_q, otherwise they are
    rationals.
    """
    return _Parser(text, n, field).parse()


# --- printing and serialization ----------------------------------------------------

def _format_coeff(c) -> str:
    if isinstance(c, GFElem):
        s = str(c)
        return f"({s})" if "+" in s else s
    if isinstance(c, Fraction) and c.denominator == 1:
        return str(c.numerator)
    return str(c)


def _format_monomial(e: tuple[int, ...]) -> str:
    parts = []
    for i, k in enumerate(e):
        if k == 0:
            continue
        parts.append(f"x{i + 1}" if k == 1 else f"x{i + 1}^{k}")
    return "*".join(parts)


def format_laurent(f: LaurentPoly) -> str:
    """Canonical text form; ``parse_laurent(format_laurent(f))`` returns ``f``."""
    if not f.terms:
        return "0"
    pieces = []
    for e, c in f.terms.items():
        mono = _format_monomial(e)
        cs = _format_coeff(c)
        if not mono:
            pieces.append(cs)
        elif cs == "1":
            pieces.append(mono)
        elif cs == "-1":
            pieces.append("-" + mono)
        else:
            pieces.append(f"{cs}*{mono}")
    return " + ".join(pieces)


def _coeff_json(c):
    if isinstance(c, GFElem):
        return c.code
    if isinstance(c, Fraction):
        return str(c) if c.denominator != 1 else c.numerator
    if isinstance(c, int):
        return c
    return str(c)


def laurent_to_json(f: LaurentPoly) -> dict:
    out: dict = {"n": f.n, "terms": [{"e": list(e), "c": _coeff_json(c)} for e, c in f.terms.items()]}
    if f.ring is not None:
        out["field"] = {"p": f.ring.p, "a": f.ring.a, "modulus": list(f.ring.modulus)}
    return out


def laurent_from_json(data: dict | str) -> LaurentPoly:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])
    ring = None
    if "field" in data:
        from .gfq import make_field

        fd = data["field"]
        ring = make_field(int(fd["p"]), int(fd["a"]))
        if list(ring.modulus) != list(fd["modulus"]):
            ring = FieldParams(int(fd["p"]), int(fd["a"]), fd["modulus"])
    terms = {}
    for t in data["terms"]:
        e = tuple(int(x) for x in t["e"])
        c = t["c"]
        terms[e] = GFElem(ring, int(c)) if ring is not None else Fraction(c)
    return LaurentPoly(n, terms, ring)


# --- structural operations ----------------------------------------------------------

def face_restrict(f: LaurentPoly, face) -> LaurentPoly:
    """Keep the terms whose exponents lie on ``face``.

    ``face`` may be a face descriptor (anything with ``lattice_points_of_support``)
    or an iterable of exponent vectors.
    """
    pts = getattr(face, "lattice_points_of_support", face)
    keep = set(tuple(x) for x in pts)
    return LaurentPoly(f.n, {e: c for e, c in f.terms.items() if e in keep}, f.ring)


def log_derivative(f: LaurentPoly, i: int) -> LaurentPoly:
    """x_i d/dx_i applied to f (i is 1-based)."""
    if not 1 <= i <= f.n:
        raise ValueError(f"index {i} out of range 1..{f.n}")
    return LaurentPoly(f.n, {e: c * e[i - 1] for e, c in f.terms.items() if e[i - 1]}, f.ring)


def specialize_zero(f: LaurentPoly, A: Iterable[int]) -> LaurentPoly:
    """Set x_i = 0 for i in A (1-based); the result lives in the remaining variables."""
    A = sorted(set(A))
    for i in A:
        if not 1 <= i <= f.n:
            raise ValueError(f"index {i} out of range 1..{f.n}")
    keep_axes = [j for j in range(f.n) if j + 1 not in A]
    out = {}
    for e, c in f.terms.items():
        if any(e[i - 1] < 0 for i in A):
            raise ValueError(f"cannot set x{[i for i in A if e[i - 1] < 0][0]} = 0: negative exponent")
        if any(e[i - 1] > 0 for i in A):
            continue
        out[tuple(e[j] for j in keep_axes)] = c
    return LaurentPoly(len(keep_axes), out, f.ring)
