from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from dworkzeta.gfq import make_field
from dworkzeta.laurent import (
    LaurentPoly,
    ParseError,
    face_restrict,
    format_laurent,
    laurent_from_json,
    laurent_to_json,
    log_derivative,
    parse_laurent,
    specialize_zero,
)
from dworkzeta import polytope

F3 = make_field(3, 1)
F4 = make_field(2, 2)


def test_parse_basic():
    f = parse_laurent("x1+x2+x1^-1*x2^-1", 2, F3)
    assert sorted(f.support()) == [(-1, -1), (0, 1), (1, 0)]
    assert all(int(c.code) == 1 for c in f.terms.values())


def test_parse_collects_and_reduces_coefficients():
    f = parse_laurent("2*x1 + x1 + 4", 1, F3)
    assert f.support() == [(0,)]
    assert f.terms[(0,)].code == 1


def test_parse_powers_and_parentheses():
    f = parse_laurent("(x1+1)^2", 1, F3)
    g = parse_laurent("x1^2+2*x1+1", 1, F3)
    assert f == g


def test_generator_symbol_in_extension():
    f = parse_laurent("g*x1 + g^2", 1, F4)
    assert len(f) == 2
    assert f.terms[(1,)].code == F4.generator_code


@pytest.mark.parametrize("text,pos", [("x1+*x2", 3), ("x3", 0), ("(x1+1)^-1", None), ("x1^", None)])
def test_parse_errors_carry_positions(text, pos):
    with pytest.raises(ParseError) as info:
        parse_laurent(text, 2, F3)
    if pos is not None:
        assert info.value.position == pos


def test_generator_rejected_without_extension():
    with pytest.raises(ParseError, match="a > 1"):
        parse_laurent("g*x1", 1, F3)


terms = st.dictionaries(
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
    st.integers(1, 2),
    max_size=6,
)


@given(terms)
def test_format_parse_roundtrip(d):
    f = LaurentPoly(2, {e: F3.element(c) for e, c in d.items()}, F3)
    assert parse_laurent(format_laurent(f), 2, F3) == f


@given(terms)
def test_json_roundtrip(d):
    f = LaurentPoly(2, {e: F3.element(c) for e, c in d.items()}, F3)
    assert laurent_from_json(laurent_to_json(f)) == f


@given(terms, terms)
def test_multiplication_adds_supports_of_monomials(d1, d2):
    f = LaurentPoly(2, {e: F3.element(c) for e, c in d1.items()}, F3)
    g = LaurentPoly(2, {e: F3.element(c) for e, c in d2.items()}, F3)
    assert f * g == g * f
    assert (f + g) * g == f * g + g * g


def test_log_derivative():
    f = parse_laurent("x1^2*x2 + x1^-1", 2, F3)
    assert log_derivative(f, 1) == parse_laurent("2*x1^2*x2 - x1^-1", 2, F3)
    assert log_derivative(f, 2) == parse_laurent("x1^2*x2", 2, F3)


def test_log_derivative_vanishes_in_characteristic():
    f = parse_laurent("x1^2", 1, make_field(2, 1))
    assert log_derivative(f, 1).is_zero()


def test_face_restrict():
    f = parse_laurent("x1+x2+x1^-1*x2^-1", 2, F3)
    g = polytope.build_geometry(f.support(), 2)
    edge = next(fc for fc in g.faces if fc.dim == 1 and (1, 0) in fc.points and (0, 1) in fc.points)
    assert face_restrict(f, edge) == parse_laurent("x1+x2", 2, F3)


def test_specialize_zero():
    f = parse_laurent("x1+x1^-1+x2^2", 2, F3)
    assert specialize_zero(f, [2]) == parse_laurent("x1+x1^-1", 1, F3)
    with pytest.raises(ValueError):
        specialize_zero(f, [1])
