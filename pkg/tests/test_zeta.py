from __future__ import annotations

import json
from fractions import Fraction

import flint
import pytest
from hypothesis import given, settings, strategies as st

from dworkzeta import dwork_operator as dw
from dworkzeta import polytope, precision, zeta
from dworkzeta.gfq import SpaceSpec, make_field
from dworkzeta.laurent import LaurentPoly, parse_laurent
from dworkzeta.linalg import TowerMatrix
from dworkzeta.padic import ARTIN_HASSE, DWORK_EXP, get_tower


def _series(T, ints, deg):
    return zeta.CertSeries.exact(T, [T.from_int(x) for x in ints], deg)


def test_cert_series_inverse_and_powers():
    T = get_tower(3, 1, 6)
    s = _series(T, [1, 3, 5, -2], 5)
    one = s * s.inverse()
    assert one.coeffs[0] == T.one() and all(c.is_zero() for c in one.coeffs[1:])
    assert (s**3) * (s**-3) == zeta.CertSeries.one(T, 5) or all(
        c.is_zero() for c in ((s**3) * (s**-3)).coeffs[1:])
    assert (s**2).coeffs[:3] == [T.one(), T.from_int(6), T.from_int(9 + 10)]


def test_scale_variable_tracks_precision():
    T = get_tower(3, 1, 6)
    s = _series(T, [1, 1, 1], 2)
    s.prec = [12, 4, 4]
    sc = s.scale_variable(1)
    assert sc.coeffs[1] == T.from_int(3) and sc.prec[1] == 6
    assert sc.coeffs[2] == T.from_int(9) and sc.prec[2] == 8


def test_precision_propagates_through_products():
    T = get_tower(3, 1, 6)
    s = _series(T, [1, 1], 1)
    s.prec = [12, 3]
    prod = s * s
    assert prod.prec[1] == 3


def test_det_from_traces_against_charpoly():
    T = get_tower(5, 1, 6)
    rows = [[3, 1, 4, 1], [5, 9, 2, 6], [5, 3, 5, 8], [9, 7, 9, 3]]
    A = TowerMatrix.from_rows(T, [[T.from_int(x) for x in r] for r in rows])
    coeffs, prec = zeta.det_from_traces(zeta.traces_of_powers(A, 4), T)
    cp = flint.fmpz_mat(rows).charpoly()  # det(tI - A)
    expect = [int(c) for c in reversed(cp.coeffs())]  # det(1 - tA)
    for s in range(5):
        assert (coeffs[s] - T.from_int(expect[s])).val_units() >= prec[s]
    assert prec[0] == T.max_units and prec[4] == T.max_units


def test_fredholm_refuses_low_cutoff():
    F = make_field(3, 1)
    f = parse_laurent("x1+x1^-1", 1, F)
    g = polytope.build_geometry(f.support(), 1)
    Tw = get_tower(3, 1, 10)
    frob = dw.frobenius_matrix(f, g, Tw, 1)
    with pytest.raises(zeta.CertificationError) as info:
        zeta.fredholm_det(frob, 4, 8)
    assert info.value.required_W == 8


def test_auto_cutoff_is_monotone():
    g = polytope.build_geometry([(1, 0), (0, 1), (-1, -1)], 2)
    b = precision.b_frobenius(3, 3)
    Ws = [precision.auto_cutoff(g, b, 3, N)[0] for N in range(1, 10)]
    assert Ws == sorted(Ws)


def _oracle_ok(rep):
    return rep.oracle and all(r.ok for r in rep.oracle)


def test_trivial_torus():
    f = parse_laurent("x1", 1, make_field(5, 1))
    rep = zeta.l_function_torus(f, 8, 4, oracle_m=4)
    T = get_tower(5, 1, 8)
    assert rep.L.coeffs[1] == T.from_int(-1)
    assert all(c.is_zero() for c in rep.L.coeffs[2:])
    assert rep.degree.degree == 1 and rep.volume_status == "pass"
    assert _oracle_ok(rep)


@pytest.mark.parametrize("p", [3, 5])
def test_kloosterman(p):
    f = parse_laurent("x1+x1^-1", 1, make_field(p, 1))
    rep = zeta.l_function_torus(f, 6, 4, oracle_m=4)
    assert rep.degree.degree == 2 and rep.volume_status == "pass"
    assert _oracle_ok(rep)
    T = get_tower(p, 1, 6)
    assert rep.P.coeffs[2] == T.from_int(p)  # product of the two roots is q
    assert [str(s) for s in rep.slopes.slopes] == ["0", "1"]


def test_kloosterman_over_extension_field():
    F = make_field(2, 2)
    f = parse_laurent("x1+g*x1^-1", 1, F)
    rep = zeta.l_function_torus(f, 6, 3, oracle_m=3)
    assert rep.degree.degree == 2 and _oracle_ok(rep)
    T = get_tower(2, 2, 6)
    assert rep.P.coeffs[2] == T.from_int(4)


def test_constant_polynomial_closed_form():
    F = make_field(3, 1)
    f = LaurentPoly.constant(1, F.element(2), F)
    rep = zeta.l_function_torus(f, 6, 3, oracle_m=3)
    assert rep.strata[0].method == "closed form"
    assert _oracle_ok(rep)


def test_two_variable_torus():
    f = parse_laurent("x1+x2+x1^-1*x2^-1", 2, make_field(3, 1))
    rep = zeta.l_function_torus(f, 6, 4, oracle_m=3)
    assert rep.degree.degree == 3 and rep.volume_status == "pass" and _oracle_ok(rep)


def test_mixed_space():
    f = parse_laurent("x1+x1^-1+x2^2", 2, make_field(3, 1))
    rep = zeta.l_function_mixed(SpaceSpec(2, 1), f, 6, 3, oracle_m=3)
    assert rep.commode["commode"]
    assert rep.nondegeneracy["status"] == "nondegenerate_up_to"
    assert rep.expected_degree == 2 and rep.degree.degree == 2
    assert len(rep.strata) == 2 and _oracle_ok(rep)


def test_affine_line_with_linear_polynomial():
    # f = x on A^1 sums to zero for every m, so L = 1
    f = parse_laurent("x1", 1, make_field(3, 1))
    rep = zeta.l_function_mixed(SpaceSpec(1, 0), f, 6, 3, oracle_m=3)
    assert all(c.is_zero() for c in rep.L.coeffs[1:])
    assert rep.expected_degree == 0 and rep.volume_status == "pass"


def test_degenerate_case_skips_degree_check():
    f = parse_laurent("x1^2", 1, make_field(2, 1))
    rep = zeta.l_function_torus(f, 6, 3, oracle_m=3)
    assert rep.nondegeneracy["status"] == "degenerate"
    assert rep.volume_status == "skipped" and rep.expected_degree is None
    assert _oracle_ok(rep)


def test_inconclusive_when_t_deg_too_small():
    f = parse_laurent("x1+x1^-1", 1, make_field(3, 1))
    rep = zeta.l_function_torus(f, 6, 2)
    assert rep.volume_status == "inconclusive"


def test_splittings_agree():
    f = parse_laurent("x1+x1^-1", 1, make_field(5, 1))
    a = zeta.l_function_torus(f, 6, 3, kind=ARTIN_HASSE)
    b = zeta.l_function_torus(f, 6, 3, kind=DWORK_EXP)
    for k in range(4):
        shared = min(a.L.prec[k], b.L.prec[k])
        assert (a.L.coeffs[k] - b.L.coeffs[k]).val_units() >= shared


def test_report_json_is_deterministic():
    f = parse_laurent("x1+x1^-1", 1, make_field(3, 1))
    j1 = json.dumps(zeta.l_function_torus(f, 6, 3, oracle_m=2).to_json(), sort_keys=True)
    j2 = json.dumps(zeta.l_function_torus(f, 6, 3, oracle_m=2).to_json(), sort_keys=True)
    assert j1 == j2
    data = json.loads(j1)
    assert set(data) >= {"space", "poly", "p", "a", "N", "W", "L_series", "degree", "volume_check",
                         "oracle", "slopes"}


def test_newton_slopes_flag_ambiguity():
    T = get_tower(3, 1, 4)
    s = _series(T, [1, 0, 9], 2)
    s.prec = [T.max_units, 1, T.max_units]
    res = zeta.newton_slopes(s, 2)
    assert res.slopes == [Fraction(1), Fraction(1)]
    assert res.ambiguous == [1]


@settings(max_examples=6, deadline=None)
@given(st.lists(st.integers(-2, 2), min_size=2, max_size=2, unique=True).filter(lambda l: 0 not in l),
       st.integers(1, 2))
def test_random_one_variable_sums_match(exps, c):
    F = make_field(3, 1)
    f = LaurentPoly(1, {(exps[0],): F.element(1), (exps[1],): F.element(c)}, F)
    rep = zeta.l_function_torus(f, 5, 3, oracle_m=3)
    assert _oracle_ok(rep)
