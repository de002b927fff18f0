from __future__ import annotations

import io
from fractions import Fraction

import pytest

from dworkzeta import dwork_operator as dw
from dworkzeta import polytope
from dworkzeta.gfq import make_field
from dworkzeta.laurent import parse_laurent
from dworkzeta.padic import ARTIN_HASSE, DWORK_EXP, get_tower

CASES = [("x1+x1^-1", 1), ("x1+x2+x1^-1*x2^-1", 2)]


def _setup(text, n, p=3, a=1, N=6):
    F = make_field(p, a)
    f = parse_laurent(text, n, F)
    g = polytope.build_geometry(f.support(), n)
    return f, g, get_tower(p, a, N)


@pytest.mark.parametrize("text,n", CASES)
@pytest.mark.parametrize("p", [3, 5])
def test_decay_audits_are_clean(text, n, p):
    f, g, T = _setup(text, n, p, 1, 5)
    for kind in (ARTIN_HASSE, DWORK_EXP):
        S = dw.build_F0(f, g, T, kind)
        assert S.audit() == []
    assert dw.build_H(f, g, T).audit() == []
    R, Rinv = dw.build_R(f, g, T)
    assert R.audit() == [] and Rinv.audit() == []


def test_decay_audit_in_unramified_extension():
    f, g, T = _setup("x1+x1^-1", 1, 2, 2, 5)
    assert dw.build_F0(f, g, T, ARTIN_HASSE).audit() == []
    assert dw.build_F0(f, g, T, DWORK_EXP).audit() == []


def test_normalized_valuations_meet_decay_rates():
    f, g, T = _setup("x1+x1^-1", 1)
    assert dw.build_F0(f, g, T, ARTIN_HASSE).min_normalized_valuation() >= Fraction(1, 2)
    assert dw.build_F0(f, g, T, DWORK_EXP).min_normalized_valuation() >= Fraction(2, 9)


def test_frobenius_entries_respect_bound():
    f, g, T = _setup("x1+x2+x1^-1*x2^-1", 2)
    frob = dw.frobenius_matrix(f, g, T, 4)
    assert frob.entry_bound_violations(g) == []


def test_frobenius_matrix_of_trivial_character():
    # f = x with p=5: alpha is upper triangular in the weight order, alpha[0][0] = 1
    f, g, T = _setup("x1", 1, 5, 1, 4)
    frob = dw.frobenius_matrix(f, g, T, 5)
    rows = frob.matrix.to_rows()
    assert rows[0][0] == T.one()
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if 5 * i < j:
                continue
            if 5 * i > j:
                assert x == dw.build_F0(f, g, T).get((5 * i - j,))


def test_frob_matrix_serialization_roundtrip():
    f, g, T = _setup("x1+x1^-1", 1)
    frob = dw.frobenius_matrix(f, g, T, 3)
    data = frob.dumps()
    back = dw.FrobMatrix.loads(data)
    assert back.basis.points == frob.basis.points
    assert back.matrix.to_rows() == frob.matrix.to_rows()
    buf = io.BytesIO()
    frob.dump(buf)
    buf.seek(0)
    assert dw.FrobMatrix.load(buf).dumps() == data


def test_corrupt_serialization_rejected():
    f, g, T = _setup("x1+x1^-1", 1)
    data = dw.frobenius_matrix(f, g, T, 3).dumps()
    with pytest.raises(ValueError):
        dw.FrobMatrix.loads(b"XXXX" + data[4:])


def test_truncated_F0_refused():
    f, g, T = _setup("x1+x1^-1", 1)
    F0 = dw.build_F0(f, g, T, ARTIN_HASSE, W_F=2)
    with pytest.raises(dw.InsufficientCutoff) as info:
        dw.build_alpha_matrix(F0, 4, T)
    assert info.value.required > 2


@pytest.mark.parametrize("text,n", CASES)
@pytest.mark.parametrize("W", [4, 6])
def test_operator_identities(text, n, W):
    f, g, T = _setup(text, n)
    suite = dw.OperatorSuite(f, g, T, W)
    residuals = [suite.conjugation_residual(), suite.inverse_pair_residual()]
    for i in range(1, n + 1):
        residuals.append(suite.chain_map_residual(i))
        residuals.append(suite.derivation_conjugation_residual(i))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            residuals.append(suite.commutator_residual(i, j, "hat"))
            residuals.append(suite.commutator_residual(i, j, "pi"))
    residuals.extend(suite.koszul_residuals("hat"))
    residuals.extend(suite.koszul_residuals("pi"))
    failed = [r.to_json() for r in residuals if not r.ok]
    assert failed == []
    assert all(r.floor > 0 for r in residuals)


def test_koszul_complex_shapes():
    f, g, T = _setup("x1+x2+x1^-1*x2^-1", 2)
    suite = dw.OperatorSuite(f, g, T, 3)
    m = len(suite.basis)
    d1, d2 = suite.koszul_boundaries()
    assert (d1.nrows, d1.ncols) == (m, 2 * m)
    assert (d2.nrows, d2.ncols) == (2 * m, m)


def test_euler_operators_commute_exactly():
    f, g, T = _setup("x1+x2+x1^-1*x2^-1", 2)
    B = dw.make_basis(g, 4)
    E1, E2 = dw.euler_matrix(1, B, B, T), dw.euler_matrix(2, B, B, T)
    assert (E1 @ E2 - E2 @ E1).is_zero()


def test_unit_block_experiment_runs():
    f, g, T = _setup("x1+x1^-1", 1)
    assert dw.unit_block_invertible(dw.frobenius_matrix(f, g, T, 4)) in (True, False)
