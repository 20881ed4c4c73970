import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from shiftcartan.eqforms import AdjointSpace
from shiftcartan.exactalg import Matrix, rank
from shiftcartan.liecore import InvariantPairing, MatrixGroup, abelian_lie, trace_pairing
from shiftcartan.shiftsym import (ShiftedTwoForm, TangentComplex, beta_matrix, build_adjoint_group,
                                  build_bg, build_coadjoint, change_basis, coadjoint_complex,
                                  dumps, graded_antisymmetric, nondegenerate, random_invertible,
                                  tangent_complex_quotient)

SL2 = MatrixGroup("sl", 2)
P = trace_pairing(SL2)


def test_bg_is_two_shifted_only():
    assert build_bg(P, 2).check_point(())["nondegenerate"]
    assert not build_bg(P, 1).check_point(())["nondegenerate"]


def test_bg_with_rank_deficient_gram_fails():
    gram = Matrix([[Fraction(int(i == j == 0)) for j in range(3)] for i in range(3)])
    bad = InvariantPairing(SL2.lie, gram)
    assert not build_bg(bad, 2).check_point(())["nondegenerate"]


def test_coadjoint_at_zero_and_random_points():
    s = build_coadjoint(SL2.lie)
    assert s.check_point((0, 0, 0))["nondegenerate"]
    rep = s.report(10, seed=3)
    assert rep["nondegenerate"]
    assert all(p["chain_map"] and p["antisymmetric"] for p in rep["points"])


def test_coadjoint_abelian():
    s = build_coadjoint(abelian_lie(1))
    assert s.report(3)["nondegenerate"]
    t = coadjoint_complex(abelian_lie(2), (1, 2))
    assert t.homology() == {-1: 2, 0: 2}


def test_adjoint_group_with_closure():
    rep = build_adjoint_group(SL2, P).report(10, seed=1)
    assert rep["nondegenerate"]
    assert all(rep["closure"].values())


def test_adjoint_torus_and_zero_pairing():
    T = MatrixGroup("torus", 1)
    assert build_adjoint_group(T, trace_pairing(T)).report(4, closure=False)["nondegenerate"]
    zero = InvariantPairing(SL2.lie, Matrix.zeros(3, 3))
    rep = build_adjoint_group(SL2, zero).report(2, closure=False)
    assert not rep["nondegenerate"]
    assert "warning" in rep


def test_beta_matrix_is_not_the_criterion_at_minus_one_eigenvalues():
    # Ad_g has eigenvalue -1 here, the beta matrix drops rank, the cone stays exact
    g = Matrix([[0, 1], [-1, 0]]).map(Fraction)
    assert rank(beta_matrix(SL2, P, g)) == 1
    assert build_adjoint_group(SL2, P).check_point((g,))["nondegenerate"]


@given(st.integers(0, 500))
def test_beta_matrix_agrees_with_the_cone_at_random_points(seed):
    rng = random.Random(seed)
    g = SL2._sample(rng, None)
    full = rank(beta_matrix(SL2, P, g)) == 3
    cone_ok = build_adjoint_group(SL2, P).check_point((g,))["nondegenerate"]
    assert cone_ok
    # Ad_g has eigenvalue -1 exactly when tr g = 0
    assert full == (g.trace() != 0)


def test_complex_at_identity():
    t = tangent_complex_quotient(AdjointSpace(SL2), (SL2.identity(),))
    assert t.homology() == {-1: 3, 0: 3}


@given(st.integers(0, 500))
def test_basis_change_preserves_the_verdict(seed):
    rng = random.Random(seed)
    s = build_adjoint_group(SL2, P)
    g = SL2._sample(rng, None)
    t, w = s.complex_at((g,)), s.form_at((g,))
    S = {k: random_invertible(rng, t.dim(k)) for k in t.degrees}
    t2, w2 = change_basis(t, w, S)
    assert nondegenerate(w2, t2) == nondegenerate(w, t)
    assert graded_antisymmetric(w2, t2)


def test_dual_complex_conventions():
    t = TangentComplex({-1: 2, 0: 3}, {-1: Matrix([[1, 0], [0, 1], [1, 1]]).map(Fraction)})
    d = t.dual(1)
    assert d.dims == {0: 2, -1: 3}
    assert d.euler() == -t.euler()
    assert d.homology()[-1] == 1


def test_d_squared_checked():
    m = Matrix([[Fraction(1)]])
    with pytest.raises(ValueError):
        TangentComplex({0: 1, 1: 1, 2: 1}, {0: m, 1: m})


def test_reports_are_deterministic():
    s = build_adjoint_group(SL2, P)
    assert dumps(s.report(3, seed=7)) == dumps(s.report(3, seed=7))
