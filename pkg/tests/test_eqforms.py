import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from shiftcartan.eqforms import (AdjointSpace, CartanElement, SampleSet, build_omega0,
                                 build_omega1, cartan_diff, closure_identities, d_LR, de_rham,
                                 forms_agree, pullback, vanishes)
from shiftcartan.liecore import MatrixGroup, bracket, pair_matrices, trace_pairing

SL2 = MatrixGroup("sl", 2)
P2 = trace_pairing(SL2)


def test_closure_sl2_random_and_basis():
    assert all(closure_identities(SL2, P2, count=10).values())
    assert all(closure_identities(SL2, P2, count=5, basis=True).values())


def test_closure_sl3_random_directions():
    G = MatrixGroup("sl", 3)
    assert all(closure_identities(G, trace_pairing(G), count=4, seed=3).values())


def test_closure_over_a_prime_field():
    X = AdjointSpace(SL2)
    samples = SampleSet(X, 5, 2, p=11)
    assert all(closure_identities(SL2, P2, samples=samples).values())


def test_dropping_omega1_breaks_the_middle_identity():
    X = AdjointSpace(SL2)
    w = CartanElement((build_omega0(SL2, P2, X),))
    dw = cartan_diff(w)
    assert vanishes(dw.component(0), SampleSet(X, 3, 0)) == []
    assert vanishes(dw.component(1), SampleSet(X, 3, 0))


def test_grading_is_homogeneous():
    w0 = build_omega0(SL2, P2)
    w1 = build_omega1(SL2, P2).with_u(1)
    assert w0.total_degree == w1.total_degree
    assert w0.weight == w1.weight


@given(st.integers(0, 1000))
def test_omega1_on_lie_directions(seed):
    rng = random.Random(seed)
    X = AdjointSpace(SL2)
    g = SL2._sample(rng, None)
    Xs = [SL2.random_lie(rng) for _ in range(3)]
    w1 = build_omega1(SL2, P2, X)
    val = w1(None, (g,), [(g @ a,) for a in Xs])
    expect = Fraction(1, 2) * pair_matrices(SL2, P2, Xs[0], bracket(Xs[1], Xs[2]))
    assert val == expect
    swapped = w1(None, (g,), [(g @ Xs[1],), (g @ Xs[0],), (g @ Xs[2],)])
    assert swapped == -val


def test_omega0_at_identity_and_on_orbit_directions():
    rng = random.Random(5)
    w0 = build_omega0(SL2, P2)
    e = SL2.identity()
    x, v = SL2.random_lie(rng), SL2.random_lie(rng)
    assert w0((x,), (e,), [(v,)]) == pair_matrices(SL2, P2, v, x)
    # the generating field of x is killed by omega0(x) at every point
    g = SL2._sample(rng, None)
    vx = x @ g - g @ x
    assert w0((x,), (g,), [(vx,)]) == 0
    # at e every generating field vanishes
    assert (x @ e - e @ x).is_zero()


def test_d_squared_is_zero():
    X = AdjointSpace(SL2)
    w0 = build_omega0(SL2, P2, X)
    s = SampleSet(X, 3, 1)
    assert vanishes(de_rham(de_rham(w0)), s) == []
    assert vanishes(d_LR(d_LR(w0)), s) == []


def test_pullback_commutes_with_d():
    X = AdjointSpace(SL2)

    def square(pt):
        return (pt[0] @ pt[0],)

    w0 = build_omega0(SL2, P2, X)
    s = SampleSet(X, 3, 4)
    assert forms_agree(de_rham(pullback(w0, square, X)), pullback(de_rham(w0), square, X), s)


def test_incompatible_degrees_do_not_agree():
    X = AdjointSpace(SL2)
    s = SampleSet(X, 1, 0)
    assert not forms_agree(build_omega0(SL2, P2, X), build_omega1(SL2, P2, X), s)
