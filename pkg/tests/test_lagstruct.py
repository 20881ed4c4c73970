import random
from dataclasses import replace
from fractions import Fraction

import pytest

from shiftcartan import lagstruct as ls
from shiftcartan.liecore import MatrixGroup
from shiftcartan.shiftsym import graded_antisymmetric

G = MatrixGroup("sl", 2)
QUASI = ["double-sl2", "conjclass-sl2", "fused-double-sl2", "e-point-sl2"]


def check(q, count=4, seed=0):
    return ls.check_quasi_hamiltonian(q, count=count, seed=seed)


@pytest.mark.parametrize("name", QUASI)
def test_quasi_hamiltonian_presets_pass(name):
    v = check(ls.load_preset(name))
    assert v.ok, v.as_dict()


def test_hamiltonian_presets_pass():
    assert ls.check_hamiltonian(ls.cotangent(G), count=4).ok
    assert ls.check_hamiltonian(ls.hamiltonian_point(G), count=2).ok


def test_unknown_preset():
    with pytest.raises(KeyError):
        ls.load_preset("nope")


# observed perturbation table; the named identity always flips except that
# dropping omega1 on a conjugacy class is invisible (mu^* omega1 = 0 there)
TABLE = {
    "double-sl2": {"mu": ["a"], "gamma": ["b", "c"], "omega1": ["c"]},
    "conjclass-sl2": {"mu": ["a"], "gamma": ["b"], "omega1": []},
}


@pytest.mark.parametrize("name", sorted(TABLE))
@pytest.mark.parametrize("kind", ["mu", "gamma", "omega1"])
def test_perturbation_table(name, kind):
    v = check(ls.perturb(ls.load_preset(name), kind), count=3)
    assert v.failed() == TABLE[name][kind]


def test_pulled_back_omega1_vanishes_on_a_class():
    q = ls.conjugacy_class(G, ls.load_preset("conjclass-sl2").X.g0)
    assert check(replace(q, check_omega1=False), count=3).ok


def test_double_form_with_commutator_moment_map_fails():
    fused = ls.fuse(ls.double(G))
    mixed = replace(fused, gamma=ls.double(G).gamma)
    assert check(mixed, count=3).failed() == ["b", "c"]


def test_fuse_pairs_of_presets():
    for a, b in [("double-sl2", "conjclass-sl2"), ("conjclass-sl2", "conjclass-sl2")]:
        q = ls.fuse_pair(ls.load_preset(a), ls.load_preset(b))
        assert check(q, count=3).ok
        assert q.history[-1][0] == "fuse"


def test_fuse_refuses_failing_input():
    bad = ls.perturb(ls.double(G), "gamma")
    with pytest.raises(ls.RefusedError):
        ls.fuse(bad)
    with pytest.raises(ValueError):
        ls.fuse(ls.double(G), 0, 0)


def test_fusion_with_the_identity_point_is_neutral():
    e = ls.load_preset("e-point-sl2")
    for name in ("conjclass-sl2", "double-sl2"):
        q = ls.load_preset(name)
        assert check(ls.fuse_pair(q, e), count=3).ok
    # a failing space keeps exactly its failures after fusing with the point
    forced = ls.Verdict({k: True for k in "abcd"}, ls.IDENTITY_NAMES)
    for name, kind in [("conjclass-sl2", "gamma"), ("double-sl2", "omega1")]:
        bad = ls.perturb(ls.load_preset(name), kind)
        k = len(bad.groups)
        fused = ls.fuse(ls.product(bad, e), k - 1, k, verdict=forced)
        assert check(fused, count=3).failed() == check(bad, count=3).failed()


def _one_holed_torus_point(seed):
    rng = random.Random(seed)
    a, b = G._sample(rng, None), G._sample(rng, None)
    c = (a @ b @ a.inverse() @ b.inverse()).inverse()
    q = ls.fuse(ls.product(ls.fuse(ls.double(G)), ls.conjugacy_class(G, c)))
    return q, (a, b, G.identity())


def test_reduction_of_the_one_holed_torus():
    q, pt = _one_holed_torus_point(11)
    r = ls.reduce(q, pt)
    assert r.dimension == 2 and r.nondegenerate


def test_reduce_requires_zero_moment():
    q = ls.double(G)
    rng = random.Random(0)
    pt = q.X.sample(rng)
    with pytest.raises(ValueError):
        ls.reduce(q, pt)


@pytest.mark.parametrize("name", ["double-sl2", "conjclass-sl2", "fused-double-sl2"])
def test_tangent_level_lagrangian(name):
    q = ls.load_preset(name)
    pt = q.X.sample(random.Random(2))
    v = ls.lagrangian_at(q, pt).verdict()
    assert v["lagrangian"], v
    bad = ls.lagrangian_at(ls.perturb(q, "gamma"), pt)
    assert not bad.verdict()["isotropic"]


def test_composition_with_identity_and_with_itself():
    q = ls.load_preset("conjclass-sl2")
    lag = ls.lagrangian_at(q, q.X.sample(random.Random(3)))
    c = ls.lagrangian_as_correspondence(lag, "left")
    ident = ls.identity_correspondence(lag.target)
    assert ls.compose_correspondences(ident, c).verdict()["lagrangian"]
    r = ls.lagrangian_as_correspondence(lag, "right")
    assert ls.compose_correspondences(r, ls.identity_correspondence(lag.target)).verdict()["lagrangian"]
    both = ls.compose_correspondences(r, c)
    assert both.verdict()["lagrangian"]
    assert graded_antisymmetric(both.eta, both.apex)


def test_preset_catalog_is_json():
    import json
    data = json.loads(ls.preset_catalog())
    assert set(QUASI) <= set(data["presets"])
