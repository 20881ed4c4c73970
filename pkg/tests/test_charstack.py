import json
import random
from fractions import Fraction

import pytest

from shiftcartan import charstack as cs
from shiftcartan import cobcat as cb
from shiftcartan import lagstruct as ls
from shiftcartan.exactalg import Fp, Matrix
from shiftcartan.liecore import MatrixGroup

from surfaces import component, irreducible_genus_two, rational_point

F3 = cs.sl2(3)


@pytest.fixture(scope="module")
def F7():
    return cs.sl2(7)


def test_group_orders():
    assert F3.order == 24
    assert cs.sl2(5).order == 120
    assert cs.torus(7).order == 6
    with pytest.raises(ValueError):
        cs.finite_group("so3", 3)


def test_free_and_torus_counts():
    assert cs.enumerate_reps(component("pants"), F3).count == 24 ** 2
    torus = cs.Presentation.closed_surface(1)
    assert cs.enumerate_reps(torus, F3).count == 168 == cs.count_commuting_pairs(F3)


def test_torus_count_is_class_number_times_order():
    assert cs.count_commuting_pairs(F3) == F3.order * len(F3.conjugacy_classes())


def test_counts_multiply_over_components():
    c = cb.parse("genus(1; 0, 0) | cyl")
    assert cs.rep_count(c, F3) == 168 * 24


def test_budget():
    with pytest.raises(cs.BudgetExceeded):
        cs.enumerate_reps(cs.Presentation.closed_surface(2), F3, budget=1000)


def test_enumeration_is_deterministic_with_threads(monkeypatch):
    pres = cs.Presentation.closed_surface(1)
    one = cs.enumerate_reps(pres, F3, threads=1).reps
    monkeypatch.setenv(cs.THREADS_ENV, "2")
    two = cs.enumerate_reps(pres, cs.sl2(3)).reps
    assert one == two


@pytest.mark.parametrize("text, euler", [("genus(2; 0, 0)", -6), ("genus(1; 0, 1)", -3),
                                         ("pants", -3), ("genus(1; 1, 1)", -6)])
def test_tangent_complex_euler_characteristic(text, euler, F7):
    pres = component(text)
    rng = random.Random(3)
    if pres.relators:
        rep = irreducible_genus_two(F7, 3)
    else:
        rep = cs.rep_from_indices(pres, F7, [rng.randrange(F7.order) for _ in pres.generators])
    t = cs.tangent_complex(rep)
    assert t.d_squared_zero()
    h0, h1, h2 = t.homology()
    assert h0 - h1 + h2 == t.euler == euler


def test_trivial_reps(F7):
    rep = cs.rep_from_indices(cs.Presentation.closed_surface(2), F7, [F7.e] * 4)
    assert cs.tangent_complex(rep).homology() == (3, 12, 3)
    rep = cs.rep_from_indices(component("pants"), F7, [F7.e] * 2)
    assert cs.tangent_complex(rep).homology() == (3, 6, 0)


def test_irreducible_genus_two(F7):
    rep = irreducible_genus_two(F7, 0)
    t = cs.tangent_complex(rep)
    assert t.d_squared_zero()
    assert t.homology() == (0, 6, 0)
    assert t.euler == -6


def _random_cocycle(rng, Z, p):
    zero = Fp(0, p)
    out = [zero] * len(Z[0])
    for z in Z:
        c = Fp(rng.randrange(p), p)
        out = [a + c * b for a, b in zip(out, z)]
    return tuple(out)


def test_goldman_pairing_properties(F7):
    rep = irreducible_genus_two(F7, 1)
    t = cs.tangent_complex(rep)
    Z = t.cocycles()
    rng = random.Random(5)
    h = F7.matrix(rng.randrange(F7.order))
    conj = rep.conjugate(h)
    Ad = cs.ad_matrix(rep.G, h)
    for _ in range(50):
        u, v = _random_cocycle(rng, Z, 7), _random_cocycle(rng, Z, 7)
        uv = cs.goldman_pairing(rep, u, v, check=False)
        assert uv == -cs.goldman_pairing(rep, v, u, check=False)
        x = tuple(Fp(rng.randrange(7), 7) for _ in range(3))
        assert cs.goldman_pairing(rep, t.coboundary(x), v, check=False) == 0
        move = lambda w: sum((cs._matvec(Ad, part) for part in cs.split(w, 4, 3)), ())
        assert cs.goldman_pairing(conj, move(u), move(v)) == uv


def test_goldman_rank_on_cohomology(F7):
    report = cs.constrained_moduli(irreducible_genus_two(F7, 2))
    assert report.dimension == 6 and report.rank == 6 and report.nondegenerate


def test_goldman_rejects_non_cocycles(F7):
    rep = irreducible_genus_two(F7, 0)
    bad = tuple(Fp(int(i == 0), 7) for i in range(12))
    with pytest.raises(cs.CocycleError):
        cs.goldman_pairing(rep, bad, bad)


def test_gl1_pairing_is_the_area_form():
    T = cs.torus(7)
    rep = cs.rep_from_indices(cs.Presentation.closed_surface(1), T, [1, 2])
    rng = random.Random(0)
    for _ in range(10):
        u = tuple(Fp(rng.randrange(7), 7) for _ in range(2))
        v = tuple(Fp(rng.randrange(7), 7) for _ in range(2))
        unit = rep.pair((Fp(1, 7),), (Fp(1, 7),))
        assert cs.goldman_pairing(rep, u, v) == unit * (u[0] * v[1] - u[1] * v[0])


def test_fundamental_chain_of_inverse_word():
    w = cb.commutator("a", "b")
    chain = cs.fundamental_chain(w)
    assert len(chain) == 6
    assert sum(c for c, _, _ in chain) == 2


# --- restriction to the boundary --------------------------------------------


def test_cylinder_restriction_is_the_diagonal(F7):
    pres = component("cyl")
    for g in range(0, F7.order, 37):
        rep = cs.rep_from_indices(pres, F7, [g])
        r = cs.restriction_lagrangian_check(rep, require_smooth=False)
        assert r["isotropic"] and r["half_dimensional"]
        # both circles carry the same holonomy: the image is the diagonal
        (_, w1), (_, w2) = pres.boundary
        assert rep.word(w1) == rep.word(w2)


def test_one_holed_torus_restriction(F7):
    pres = component("genus(1; 0, 1)")
    rng = random.Random(1)
    good = 0
    while good < 5:
        rep = cs.rep_from_indices(pres, F7, [rng.randrange(F7.order) for _ in range(2)])
        r = cs.restriction_lagrangian_check(rep)
        if not r["smooth"]:
            assert r["verdict"] == "inconclusive"
            continue
        assert r["isotropic"] and r["half_dimensional"], r
        assert r["verdict"] == "lagrangian"
        good += 1


def test_central_boundary_is_inconclusive(F7):
    pres = component("genus(1; 0, 1)")
    rep = cs.rep_from_indices(pres, F7, [F7.e, F7.e])
    assert cs.restriction_lagrangian_check(rep)["verdict"] == "inconclusive"


@pytest.mark.parametrize("text", ["cyl", "pants", "copants", "genus(1; 2, 0)", "genus(0; 0, 3)",
                                  "genus(1; 1, 0)"])
def test_surface_leg_is_lagrangian(text):
    rep = rational_point(text, 4)
    assert cs.surface_lagrangian(rep).verdict()["lagrangian"]


def test_inverting_the_cell_breaks_isotropy():
    rep = rational_point("pants", 4)
    pres = rep.presentation
    flipped = cs.Presentation(pres.generators, pres.relators, pres.boundary,
                              cb.word_inverse(pres.cell))
    rep2 = cs.RepPoint(flipped, rep.G, rep.images)
    assert not cs.surface_lagrangian(rep2).verdict()["isotropic"]


# --- constrained moduli ------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_constrained_moduli_matches_reduction(seed):
    G = MatrixGroup("sl", 2)
    rep = rational_point("genus(1; 1, 0)", seed, G)
    a, b = rep.images["a1"], rep.images["b1"]
    c = (a @ b @ a.inverse() @ b.inverse()).inverse()
    q = ls.fuse(ls.product(ls.fuse(ls.double(G)), ls.conjugacy_class(G, c)))
    red = ls.reduce(q, (a, b, G.identity()))
    mod = cs.constrained_moduli(rep)
    assert mod.dimension == red.dimension == 2
    assert mod.nondegenerate and red.nondegenerate
    assert mod.euler_ok and mod.smooth


def test_cylinder_with_trivial_class():
    G = MatrixGroup("sl", 2)
    pres = component("cyl")
    rep = cs.RepPoint(pres, G, {"c1": G.identity()})
    mod = cs.constrained_moduli(rep, classes=[G.identity(), G.identity()])
    assert mod.homology == {-1: 3, 0: 0, 1: 3}
    assert mod.dimension == 0 and mod.rank == 0 and not mod.smooth


def test_cylinder_at_a_regular_class():
    mod = cs.constrained_moduli(rational_point("cyl", 0))
    assert mod.dimension == 0 and mod.nondegenerate


def test_class_mismatch_is_refused():
    G = MatrixGroup("sl", 2)
    rep = rational_point("genus(1; 1, 0)", 0, G)
    with pytest.raises(ValueError):
        cs.constrained_moduli(rep, classes=[G.identity()])


# --- counting TFT ------------------------------------------------------------


GENS = {name: cb.parse(name) for name in ("cap", "cup", "cyl", "pants", "copants")}


def test_gluing_certificates_for_generators():
    report = cs.certificate_report(GENS, F3)
    assert report["all_hold"]
    pairs = {d["pair"] for d in report["certificates"]}
    assert "pants ; copants" in pairs and "cup ; cap" in pairs


def test_genus_creating_gluings():
    cert = cs.gluing_certificate(cb.parse("cup ; pants"), cb.parse("copants ; cap"), F3)
    assert cert.direct == cert.fibre == 168
    assert cert.extra_gluings == 1
    cert = cs.gluing_certificate(cb.parse("pants"), cb.parse("copants"), F3)
    assert cert.holds


def test_certificate_detects_a_wrong_conjugator_count(monkeypatch):
    def inverted(group, x, y):
        return sum(1 for t in range(group.order)
                   if group.mul(group.mul(group.inv[t], x), t) == group.inv[y])
    monkeypatch.setattr(cs, "_conjugators", inverted)
    cert = cs.gluing_certificate(cb.parse("cup ; pants"), cb.parse("copants ; cap"), F3)
    assert not cert.holds


def test_tft_value_of_a_cylinder_is_diagonal():
    val = cs.tft_evaluate(cb.parse("cyl"), F3)
    assert val.count == 24
    assert all(k[0] == k[1] for k in val.histogram)


def test_report_json_is_deterministic():
    gens = {k: GENS[k] for k in ("cyl", "pants")}
    a = cs.dumps(cs.certificate_report(gens, F3))
    b = cs.dumps(cs.certificate_report(gens, cs.sl2(3)))
    assert a == b
    assert json.loads(a)["schema_version"] == cs.SCHEMA_VERSION
