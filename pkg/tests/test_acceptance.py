"""
Acceptance criteria, one test each.  Every test prints a line
``criterion N: PASS|FAIL (seconds, limit)`` whether or not it passes, then
asserts both the verdict and the runtime limit.  Run this module directly
to print the nine lines without pytest.
"""

import itertools
import random
import sys
import time
from fractions import Fraction

import pytest

from shiftcartan import charstack as cs
from shiftcartan import cobcat as cb
from shiftcartan import eqforms, lagstruct as ls, shiftsym
from shiftcartan.exactalg import Fp, Matrix
from shiftcartan.liecore import InvariantPairing, MatrixGroup, trace_pairing

sys.path.insert(0, __file__.rsplit("/", 1)[0])
from surfaces import component, irreducible_genus_two, rational_point  # noqa: E402

SL2 = MatrixGroup("sl", 2)


def criterion_1():
    out = {}
    for n in (2, 3):
        G = MatrixGroup("sl", n)
        res = eqforms.closure_identities(G, trace_pairing(G), count=20, seed=1, basis=True)
        out["SL%d" % n] = res
    return all(all(r.values()) for r in out.values()), out


def criterion_2():
    P = trace_pairing(SL2)
    gram = Matrix([[Fraction(int(i == j == 0)) for j in range(3)] for i in range(3)])
    deficient = InvariantPairing(SL2.lie, gram)
    checks = {
        "BG shift 2 passes": shiftsym.build_bg(P, 2).check_point(())["nondegenerate"],
        "BG shift 1 fails": not shiftsym.build_bg(P, 1).check_point(())["nondegenerate"],
        "coadjoint passes": shiftsym.build_coadjoint(SL2.lie).report(10, 2, closure=False)["nondegenerate"],
        "adjoint passes": shiftsym.build_adjoint_group(SL2, P).report(10, 2, closure=False)["nondegenerate"],
        "rank-deficient gram fails": not shiftsym.build_bg(deficient, 2).check_point(())["nondegenerate"],
    }
    return all(checks.values()), checks


def criterion_3():
    checks, table = {}, {}
    for name in ("double-sl2", "conjclass-sl2"):
        q = ls.load_preset(name)
        checks[name + " passes"] = ls.check_quasi_hamiltonian(q, count=4, seed=3).ok
        for kind, (letter, _) in sorted(ls.PERTURBATIONS.items()):
            failed = ls.check_quasi_hamiltonian(ls.perturb(q, kind), count=4, seed=3).failed()
            table["%s/%s" % (name, kind)] = failed
            checks["%s/%s flips only (%s)" % (name, kind, letter)] = failed == [letter]
    return all(checks.values()), {"checks": checks, "observed": table}


QUASI = ["double-sl2", "conjclass-sl2", "fused-double-sl2", "e-point-sl2"]


def criterion_4():
    checks = {}
    for a, b in itertools.combinations_with_replacement(QUASI, 2):
        q = ls.fuse_pair(ls.load_preset(a), ls.load_preset(b), samples=2)
        checks["fuse(%s, %s)" % (a, b)] = ls.check_quasi_hamiltonian(q, count=2, seed=5).ok
    e = ls.load_preset("e-point-sl2")
    forced = ls.Verdict({k: True for k in "abcd"}, ls.IDENTITY_NAMES)
    for name in ("double-sl2", "conjclass-sl2"):
        for kind in sorted(ls.PERTURBATIONS):
            bad = ls.perturb(ls.load_preset(name), kind)
            k = len(bad.groups)
            fused = ls.fuse(ls.product(bad, e), k - 1, k, verdict=forced)
            before = ls.check_quasi_hamiltonian(bad, count=2, seed=5).failed()
            after = ls.check_quasi_hamiltonian(fused, count=2, seed=5).failed()
            checks["e-point neutral on %s/%s" % (name, kind)] = before == after
    return all(checks.values()), checks


def criterion_5():
    F7 = cs.sl2(7)
    checks = {}
    for seed in range(3):
        rep = irreducible_genus_two(F7, seed)
        t = cs.tangent_complex(rep)
        h = t.homology()
        checks["point %d: H = (0, 6, 0)" % seed] = h == (0, 6, 0)
        checks["point %d: euler -6" % seed] = h[0] - h[1] + h[2] == t.euler == -6
    rep = irreducible_genus_two(F7, 0)
    t = cs.tangent_complex(rep)
    Z = t.cocycles()
    rng = random.Random(9)
    h = F7.matrix(rng.randrange(F7.order))
    conj, Ad = rep.conjugate(h), cs.ad_matrix(rep.G, h)

    def rnd():
        out = [Fp(0, 7)] * len(Z[0])
        for z in Z:
            c = Fp(rng.randrange(7), 7)
            out = [a + c * b for a, b in zip(out, z)]
        return tuple(out)

    def move(w):
        return sum((cs._matvec(Ad, part) for part in cs.split(w, 4, 3)), ())

    skew = cob = inv = True
    for _ in range(50):
        u, v = rnd(), rnd()
        uv = cs.goldman_pairing(rep, u, v, check=False)
        skew &= uv == -cs.goldman_pairing(rep, v, u, check=False)
        x = tuple(Fp(rng.randrange(7), 7) for _ in range(3))
        cob &= cs.goldman_pairing(rep, t.coboundary(x), v, check=False) == 0
        inv &= cs.goldman_pairing(conj, move(u), move(v), check=False) == uv
    checks.update({"skew": skew, "coboundaries vanish": cob, "conjugation invariant": inv})
    return all(checks.values()), checks


def criterion_6():
    F7 = cs.sl2(7)
    checks = {}
    cyl = component("cyl")
    diag = True
    for g in range(0, F7.order, 17):
        rep = cs.rep_from_indices(cyl, F7, [g])
        r = cs.restriction_lagrangian_check(rep, require_smooth=False)
        (_, w1), (_, w2) = cyl.boundary
        diag &= r["isotropic"] and r["half_dimensional"] and rep.word(w1) == rep.word(w2)
    checks["cylinder diagonal"] = diag
    pres = component("genus(1; 0, 1)")
    rng = random.Random(1)
    good = 0
    while good < 5:
        rep = cs.rep_from_indices(pres, F7, [rng.randrange(F7.order) for _ in range(2)])
        r = cs.restriction_lagrangian_check(rep)
        if not r["smooth"]:
            continue
        checks["one-holed torus rep %d" % good] = r["verdict"] == "lagrangian"
        good += 1
    return all(checks.values()), checks


def criterion_7():
    F3 = cs.sl2(3)
    gens = {name: cb.parse(name) for name in ("cap", "cup", "cyl", "pants", "copants")}
    report = cs.certificate_report(gens, F3)
    checks = {d["pair"]: d["holds"] for d in report["certificates"]}
    checks["pants ; copants present"] = "pants ; copants" in checks
    torus = cs.Presentation.closed_surface(1)
    checks["168 by enumeration"] = cs.enumerate_reps(torus, F3).count == 168
    checks["168 by oracle"] = cs.count_commuting_pairs(F3) == 168
    return all(checks.values()), checks


def criterion_8():
    checks = {}
    for seed in range(3):
        rep = rational_point("genus(1; 1, 0)", seed, SL2)
        a, b = rep.images["a1"], rep.images["b1"]
        c = (a @ b @ a.inverse() @ b.inverse()).inverse()
        q = ls.fuse(ls.product(ls.fuse(ls.double(SL2)), ls.conjugacy_class(SL2, c)))
        red = ls.reduce(q, (a, b, SL2.identity()))
        mod = cs.constrained_moduli(rep)
        checks["point %d" % seed] = (mod.dimension == red.dimension
                                     and mod.nondegenerate == red.nondegenerate)
    return all(checks.values()), checks


def _generator_words():
    gens = ["cap", "cup", "cyl", "pants", "copants", "perm(1, 0)"]
    out = []
    for k in (1, 2, 3):
        for combo in itertools.product(gens, repeat=k):
            c = cb.parse(" | ".join(combo))
            if max(c.arity) <= 3:
                out.append(c)
    return out


def criterion_9():
    words = _generator_words()
    by_source = {}
    for c in words:
        by_source.setdefault(c.arity[0], []).append(c)
    rng = random.Random(0)
    checks = {"associativity": True, "identity": True, "interchange": True, "euler": True}
    for a in words:
        n, m = a.arity
        checks["identity"] &= cb.compose(cb.identity(n), a) == a == cb.compose(a, cb.identity(m))
        for b in by_source.get(m, []):
            checks["euler"] &= cb.compose(a, b).euler == a.euler + b.euler
    for _ in range(2000):
        a = rng.choice(words)
        b = rng.choice(by_source[a.arity[1]])
        if not by_source.get(b.arity[1]):
            continue
        c = rng.choice(by_source[b.arity[1]])
        checks["associativity"] &= cb.compose(cb.compose(a, b), c) == cb.compose(a, cb.compose(b, c))
    small = [w for w in words if sum(w.arity) <= 3]
    for _ in range(500):
        a1, a2 = rng.choice(small), rng.choice(small)
        b1 = rng.choice(by_source[a1.arity[1]])
        b2 = rng.choice(by_source[a2.arity[1]])
        lhs = cb.compose(cb.tensor(a1, a2), cb.tensor(b1, b2))
        checks["interchange"] &= lhs == cb.tensor(cb.compose(a1, b1), cb.compose(a2, b2))
    trips = 0
    for _ in range(100):
        text = cb.random_expression(rng, depth=4)
        c = cb.parse(text)
        trips += cb.parse(cb.print_cobordism(c)) == c
    checks["round trip 100/100"] = trips == 100
    return all(checks.values()), checks


CRITERIA = [
    (1, criterion_1, 60), (2, criterion_2, 10), (3, criterion_3, 120), (4, criterion_4, 120),
    (5, criterion_5, 60), (6, criterion_6, 60), (7, criterion_7, 600), (8, criterion_8, 120),
    (9, criterion_9, 30),
]


def run_criterion(number, fn, limit):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    passed = ok and elapsed < limit
    line = "criterion %d: %s (%.1f s, limit %d s)" % (number, "PASS" if passed else "FAIL",
                                                       elapsed, limit)
    return passed, ok, elapsed, line, detail


@pytest.mark.parametrize("number, fn, limit", CRITERIA, ids=["criterion_%d" % c[0] for c in CRITERIA])
def test_criterion(number, fn, limit, capsys):
    passed, ok, elapsed, line, detail = run_criterion(number, fn, limit)
    with capsys.disabled():
        print("\n" + line)
        if not ok:
            print("  detail: %r" % (detail,))
    assert ok, detail
    assert elapsed < limit


if __name__ == "__main__":
    status = 0
    for number, fn, limit in CRITERIA:
        passed, ok, _, line, detail = run_criterion(number, fn, limit)
        print(line, flush=True)
        if not ok:
            print("  detail: %r" % (detail,))
        status |= not passed
    sys.exit(status)
