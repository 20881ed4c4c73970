"""
Hamiltonian and quasi-Hamiltonian spaces, fusion, reduction and
tangent-level Lagrangian correspondences.

A quasi-Hamiltonian space is a G-space ``X`` (G a tuple of matrix groups),
an equivariant map ``mu`` to G (one group element per factor) and an
invariant 2-form ``gamma``.  It is checked against

  (a) invariance of gamma, equivariance of mu and mu landing in G,
  (b) iota_{v_x} gamma = mu^* <beta, x>,
  (c) d gamma = -mu^* omega1,
  (d) ker gamma and ker d mu meet only in the directions collapsed by the
      chart.

(b) and (c) are the two components of the closure identity of the
isotropy witness (eqforms Cartan calculus); they are read off from it.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

from .eqforms import (HALF, AdjointSpace, CartanElement, DiagonalSpace, EquivariantForm,
                      GSpace, PointSpace, ProductSpace, SampleSet, _rand, de_rham, derivative,
                      theta_form_value, vadd, vcombo, vflat, vzero)
from .exactalg import Matrix, kernel_basis, rank, solve, span_rank
from .liecore import (CONVENTIONS, InvariantPairing, MatrixGroup, bracket, check_pairing,
                      pair_matrices, trace_pairing)
from .shiftsym import IsotropyWitness

REPORT_SCHEMA_VERSION = 1
IMPORTED = "standard quasi-Hamiltonian formula; validated, not trusted"


class RefusedError(ValueError):
    """An operation refused because its input does not pass its checks."""


# ---------------------------------------------------------------------------
# target spaces


class MultiAdjointSpace(GSpace):
    """G_1 x ... x G_k acting on itself factorwise by conjugation."""

    def __init__(self, groups):
        super().__init__(groups)
        self.name = " x ".join("%s^ad" % G.name for G in groups) or "pt"

    def act(self, h, pt):
        return tuple(k @ g @ k.inverse() for k, g in zip(h, pt))

    def act_vector(self, h, pt, v):
        return tuple(k @ w @ k.inverse() for k, w in zip(h, v))

    def field(self, x, pt):
        return tuple(a @ g - g @ a for a, g in zip(x, pt))

    def contains(self, pt):
        return len(pt) == len(self.groups) and all(G.contains(g) for G, g in zip(self.groups, pt))

    def tangent_basis(self, pt):
        out = []
        for i, (G, g) in enumerate(zip(self.groups, pt)):
            for b in G.basis:
                out.append(tuple(g @ b if j == i else Matrix.zeros(H.n, H.n)
                                 for j, H in enumerate(self.groups)))
        return out

    def sample(self, rng, p=None):
        return tuple(G._sample(rng, p) for G in self.groups)


def _beta(g: Matrix, v: Matrix) -> Matrix:
    gi = g.inverse()
    return (gi @ v + v @ gi).scale(HALF)


def group_target(groups, pairings) -> tuple[MultiAdjointSpace, CartanElement]:
    """The closed Cartan element omega0 + u omega1 on a product of [G/G^ad]."""
    Y = MultiAdjointSpace(groups)

    def w0(x, pt, vs):
        return sum((pair_matrices(G, P, _beta(g, v), a)
                    for G, P, g, v, a in zip(groups, pairings, pt, vs[0], x)), Fraction(0))

    def w1(x, pt, vs):
        total = Fraction(0)
        for i, (G, P) in enumerate(zip(groups, pairings)):
            total = total + theta_form_value(
                pt[i], [v[i] for v in vs], lambda A, B, G=G, P=P: pair_matrices(G, P, A, B))
        return total

    return Y, CartanElement((EquivariantForm(Y, 1, 1, w0, 0, "omega0"),
                             EquivariantForm(Y, 3, 0, w1, 1, "omega1")))


class CoadjointSpace(GSpace):
    """g^* as 1 x dim rows of coordinates dual to the group's Lie basis."""

    def __init__(self, G: MatrixGroup):
        super().__init__([G])
        self.G = G
        self.name = "%s*" % G.name

    def act(self, h, pt):
        (k,), (xi,) = h, pt
        ki = k.inverse()
        row = [sum((a * c for a, c in zip(xi.row(0), self.G.coords(ki @ b @ k))), Fraction(0))
               for b in self.G.basis]
        return (Matrix([row], self.G.dim),)

    def contains(self, pt):
        return len(pt) == 1 and pt[0].shape == (1, self.G.dim)

    def tangent_basis(self, pt):
        d = self.G.dim
        return [(Matrix([[Fraction(int(i == j)) for j in range(d)]], d),) for i in range(d)]

    def sample(self, rng, p=None):
        return (Matrix([[_rand(rng, p) for _ in range(self.G.dim)]], self.G.dim),)


def coadjoint_target(G: MatrixGroup) -> tuple[CoadjointSpace, CartanElement]:
    """The canonical closed form <d xi, x> on g^*."""
    Y = CoadjointSpace(G)

    def w(x, pt, vs):
        return sum((a * c for a, c in zip(vs[0][0].row(0), G.coords(x[0]))), Fraction(0))

    return Y, CartanElement((EquivariantForm(Y, 1, 1, w, 0, "canonical"),))


# ---------------------------------------------------------------------------
# concrete spaces


class CotangentSpace(GSpace):
    """T^*V for V = column vectors of the defining representation: (q, p)."""

    def __init__(self, G: MatrixGroup):
        super().__init__([G])
        self.G = G
        self.name = "T*%s-std" % G.name

    def act(self, h, pt):
        k = h[0]
        q, p = pt
        return (k @ q, p @ k.inverse())

    def field(self, x, pt):
        q, p = pt
        return (x[0] @ q, -(p @ x[0]))

    def contains(self, pt):
        n = self.G.n
        return len(pt) == 2 and pt[0].shape == (n, 1) and pt[1].shape == (1, n)

    def tangent_basis(self, pt):
        n = self.G.n
        zq, zp = Matrix.zeros(n, 1), Matrix.zeros(1, n)
        out = []
        for i in range(n):
            out.append((Matrix([[Fraction(int(r == i))] for r in range(n)], 1), zp))
        for i in range(n):
            out.append((zq, Matrix([[Fraction(int(c == i)) for c in range(n)]], n)))
        return out

    def sample(self, rng, p=None):
        n = self.G.n
        return (Matrix([[_rand(rng, p)] for _ in range(n)], 1),
                Matrix([[_rand(rng, p) for _ in range(n)]], n))


class OrbitLiftSpace(GSpace):
    """
    Chart for the conjugacy class of ``g0``: h in G, mu(h) = h g0 h^-1.
    G acts by left multiplication; the fibres h Z(g0) are collapsed.
    """

    def __init__(self, G: MatrixGroup, g0: Matrix):
        super().__init__([G])
        if not G.contains(g0):
            raise ValueError("g0 is not in the group")
        self.G, self.g0 = G, g0
        self.name = "C(%s)" % _short(g0)
        self.chart = "lift h -> h g0 h^-1, fibres h*Z(g0) collapsed"
        z = []
        for c in kernel_basis(Matrix([list((b @ g0 - g0 @ b).flat()) for b in G.basis]).T()):
            z.append(G.from_coords(c))
        self.centralizer = z

    def act(self, h, pt):
        return (h[0] @ pt[0],)

    def act_vector(self, h, pt, v):
        return (h[0] @ v[0],)

    def field(self, x, pt):
        return (x[0] @ pt[0],)

    def contains(self, pt):
        return len(pt) == 1 and self.G.contains(pt[0])

    def tangent_basis(self, pt):
        return [(pt[0] @ b,) for b in self.G.basis]

    def vertical_basis(self, pt):
        return [(pt[0] @ z,) for z in self.centralizer]

    def sample(self, rng, p=None):
        return (self.G._sample(rng, p),)


class DoubleSpace(GSpace):
    """G x G with (g1, g2).(a, b) = (g1 a g2^-1, g2 b g1^-1)."""

    def __init__(self, G: MatrixGroup):
        super().__init__([G, G])
        self.G = G
        self.name = "D(%s)" % G.name

    def act(self, h, pt):
        (k1, k2), (a, b) = h, pt
        return (k1 @ a @ k2.inverse(), k2 @ b @ k1.inverse())

    def act_vector(self, h, pt, v):
        (k1, k2), (va, vb) = h, v
        return (k1 @ va @ k2.inverse(), k2 @ vb @ k1.inverse())

    def field(self, x, pt):
        (x1, x2), (a, b) = x, pt
        return (x1 @ a - a @ x2, x2 @ b - b @ x1)

    def contains(self, pt):
        return len(pt) == 2 and self.G.contains(pt[0]) and self.G.contains(pt[1])

    def tangent_basis(self, pt):
        a, b = pt
        n = self.G.n
        z = Matrix.zeros(n, n)
        return [(a @ e, z) for e in self.G.basis] + [(z, b @ e) for e in self.G.basis]

    def sample(self, rng, p=None):
        return (self.G._sample(rng, p), self.G._sample(rng, p))


def _short(m: Matrix) -> str:
    return "[" + ";".join(",".join(str(x) for x in r) for r in m.entries) + "]"


# ---------------------------------------------------------------------------
# space records


@dataclass
class HamiltonianSpace:
    X: GSpace
    mu: Callable                    # pt -> (1 x dim row,)
    gamma: Callable                 # (pt, u, w) -> scalar, alternating
    name: str = ""
    provenance: str = ""

    def gamma_form(self) -> EquivariantForm:
        g = self.gamma
        return EquivariantForm(self.X, 2, 0, lambda x, pt, vs: g(pt, vs[0], vs[1]), 0, "gamma")


@dataclass
class QuasiHamiltonianSpace:
    X: GSpace
    mu: Callable                    # pt -> tuple of group elements
    gamma: Callable                 # (pt, u, w) -> scalar, alternating
    pairings: tuple = ()
    name: str = ""
    provenance: str = ""
    check_omega1: bool = True       # False only for the "drop omega1" perturbation
    history: tuple = ()

    def __post_init__(self):
        if not self.pairings:
            self.pairings = tuple(trace_pairing(G) for G in self.X.groups)
        for P in self.pairings:
            v = check_pairing(P)
            if not (v.symmetric and v.invariant):
                raise ValueError("pairing must be symmetric and invariant")

    @property
    def groups(self):
        return self.X.groups

    def gamma_form(self) -> EquivariantForm:
        g = self.gamma
        return EquivariantForm(self.X, 2, 0, lambda x, pt, vs: g(pt, vs[0], vs[1]), 0, "gamma")

    def target(self):
        return group_target(self.groups, self.pairings)


# ---------------------------------------------------------------------------
# checks


IDENTITY_NAMES = {
    "a": "invariance and equivariance",
    "b": "iota_{v_x} gamma = mu^* <beta, x>",
    "c": "d gamma = -mu^* omega1",
    "d": "ker gamma meets ker d mu trivially",
}

HAM_NAMES = {
    "a": "invariance and equivariance",
    "b": "d gamma = 0",
    "c": "iota_{v_x} gamma = mu^* dx",
    "d": "gamma nondegenerate",
}


@dataclass
class Verdict:
    checks: dict                    # letter -> bool
    names: dict
    failures: dict = field(default_factory=dict)   # letter -> count of bad samples
    samples: int = 0

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return sorted(k for k, v in self.checks.items() if not v)

    def as_dict(self) -> dict:
        return {
            "pass": self.ok,
            "checks": {k: {"name": self.names[k], "pass": v, "bad_samples": self.failures.get(k, 0)}
                       for k, v in sorted(self.checks.items())},
            "samples": self.samples,
        }


def _gram(gamma, pt, basis):
    return Matrix([[gamma(pt, u, w) for w in basis] for u in basis], len(basis))


def _invariance_defects(X: GSpace, gamma, samples: SampleSet, rng, extra=None) -> int:
    bad = 0
    for pt in samples.points:
        h = X.random_group(rng, samples.p)
        u, w = X.random_tangent(rng, pt, samples.p), X.random_tangent(rng, pt, samples.p)
        q = X.act(h, pt)
        if gamma(q, X.act_vector(h, pt, u), X.act_vector(h, pt, w)) != gamma(pt, u, w):
            bad += 1
        elif extra is not None and not extra(h, pt, q):
            bad += 1
    return bad


def _kernel_defect(gamma, mu, X: GSpace, pt) -> bool:
    """True when ker gamma and ker d mu meet outside the collapsed directions."""
    tb = X.tangent_basis(pt)
    if not tb:
        return False
    G = _gram(gamma, pt, tb)
    dmu = [vflat(derivative(mu, pt, b)) for b in tb]
    rows = [list(r) for r in G.entries]
    if dmu and dmu[0]:
        rows += [list(r) for r in Matrix.from_columns(dmu).entries]
    joint = len(tb) - rank(Matrix(rows, len(tb)))
    vertical = X.vertical_basis(pt)
    if not vertical:
        return joint != 0
    basis_m = Matrix.from_columns([vflat(b) for b in tb])
    vcoords = [solve(basis_m, vflat(v)) for v in vertical]
    vdim = span_rank(vcoords)
    # collapsed directions must lie in both kernels
    M = Matrix(rows, len(tb))
    for c in vcoords:
        if any(sum((a * b for a, b in zip(r, c)), Fraction(0)) != 0 for r in M.entries):
            return True
    return joint != vdim


def check_quasi_hamiltonian(q: QuasiHamiltonianSpace, samples: SampleSet | None = None,
                            count: int = 20, seed: int = 0) -> Verdict:
    X = q.X
    samples = samples or SampleSet(X, count, seed)
    rng = random.Random(samples.seed + 104729)
    groups = q.groups

    def mu_ok(h, pt, qpt):
        m0, m1 = q.mu(pt), q.mu(qpt)
        if not all(G.contains(g) for G, g in zip(groups, m1)):
            return False
        return all(k @ g @ k.inverse() == g1 for k, g, g1 in zip(h, m0, m1))

    bad_a = _invariance_defects(X, q.gamma, samples, rng, mu_ok)
    if not all(all(G.contains(g) for G, g in zip(groups, q.mu(pt))) for pt in samples.points):
        bad_a += 1

    Y, target = q.target()
    if not q.check_omega1:
        target = CartanElement((target.component(0),))
    witness = IsotropyWitness(q.gamma_form(), q.mu, target)
    defects = witness.defects(samples)
    bad_d = sum(1 for pt in samples.points if _kernel_defect(q.gamma, q.mu, X, pt))
    failures = {"a": bad_a, "b": defects.get(0, 0), "c": defects.get(1, 0), "d": bad_d}
    return Verdict({k: v == 0 for k, v in failures.items()}, IDENTITY_NAMES, failures,
                   len(samples.points))


def check_hamiltonian(h: HamiltonianSpace, samples: SampleSet | None = None,
                      count: int = 20, seed: int = 0) -> Verdict:
    X = h.X
    samples = samples or SampleSet(X, count, seed)
    rng = random.Random(samples.seed + 104729)
    G = X.groups[0] if X.groups else None
    Y, target = coadjoint_target(G) if G is not None else (None, None)

    def mu_ok(k, pt, qpt):
        return h.mu(qpt) == Y.act(k, h.mu(pt))

    bad_a = _invariance_defects(X, h.gamma, samples, rng, mu_ok if G is not None else None)
    bad_b = sum(1 for _ in _nonzero(de_rham(h.gamma_form()), samples))
    if G is not None:
        witness = IsotropyWitness(h.gamma_form(), h.mu, target)
        bad_c = witness.defects(samples).get(0, 0)
    else:
        bad_c = 0
    bad_d = 0
    for pt in samples.points:
        tb = X.tangent_basis(pt)
        if tb and rank(_gram(h.gamma, pt, tb)) != len(tb):
            bad_d += 1
    failures = {"a": bad_a, "b": bad_b, "c": bad_c, "d": bad_d}
    return Verdict({k: v == 0 for k, v in failures.items()}, HAM_NAMES, failures,
                   len(samples.points))


def _nonzero(f: EquivariantForm, samples: SampleSet):
    for x, pt, vs in samples.arguments(f.degree):
        if f(x, pt, vs) != 0:
            yield pt


# ---------------------------------------------------------------------------
# products, fusion


def _ncomp(X: GSpace) -> int:
    return len(X.sample(random.Random(0)))


def product(q1: QuasiHamiltonianSpace, q2: QuasiHamiltonianSpace) -> QuasiHamiltonianSpace:
    k = _ncomp(q1.X)
    X = ProductSpace(q1.X, q2.X, k)

    def mu(pt):
        return tuple(q1.mu(pt[:k])) + tuple(q2.mu(pt[k:]))

    def gamma(pt, u, w):
        return q1.gamma(pt[:k], u[:k], w[:k]) + q2.gamma(pt[k:], u[k:], w[k:])

    return QuasiHamiltonianSpace(X, mu, gamma, q1.pairings + q2.pairings,
                                 "%s x %s" % (q1.name, q2.name),
                                 "; ".join(x for x in (q1.provenance, q2.provenance) if x),
                                 history=q1.history + q2.history,
                                 check_omega1=q1.check_omega1 and q2.check_omega1)


def fusion_correction(G: MatrixGroup, P: InvariantPairing, g1: Matrix, g2: Matrix,
                      u1: Matrix, u2: Matrix, w1: Matrix, w2: Matrix):
    """(1/2) <mu_1^* theta, mu_2^* theta_bar> on pushed-forward vectors."""
    a, b = g1.inverse(), g2.inverse()
    return HALF * (pair_matrices(G, P, a @ u1, w2 @ b) - pair_matrices(G, P, a @ w1, u2 @ b))


def fuse(q: QuasiHamiltonianSpace, i: int = 0, j: int = 1, verdict: Verdict | None = None,
         samples: int = 6, seed: int = 0) -> QuasiHamiltonianSpace:
    """Fuse group factors i and j: mu_i mu_j replaces mu_i, gamma gets the correction."""
    if i == j or q.groups[i] != q.groups[j]:
        raise ValueError("can only fuse two distinct factors carrying the same group")
    if verdict is None:
        verdict = check_quasi_hamiltonian(q, count=samples, seed=seed)
    if not verdict.ok:
        raise RefusedError("input fails check(s) %s" % ",".join(verdict.failed()))
    X = DiagonalSpace(q.X, i, j)
    G, P = q.groups[i], q.pairings[i]
    keep = [k for k in range(len(q.groups)) if k != j]

    def mu(pt):
        m = q.mu(pt)
        out = list(m)
        out[i] = m[i] @ m[j]
        return tuple(out[k] for k in keep)

    def gamma(pt, u, w):
        m = q.mu(pt)
        du, dw = derivative(q.mu, pt, u), derivative(q.mu, pt, w)
        return q.gamma(pt, u, w) + fusion_correction(G, P, m[i], m[j], du[i], du[j], dw[i], dw[j])

    return QuasiHamiltonianSpace(X, mu, gamma, tuple(q.pairings[k] for k in keep),
                                 "fuse(%s)" % q.name,
                                 "; ".join(x for x in (q.provenance, "fusion correction " + IMPORTED) if x),
                                 history=q.history + (("fuse", i, j),),
                                 check_omega1=q.check_omega1)


def fuse_pair(q1: QuasiHamiltonianSpace, q2: QuasiHamiltonianSpace, samples: int = 3,
              seed: int = 0) -> QuasiHamiltonianSpace:
    """Product of two spaces with the last factor of q1 fused to the first of q2."""
    vs = [check_quasi_hamiltonian(q, count=samples, seed=seed) for q in (q1, q2)]
    for q, v in zip((q1, q2), vs):
        if not v.ok:
            raise RefusedError("%s fails check(s) %s" % (q.name, ",".join(v.failed())))
    # every check is factorwise, so the product passes exactly when both inputs do
    joint = Verdict({k: vs[0].checks[k] and vs[1].checks[k] for k in vs[0].checks},
                    vs[0].names, {}, vs[0].samples + vs[1].samples)
    k = len(q1.groups)
    return fuse(product(q1, q2), k - 1, k, verdict=joint)


def fuse_all(q: QuasiHamiltonianSpace, **kw) -> QuasiHamiltonianSpace:
    """Fuse factors pairwise from the left until one group factor is left."""
    while len(q.groups) > 1:
        q = fuse(q, 0, 1, **kw)
    return q


# ---------------------------------------------------------------------------
# presets


def _pm(G, P):
    return lambda A, B: pair_matrices(G, P, A, B)


def conjugacy_class(G: MatrixGroup, g0: Matrix, P: InvariantPairing | None = None
                    ) -> QuasiHamiltonianSpace:
    """gamma(u, w) = (1/2)(<Ad_g0 t(u), t(w)> - <Ad_g0 t(w), t(u)>), t = h^-1 dh."""
    P = P or trace_pairing(G)
    pm = _pm(G, P)
    X = OrbitLiftSpace(G, g0)
    g0i = g0.inverse()

    def mu(pt):
        return (pt[0] @ g0 @ pt[0].inverse(),)

    def gamma(pt, u, w):
        hi = pt[0].inverse()
        a, b = hi @ u[0], hi @ w[0]
        return HALF * (pm(g0 @ a @ g0i, b) - pm(g0 @ b @ g0i, a))

    return QuasiHamiltonianSpace(X, mu, gamma, (P,), "conjclass-%s" % G.name.lower(),
                                 "conjugacy-class 2-form " + IMPORTED)


def double(G: MatrixGroup, P: InvariantPairing | None = None) -> QuasiHamiltonianSpace:
    """D(G): mu = (ab, a^-1 b^-1), gamma = (1/2)<a^*theta, b^*theta_bar> + (1/2)<a^*theta_bar, b^*theta>."""
    P = P or trace_pairing(G)
    pm = _pm(G, P)

    def mu(pt):
        a, b = pt
        return (a @ b, a.inverse() @ b.inverse())

    def gamma(pt, u, w):
        ai, bi = pt[0].inverse(), pt[1].inverse()
        t1 = pm(ai @ u[0], w[1] @ bi) - pm(ai @ w[0], u[1] @ bi)
        t2 = pm(u[0] @ ai, bi @ w[1]) - pm(w[0] @ ai, bi @ u[1])
        return HALF * (t1 + t2)

    return QuasiHamiltonianSpace(DoubleSpace(G), mu, gamma, (P, P), "double-%s" % G.name.lower(),
                                 "double 2-form " + IMPORTED)


def identity_point(groups, pairings=()) -> QuasiHamiltonianSpace:
    """A point with mu = e and gamma = 0."""
    groups = tuple(groups)

    def mu(pt):
        return tuple(G.identity() for G in groups)

    return QuasiHamiltonianSpace(PointSpace(groups), mu, lambda pt, u, w: Fraction(0),
                                 tuple(pairings), "e-point")


def cotangent(G: MatrixGroup) -> HamiltonianSpace:
    """T^*V: mu(q, p)(x) = p x q, gamma = sum dq ^ dp."""
    X = CotangentSpace(G)

    def mu(pt):
        q, p = pt
        return (Matrix([[(p @ b @ q)[0, 0] for b in G.basis]], G.dim),)

    def gamma(pt, u, w):
        return (u[0].T() @ w[1].T())[0, 0] - (w[0].T() @ u[1].T())[0, 0]

    return HamiltonianSpace(X, mu, gamma, "cotangent-%s" % G.name.lower(), "standard")


def hamiltonian_point(G: MatrixGroup) -> HamiltonianSpace:
    def mu(pt):
        return (Matrix([[Fraction(0)] * G.dim], G.dim),)
    return HamiltonianSpace(PointSpace([G]), mu, lambda pt, u, w: Fraction(0), "point")


SL2_CLASS_REP = ((Fraction(2), Fraction(0)), (Fraction(0), Fraction(1, 2)))

PRESETS = {
    "double-sl2": {"kind": "quasi-hamiltonian", "group": ["sl", 2], "pairing": "trace",
                   "space": "G x G, (g1,g2).(a,b) = (g1 a g2^-1, g2 b g1^-1)",
                   "mu": "(a b, a^-1 b^-1)",
                   "gamma": "1/2 <a*theta, b*theta_bar> + 1/2 <a*theta_bar, b*theta>",
                   "provenance": IMPORTED},
    "conjclass-sl2": {"kind": "quasi-hamiltonian", "group": ["sl", 2], "pairing": "trace",
                      "g0": [[str(x) for x in r] for r in SL2_CLASS_REP],
                      "space": "h in G (left multiplication), fibres h Z(g0) collapsed",
                      "mu": "h g0 h^-1",
                      "gamma": "1/2 (<Ad_g0 theta(u), theta(w)> - <Ad_g0 theta(w), theta(u)>)",
                      "provenance": IMPORTED},
    "fused-double-sl2": {"kind": "quasi-hamiltonian", "group": ["sl", 2], "pairing": "trace",
                         "space": "G x G with conjugation", "mu": "a b a^-1 b^-1",
                         "gamma": "double 2-form + 1/2 <(ab)*theta, (a^-1 b^-1)*theta_bar>",
                         "provenance": IMPORTED},
    "e-point-sl2": {"kind": "quasi-hamiltonian", "group": ["sl", 2], "pairing": "trace",
                    "space": "point", "mu": "e", "gamma": "0", "provenance": "trivial"},
    "cotangent-sl2": {"kind": "hamiltonian", "group": ["sl", 2],
                      "space": "T*V, V = K^2, (q, p) -> (h q, p h^-1)",
                      "mu": "p x q", "gamma": "sum dq ^ dp", "provenance": "standard"},
}


def preset_catalog() -> str:
    return json.dumps({"schema_version": REPORT_SCHEMA_VERSION, "presets": PRESETS},
                      sort_keys=True, indent=2)


def load_preset(name: str, G: MatrixGroup | None = None):
    """Build a preset by name (family suffix selects the group unless G is given)."""
    if name not in PRESETS:
        raise KeyError("unknown preset %r (known: %s)" % (name, ", ".join(sorted(PRESETS))))
    G = G or MatrixGroup("sl", 2)
    if name.startswith("double"):
        return double(G)
    if name.startswith("fused-double"):
        return fuse(double(G))
    if name.startswith("conjclass"):
        g0 = Matrix([list(r) for r in SL2_CLASS_REP], 2)
        return conjugacy_class(G, g0)
    if name.startswith("e-point"):
        return identity_point([G], (trace_pairing(G),))
    return cotangent(G)


# ---------------------------------------------------------------------------
# perturbations


PERTURBATIONS = {
    "mu": ("a", "mu scaled by 2 (leaves the group)"),
    "gamma": ("b", "gamma scaled by 2"),
    "omega1": ("c", "omega1 term dropped from the closure target"),
}


def perturb(q, kind: str, factor=Fraction(2)):
    """Return a perturbed copy; PERTURBATIONS maps each kind to its named identity."""
    if kind == "mu":
        mu = q.mu
        return replace(q, mu=lambda pt: tuple(m.scale(factor) for m in mu(pt)),
                       name=q.name + "+perturb(mu)")
    if kind == "gamma":
        g = q.gamma
        return replace(q, gamma=lambda pt, u, w: factor * g(pt, u, w),
                       name=q.name + "+perturb(gamma)")
    if kind == "omega1":
        if not isinstance(q, QuasiHamiltonianSpace):
            raise ValueError("omega1 perturbation applies to quasi-Hamiltonian spaces")
        return replace(q, check_omega1=False, name=q.name + "+perturb(omega1)")
    raise ValueError("unknown perturbation %r" % kind)


# ---------------------------------------------------------------------------
# reduction


@dataclass
class ReductionReport:
    dimension: int
    descends: bool
    skew: bool
    rank: int
    kernel_dim: int
    orbit_dim: int

    @property
    def nondegenerate(self) -> bool:
        return self.descends and self.skew and self.rank == self.dimension

    def as_dict(self) -> dict:
        return {"dimension": self.dimension, "descends": self.descends, "skew": self.skew,
                "rank": self.rank, "nondegenerate": self.nondegenerate,
                "ker_dmu_dim": self.kernel_dim, "orbit_dim": self.orbit_dim}


def reduce(q: QuasiHamiltonianSpace, pt) -> ReductionReport:
    """gamma on ker(d mu)/(orbit directions) at a point of mu^-1(e)."""
    X = q.X
    if not X.contains(pt):
        raise ValueError("point is not on the space")
    if any(m != G.identity() for G, m in zip(q.groups, q.mu(pt))):
        raise ValueError("mu(pt) is not the identity")
    tb = X.tangent_basis(pt)
    m = len(tb)
    if m == 0:
        return ReductionReport(0, True, True, 0, 0, 0)
    basis_m = Matrix.from_columns([vflat(b) for b in tb])
    dmu = Matrix.from_columns([vflat(derivative(q.mu, pt, b)) for b in tb])
    K = kernel_basis(dmu) if dmu.rows else kernel_basis(Matrix([], m))
    orbit = []
    for i, G in enumerate(q.groups):
        for b in G.basis:
            x = tuple(b if j == i else Matrix.zeros(H.n, H.n) for j, H in enumerate(q.groups))
            orbit.append(solve(basis_m, vflat(X.field(x, pt))))
    orbit += [solve(basis_m, vflat(v)) for v in X.vertical_basis(pt)]
    odim = span_rank(orbit) if orbit else 0
    Gm = _gram(q.gamma, pt, tb)

    def form(c1, c2):
        return sum((c1[i] * Gm[i, j] * c2[j] for i in range(m) for j in range(m)
                    if c1[i] and c2[j]), Fraction(0))

    descends = all(form(k, o) == 0 for k in K for o in orbit)
    inside = all(span_rank(K + [o]) == len(K) for o in orbit) if K else not orbit
    GK = Matrix([[form(a, b) for b in K] for a in K], len(K)) if K else Matrix([], 0)
    skew = GK == GK.T().scale(-1) if K else True
    r = rank(GK) if K else 0
    return ReductionReport(len(K) - odim, descends and inside, skew, r, len(K), odim)


# ---------------------------------------------------------------------------
# tangent-level Lagrangian structures and correspondences


from .shiftsym import (ShiftedTwoForm, TangentComplex, beta_matrix, map_defects,  # noqa: E402
                       mapping_cone, nondegenerate as _nondeg, tangent_complex_quotient)


def _blockdiag(a: Matrix, b: Matrix) -> Matrix:
    rows = [list(r) + [Fraction(0)] * b.cols for r in a.entries]
    rows += [[Fraction(0)] * a.cols + list(r) for r in b.entries]
    out = Matrix(rows, a.cols + b.cols)
    if out.rows != a.rows + b.rows:
        out = Matrix([[Fraction(0)] * (a.cols + b.cols) for _ in range(a.rows + b.rows)],
                     a.cols + b.cols)
    return out


def _hcat(a: Matrix, b: Matrix) -> Matrix:
    if a.rows != b.rows:
        raise ValueError("row mismatch")
    return Matrix([list(r) + list(s) for r, s in zip(a.entries, b.entries)] if a.rows else [],
                  a.cols + b.cols)


def _vcat(a: Matrix, b: Matrix) -> Matrix:
    if a.cols != b.cols:
        raise ValueError("column mismatch")
    return Matrix([list(r) for r in a.entries] + [list(r) for r in b.entries], a.cols)


def _zm(r, c):
    return Matrix.zeros(r, c)


def direct_sum(t1: TangentComplex, t2: TangentComplex) -> TangentComplex:
    degs = set(t1.dims) | set(t2.dims)
    dims = {k: t1.dim(k) + t2.dim(k) for k in degs}
    d = {k: _blockdiag(t1.diff(k), t2.diff(k)) for k in degs if dims.get(k) and dims.get(k + 1)}
    return TangentComplex(dims, d, (t1.point, t2.point))


def sum_forms(w1: ShiftedTwoForm, t1, w2: ShiftedTwoForm, t2, sign2=1) -> ShiftedTwoForm:
    if w1.n != w2.n:
        raise ValueError("shift mismatch")
    keys = set(w1.blocks) | set(w2.blocks)
    blocks = {(a, b): _blockdiag(w1.block(t1, a, b), w2.block(t2, a, b).scale(sign2))
              for a, b in keys if a + b == -w1.n}
    return ShiftedTwoForm(w1.n, blocks, "%s+%s" % (w1.label, w2.label))


@dataclass
class SymplecticPoint:
    """A shifted symplectic target at one point: complex plus form."""

    t: TangentComplex
    form: ShiftedTwoForm
    name: str = ""

    @property
    def n(self) -> int:
        return self.form.n

    def opposite(self) -> "SymplecticPoint":
        blocks = {k: m.scale(-1) for k, m in self.form.blocks.items()}
        return SymplecticPoint(self.t, ShiftedTwoForm(self.n, blocks, "-" + self.form.label),
                               self.name + "-bar")

    def __add__(self, other: "SymplecticPoint") -> "SymplecticPoint":
        return SymplecticPoint(direct_sum(self.t, other.t),
                               sum_forms(self.form, self.t, other.form, other.t),
                               "%s x %s" % (self.name, other.name))

    def same_as(self, other: "SymplecticPoint") -> bool:
        if self.n != other.n or {k: v for k, v in self.t.dims.items() if v} != \
                {k: v for k, v in other.t.dims.items() if v}:
            return False
        degs = self.t.degrees
        if any(self.t.diff(k) != other.t.diff(k) for k in degs):
            return False
        return all(self.form.block(self.t, a, b) == other.form.block(other.t, a, b)
                   for a in degs for b in degs)


def point_target(n: int) -> SymplecticPoint:
    return SymplecticPoint(TangentComplex({}, {}), ShiftedTwoForm(n, {}), "pt")


def _fmap(f: dict, src: TangentComplex, tgt: TangentComplex, k: int) -> Matrix:
    m = f.get(k)
    return m if m is not None else _zm(tgt.dim(k), src.dim(k))


@dataclass
class LagrangianDatum:
    """
    Chain map f: apex -> target together with an isotropy eta (a form of
    shift n-1 on the apex) with f^*omega + D eta = 0, where
    D eta(a, b) = eta(da, b) + (-1)^|a| eta(a, db).
    """

    target: SymplecticPoint
    apex: TangentComplex
    f: dict
    eta: ShiftedTwoForm
    name: str = ""

    @property
    def n(self) -> int:
        return self.target.n

    def fk(self, k: int) -> Matrix:
        return _fmap(self.f, self.apex, self.target.t, k)

    def chain_map_ok(self) -> bool:
        return not map_defects(self.apex, self.target.t, self.fk)

    def isotropy_defects(self) -> list:
        L, T, w, e = self.apex, self.target.t, self.target.form, self.eta
        bad = []
        for i in L.degrees:
            j = -self.n - i
            if not L.dim(j):
                continue
            pulled = self.fk(i).T() @ w.block(T, i, j) @ self.fk(j)
            de = L.diff(i).T() @ e.block(L, i + 1, j)
            de = de + e.block(L, i, j + 1).scale(-1 if i % 2 else 1) @ L.diff(j)
            if pulled + de != _zm(L.dim(i), L.dim(j)):
                bad.append((i, j))
        return bad

    def relative(self) -> TangentComplex:
        """Fiber of apex -> target: degree k is apex^k + target^{k-1}."""
        L, T = self.apex, self.target.t
        degs = set(L.dims) | {k + 1 for k in T.dims}
        dims = {k: L.dim(k) + T.dim(k - 1) for k in degs}
        d = {}
        for k in degs:
            if not dims.get(k) or not dims.get(k + 1):
                continue
            top = _hcat(L.diff(k), _zm(L.dim(k + 1), T.dim(k - 1)))
            bot = _hcat(self.fk(k), T.diff(k - 1).scale(-1))
            d[k] = _vcat(top, bot)
        return TangentComplex(dims, d, L.point)

    def psi(self, k: int) -> Matrix:
        """T_f^k -> (apex^{1-n-k})^*: (l, t) -> eta(l, -) + omega(t, f -)."""
        L, T, w = self.apex, self.target.t, self.target.form
        j = 1 - self.n - k
        left = self.eta.block(L, k, j).T()
        right = (w.block(T, k - 1, j) @ self.fk(j)).T()
        return _hcat(left, right)

    def nondegenerate(self) -> bool:
        rel = self.relative()
        dual = self.apex.dual(self.n - 1)
        bad = map_defects(rel, dual, self.psi)
        if bad:
            raise ValueError("relative pairing is not a chain map in degrees %s" % bad)
        return mapping_cone(rel, dual, self.psi).is_acyclic()

    def verdict(self) -> dict:
        iso = not self.isotropy_defects()
        chain = self.chain_map_ok()
        nd = chain and iso and self.nondegenerate()
        return {"chain_map": chain, "isotropic": iso, "nondegenerate": nd,
                "lagrangian": chain and iso and nd}


@dataclass
class LagrangianCorrespondence:
    """A Lagrangian datum into left x right-bar."""

    left: SymplecticPoint
    right: SymplecticPoint
    apex: TangentComplex
    f: dict                 # apex -> left
    g: dict                 # apex -> right
    eta: ShiftedTwoForm
    name: str = ""

    def datum(self) -> LagrangianDatum:
        tgt = self.left + self.right.opposite()
        fg = {}
        for k in set(self.f) | set(self.g) | set(self.apex.dims):
            fg[k] = _vcat(_fmap(self.f, self.apex, self.left.t, k),
                          _fmap(self.g, self.apex, self.right.t, k))
        return LagrangianDatum(tgt, self.apex, fg, self.eta, self.name)

    def verdict(self) -> dict:
        return self.datum().verdict()


def identity_correspondence(Y: SymplecticPoint) -> LagrangianCorrespondence:
    ident = {k: Matrix.identity(v) for k, v in Y.t.dims.items() if v}
    return LagrangianCorrespondence(Y, Y, Y.t, ident, dict(ident),
                                    ShiftedTwoForm(Y.n - 1, {}), "id(%s)" % Y.name)


def lagrangian_as_correspondence(lag: LagrangianDatum, side: str = "left"
                                 ) -> LagrangianCorrespondence:
    """L -> X as X <-> pt (side='left') or pt <-> X-bar... as pt <-> X (side='right')."""
    P = point_target(lag.n)
    if side == "left":
        return LagrangianCorrespondence(lag.target, P, lag.apex, dict(lag.f), {}, lag.eta, lag.name)
    eta = ShiftedTwoForm(lag.eta.n, {k: m.scale(-1) for k, m in lag.eta.blocks.items()})
    return LagrangianCorrespondence(P, lag.target, lag.apex, {}, dict(lag.f), eta, lag.name)


def compose_correspondences(c1: LagrangianCorrespondence, c2: LagrangianCorrespondence,
                            ) -> LagrangianCorrespondence:
    """
    Homotopy fibre product over the middle target: apex^k = A^k + B^k + Y^{k-1}
    with d(a, b, y) = (da, db, g1 a - f2 b - dy).  The new isotropy is
    eta1 + eta2 - 1/2 [omega_Y(y, g1 a' + f2 b') + (-1)^|p| omega_Y(g1 a + f2 b, y')],
    which solves D eta = -(pulled back forms) given the two input witnesses.
    """
    if not c1.right.same_as(c2.left):
        raise ValueError("middle targets differ")
    A, B, Y, w = c1.apex, c2.apex, c1.right.t, c1.right.form
    n = c1.right.n
    degs = set(A.dims) | set(B.dims) | {k + 1 for k in Y.dims}
    dims = {k: A.dim(k) + B.dim(k) + Y.dim(k - 1) for k in degs}
    d = {}
    for k in degs:
        if not dims.get(k) or not dims.get(k + 1):
            continue
        g1, f2 = _fmap(c1.g, A, Y, k), _fmap(c2.f, B, Y, k)
        r1 = _hcat(_hcat(A.diff(k), _zm(A.dim(k + 1), B.dim(k))), _zm(A.dim(k + 1), Y.dim(k - 1)))
        r2 = _hcat(_hcat(_zm(B.dim(k + 1), A.dim(k)), B.diff(k)), _zm(B.dim(k + 1), Y.dim(k - 1)))
        r3 = _hcat(_hcat(g1, f2.scale(-1)), Y.diff(k - 1).scale(-1))
        d[k] = _vcat(_vcat(r1, r2), r3)
    apex = TangentComplex(dims, d, (A.point, B.point))

    def proj(maps, src, tgt, which):
        out = {}
        for k in degs:
            m = _fmap(maps, src, tgt, k)
            za, zb, zy = _zm(tgt.dim(k), A.dim(k)), _zm(tgt.dim(k), B.dim(k)), _zm(tgt.dim(k), Y.dim(k - 1))
            out[k] = _hcat(_hcat(m if which == 0 else za, m if which == 1 else zb), zy)
        return out

    f = proj(c1.f, A, c1.left.t, 0)
    g = proj(c2.g, B, c2.right.t, 1)
    blocks = {}
    for i in degs:
        j = 1 - n - i
        if j not in degs:
            continue
        e1, e2 = c1.eta.block(A, i, j), c2.eta.block(B, i, j)
        # y-part of degree i sits in Y^{i-1}, pairing with Y^{j} through omega
        y_a = (w.block(Y, i - 1, j) @ _fmap(c1.g, A, Y, j)).scale(-HALF)
        y_b = (w.block(Y, i - 1, j) @ _fmap(c2.f, B, Y, j)).scale(-HALF)
        a_y = (_fmap(c1.g, A, Y, i).T() @ w.block(Y, i, j - 1)).scale(-HALF * (-1) ** (i % 2))
        b_y = (_fmap(c2.f, B, Y, i).T() @ w.block(Y, i, j - 1)).scale(-HALF * (-1) ** (i % 2))
        row_a = _hcat(_hcat(e1, _zm(A.dim(i), B.dim(j))), a_y)
        row_b = _hcat(_hcat(_zm(B.dim(i), A.dim(j)), e2), b_y)
        row_y = _hcat(_hcat(y_a, y_b), _zm(Y.dim(i - 1), Y.dim(j - 1)))
        blocks[(i, j)] = _vcat(_vcat(row_a, row_b), row_y)
    eta = ShiftedTwoForm(n - 1, blocks, "composite")
    return LagrangianCorrespondence(c1.left, c2.right, apex, f, g, eta,
                                    "%s ; %s" % (c1.name, c2.name))


def adjoint_target(groups, pairings, gs) -> SymplecticPoint:
    """[G/G^ad] (product over factors) at the group elements gs."""
    Y = MultiAdjointSpace(groups)
    t = tangent_complex_quotient(Y, tuple(gs))
    blocks = {}
    Bs = [beta_matrix(G, P, g) for G, P, g in zip(groups, pairings, gs)]
    acc = None
    for B in Bs:
        acc = B if acc is None else _blockdiag(acc, B)
    if acc is None:
        acc = _zm(0, 0)
    blocks[(0, -1)] = acc
    blocks[(-1, 0)] = acc.T().scale(-1)
    return SymplecticPoint(t, ShiftedTwoForm(1, blocks, "beta"), Y.name)


def _quotient_basis(X: GSpace, pt):
    """Tangent basis modulo the collapsed directions, and a coordinate map."""
    tb, vert = X.tangent_basis(pt), X.vertical_basis(pt)
    flat_v = [vflat(v) for v in vert]
    flat_t = [vflat(b) for b in tb]
    idx = independent_subset_after(flat_v, flat_t)
    comp = [tb[i] for i in idx]
    cols = [vflat(c) for c in comp] + flat_v
    M = Matrix.from_columns(cols) if cols else None

    def coords(v):
        if M is None:
            return ()
        c = solve(M, vflat(v))
        if c is None:
            raise ValueError("vector is not tangent")
        return c[:len(comp)]

    return comp, coords


def independent_subset_after(fixed, candidates):
    """Indices of candidates extending ``fixed`` to a basis of their joint span."""
    from .exactalg import independent_subset
    idx = independent_subset(list(fixed) + list(candidates)) if (fixed or candidates) else []
    return [i - len(fixed) for i in idx if i >= len(fixed)]


def lagrangian_at(q: QuasiHamiltonianSpace, pt) -> LagrangianDatum:
    """The tangent-level Lagrangian [X/G] -> [G/G^ad] at pt."""
    X = q.X
    gs = q.mu(pt)
    target = adjoint_target(q.groups, q.pairings, gs)
    comp, coords = _quotient_basis(X, pt)
    lie = []
    for i, G in enumerate(q.groups):
        for b in G.basis:
            lie.append(tuple(b if j == i else Matrix.zeros(H.n, H.n) for j, H in enumerate(q.groups)))
    m0, m1 = len(comp), len(lie)
    d = {}
    if m0 and m1:
        d[-1] = Matrix.from_columns([coords(X.field(x, pt)) for x in lie])
    apex = TangentComplex({-1: m1, 0: m0}, d, pt)
    Ybasis = MultiAdjointSpace(q.groups).tangent_basis(gs)
    YM = Matrix.from_columns([vflat(b) for b in Ybasis])
    f = {-1: Matrix.identity(m1)}
    if m0:
        f[0] = Matrix.from_columns([solve(YM, vflat(derivative(q.mu, pt, c))) for c in comp])
    eta = ShiftedTwoForm(0, {(0, 0): _gram(q.gamma, pt, comp)} if m0 else {}, "gamma")
    return LagrangianDatum(target, apex, f, eta, q.name)
