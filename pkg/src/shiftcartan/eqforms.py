"""
Cartan-model equivariant forms on affine G-spaces.

A point of a G-space is a tuple of matrices (one per ambient factor); a
tangent vector is a tuple of matrices of the same shapes; a Lie element is a
tuple of matrices, one per factor of the acting group.

Forms are stored as exact evaluators ``(x, point, vectors) -> scalar`` that
make sense on the whole ambient space.  Because pullback to the subvariety
commutes with d, the de Rham differential can be computed with constant
vector fields in ambient coordinates and jets for the directional
derivatives.  Equality of forms is decided by evaluation at random exact
arguments.

Gradings: with 1-forms in degree -1, Lie variables in degree 0 and ``u`` in
degree 2, a summand has total degree ``2*u_power - form_degree`` and weight
``form_degree + lie_degree - u_power``; ``d_LR + u d`` raises the degree by
one and keeps the weight.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .exactalg import Fp, Jet, Matrix, Polynomial, fresh_tag, in_span, tangent_part
from .liecore import (InvariantPairing, MatrixGroup, bracket, conjugation_field,
                      pair_matrices)

HALF = Fraction(1, 2)


class ArityError(ValueError):
    pass


class FormDegreeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# vectors (tuples of matrices)


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, v):
    return tuple(a.scale(c) for a in v)


def vflat(v) -> tuple:
    return tuple(x for m in v for x in m.flat())


def vzero(pt):
    return tuple(Matrix.zeros(m.rows, m.cols, m[0, 0] - m[0, 0]) for m in pt)


def vcombo(coeffs, vectors, like):
    acc = vzero(like)
    for c, v in zip(coeffs, vectors):
        if c:
            acc = vadd(acc, vscale(c, v))
    return acc


def jet_point(pt, v, tag: int):
    return tuple(Matrix([[Jet(a, b, tag) for a, b in zip(r, s)] for r, s in zip(m.entries, w.entries)],
                        m.cols) for m, w in zip(pt, v))


def jet_matrix(m: Matrix, w: Matrix, tag: int) -> Matrix:
    return Matrix([[Jet(a, b, tag) for a, b in zip(r, s)] for r, s in zip(m.entries, w.entries)],
                  m.cols)


def tangent_of(value, tag: int):
    """Tangent part of a scalar, a matrix or a tuple of matrices."""
    if isinstance(value, tuple):
        return tuple(tangent_of(m, tag) for m in value)
    if isinstance(value, Matrix):
        return value.map(lambda t: _zero_like(tangent_part(t, tag), t))
    return tangent_part(value, tag)


def _zero_like(t, ref):
    if isinstance(t, int) and t == 0:
        base = ref
        while isinstance(base, Jet):
            base = base.value
        return base - base
    return t


def derivative(fn: Callable, pt, v):
    """Directional derivative of a point function along v (by jets)."""
    tag = fresh_tag()
    return tangent_of(fn(jet_point(pt, v, tag)), tag)


def _one_like(m: Matrix):
    x = m[0, 0]
    while isinstance(x, Jet):
        x = x.value
    return x - x + 1


# ---------------------------------------------------------------------------
# G-spaces


class GSpace:
    """
    An affine variety with an action of a product of matrix groups.

    Subclasses provide ``act``, ``contains``, ``tangent_basis`` and
    ``sample``; the generating vector field and the action on tangent
    vectors are obtained by differentiating ``act``.
    """

    name = "space"
    chart = "ambient matrix coordinates"

    def __init__(self, groups: Sequence[MatrixGroup]):
        self.groups = tuple(groups)

    def act(self, h, pt):
        raise NotImplementedError

    def act_vector(self, h, pt, v):
        return derivative(lambda q: self.act(h, q), pt, v)

    def field(self, x, pt):
        tag = fresh_tag()
        one = _one_like(pt[0]) if pt else Fraction(1)
        h = tuple(jet_matrix(Matrix.identity(G.n, one), xi, tag) for G, xi in zip(self.groups, x))
        return tangent_of(self.act(h, pt), tag)

    def contains(self, pt) -> bool:
        raise NotImplementedError

    def tangent_basis(self, pt) -> list:
        raise NotImplementedError

    def vertical_basis(self, pt) -> list:
        """Directions collapsed by the parametrization (empty unless lifted)."""
        return []

    def sample(self, rng: random.Random, p=None):
        raise NotImplementedError

    def is_tangent(self, pt, v) -> bool:
        basis = [vflat(b) for b in self.tangent_basis(pt)]
        if not basis:
            return all(x == 0 for x in vflat(v))
        return in_span(basis, vflat(v))

    def random_tangent(self, rng: random.Random, pt, p=None):
        basis = self.tangent_basis(pt)
        coeffs = [_rand(rng, p) for _ in basis]
        if not basis:
            return vzero(pt)
        return vcombo(coeffs, basis, pt)

    def random_lie(self, rng: random.Random, p=None):
        return tuple(G.random_lie(rng, p) for G in self.groups)

    def random_group(self, rng: random.Random, p=None):
        return tuple(G._sample(rng, p) for G in self.groups)

    @property
    def dim_hint(self) -> str:
        return self.name

    def __repr__(self):
        return "<%s %s>" % (type(self).__name__, self.name)


def _rand(rng, p=None, bound=3):
    if p:
        return Fp(rng.randint(0, p - 1), p)
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


class AdjointSpace(GSpace):
    """G acting on itself by conjugation."""

    def __init__(self, G: MatrixGroup):
        super().__init__([G])
        self.G = G
        self.name = "%s^ad" % G.name

    def act(self, h, pt):
        (k,), (g,) = h, pt
        return (k @ g @ k.inverse(),)

    def act_vector(self, h, pt, v):
        k = h[0]
        return (k @ v[0] @ k.inverse(),)

    def field(self, x, pt):
        return (conjugation_field(x[0], pt[0]),)

    def contains(self, pt):
        return len(pt) == 1 and self.G.contains(pt[0])

    def tangent_basis(self, pt):
        g = pt[0]
        return [(g @ b,) for b in self.G.basis]

    def sample(self, rng, p=None):
        return (self.G._sample(rng, p),)


class PointSpace(GSpace):
    """A point, with a trivial action of the given groups."""

    def __init__(self, groups):
        super().__init__(groups)
        self.name = "pt"

    def act(self, h, pt):
        return pt

    def field(self, x, pt):
        return ()

    def act_vector(self, h, pt, v):
        return ()

    def contains(self, pt):
        return pt == ()

    def tangent_basis(self, pt):
        return []

    def sample(self, rng, p=None):
        return ()


class ProductSpace(GSpace):
    def __init__(self, X: GSpace, Y: GSpace, ncomp_x: int):
        super().__init__(X.groups + Y.groups)
        self.X, self.Y, self.k = X, Y, ncomp_x
        self.name = "%s x %s" % (X.name, Y.name)
        self.chart = "%s; %s" % (X.chart, Y.chart)

    def _split(self, pt):
        return pt[:self.k], pt[self.k:]

    def _hsplit(self, h):
        n = len(self.X.groups)
        return h[:n], h[n:]

    def act(self, h, pt):
        hx, hy = self._hsplit(h)
        px, py = self._split(pt)
        return self.X.act(hx, px) + self.Y.act(hy, py)

    def act_vector(self, h, pt, v):
        hx, hy = self._hsplit(h)
        px, py = self._split(pt)
        vx, vy = self._split(v)
        return self.X.act_vector(hx, px, vx) + self.Y.act_vector(hy, py, vy)

    def field(self, x, pt):
        xx, xy = self._hsplit(x)
        px, py = self._split(pt)
        return self.X.field(xx, px) + self.Y.field(xy, py)

    def contains(self, pt):
        px, py = self._split(pt)
        return self.X.contains(px) and self.Y.contains(py)

    def _embed(self, basis_x, basis_y, px, py):
        zx, zy = vzero(px), vzero(py)
        return [b + zy for b in basis_x] + [zx + b for b in basis_y]

    def tangent_basis(self, pt):
        px, py = self._split(pt)
        return self._embed(self.X.tangent_basis(px), self.Y.tangent_basis(py), px, py)

    def vertical_basis(self, pt):
        px, py = self._split(pt)
        return self._embed(self.X.vertical_basis(px), self.Y.vertical_basis(py), px, py)

    def sample(self, rng, p=None):
        return self.X.sample(rng, p) + self.Y.sample(rng, p)


class DiagonalSpace(GSpace):
    """Restrict the action to the subgroup where factor ``j`` equals factor ``i``."""

    def __init__(self, X: GSpace, i: int, j: int):
        if X.groups[i] != X.groups[j]:
            raise ValueError("cannot identify different group factors")
        groups = [G for k, G in enumerate(X.groups) if k != j]
        super().__init__(groups)
        self.X, self.i, self.j = X, i, j
        self.name = X.name
        self.chart = X.chart

    def lift(self, h):
        h = list(h)
        i_new = self.i if self.i < self.j else self.i - 1
        h.insert(self.j, h[i_new])
        return tuple(h)

    def act(self, h, pt):
        return self.X.act(self.lift(h), pt)

    def act_vector(self, h, pt, v):
        return self.X.act_vector(self.lift(h), pt, v)

    def field(self, x, pt):
        return self.X.field(self.lift(x), pt)

    def contains(self, pt):
        return self.X.contains(pt)

    def tangent_basis(self, pt):
        return self.X.tangent_basis(pt)

    def vertical_basis(self, pt):
        return self.X.vertical_basis(pt)

    def sample(self, rng, p=None):
        return self.X.sample(rng, p)


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True)
class EquivariantForm:
    space: GSpace
    degree: int
    lie_degree: int
    evaluator: Callable = field(repr=False, compare=False)
    u_power: int = 0
    label: str = ""

    @property
    def total_degree(self) -> int:
        return 2 * self.u_power - self.degree

    @property
    def weight(self) -> int:
        return self.degree + self.lie_degree - self.u_power

    def __call__(self, x, pt, vectors):
        return self.evaluator(x, pt, list(vectors))

    def with_u(self, k: int) -> "EquivariantForm":
        return EquivariantForm(self.space, self.degree, self.lie_degree, self.evaluator, k, self.label)

    def __add__(self, other: "EquivariantForm") -> "EquivariantForm":
        if (self.degree, self.u_power) != (other.degree, other.u_power):
            raise FormDegreeError("adding forms of different degree")
        f, g = self.evaluator, other.evaluator
        return EquivariantForm(self.space, self.degree, max(self.lie_degree, other.lie_degree),
                               lambda x, pt, vs: f(x, pt, vs) + g(x, pt, vs), self.u_power,
                               "(%s + %s)" % (self.label, other.label))

    def scale(self, c) -> "EquivariantForm":
        f = self.evaluator
        return EquivariantForm(self.space, self.degree, self.lie_degree,
                               lambda x, pt, vs: c * f(x, pt, vs), self.u_power,
                               "%s*%s" % (c, self.label))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)


def eval_form(f: EquivariantForm, x, pt, vectors, check: bool = True):
    """Evaluate an equivariant form; checks arity and (optionally) tangency."""
    if len(vectors) != f.degree:
        raise ArityError("form of degree %d needs %d vectors, got %d"
                         % (f.degree, f.degree, len(vectors)))
    if check:
        for v in vectors:
            if not f.space.is_tangent(pt, v):
                raise ValueError("vector is not tangent to %s at the point" % f.space.name)
    return f(x, pt, vectors)


def zero_form(space: GSpace, degree: int, lie_degree: int = 0, u_power: int = 0) -> EquivariantForm:
    return EquivariantForm(space, degree, lie_degree, lambda x, pt, vs: Fraction(0), u_power, "0")


def constant_function(space: GSpace, c) -> EquivariantForm:
    return EquivariantForm(space, 0, 0, lambda x, pt, vs: c, 0, str(c))


def de_rham(f: EquivariantForm) -> EquivariantForm:
    """Exact de Rham differential (constant ambient extension of vectors)."""
    ev = f.evaluator

    def dev(x, pt, vs):
        total = Fraction(0)
        for i, v in enumerate(vs):
            tag = fresh_tag()
            val = ev(x, jet_point(pt, v, tag), vs[:i] + vs[i + 1:])
            term = tangent_part(val, tag)
            total = total + term if i % 2 == 0 else total - term
        return total

    return EquivariantForm(f.space, f.degree + 1, f.lie_degree, dev, f.u_power, "d(%s)" % f.label)


def contract_action(f: EquivariantForm) -> EquivariantForm:
    """x -> iota_{v_x} f(x)."""
    if f.degree == 0:
        raise FormDegreeError("cannot contract a 0-form")
    ev = f.evaluator
    space = f.space

    def cev(x, pt, vs):
        return ev(x, pt, [space.field(x, pt)] + list(vs))

    return EquivariantForm(space, f.degree - 1, f.lie_degree + 1, cev, f.u_power,
                           "i(%s)" % f.label)


def d_LR(f: EquivariantForm) -> EquivariantForm:
    """d_LR(f)(x) = -iota_{v_x} f(x)."""
    if f.degree == 0:
        return zero_form(f.space, 0, f.lie_degree + 1, f.u_power)
    return -contract_action(f)


@dataclass(frozen=True)
class CartanElement:
    summands: tuple  # EquivariantForm, distinct u_powers

    def __post_init__(self):
        us = [s.u_power for s in self.summands]
        if len(set(us)) != len(us):
            raise FormDegreeError("summands must have distinct u powers")
        degs = {s.total_degree for s in self.summands}
        if len(degs) > 1:
            raise FormDegreeError("summands must share one total degree, got %s" % sorted(degs))

    def component(self, k: int) -> EquivariantForm | None:
        for s in self.summands:
            if s.u_power == k:
                return s
        return None

    @property
    def u_powers(self) -> list[int]:
        return sorted(s.u_power for s in self.summands)


def cartan_diff(c: CartanElement) -> CartanElement:
    """(d_LR + u d) applied summandwise, regrouped by powers of u."""
    parts: dict[int, list] = {}
    for s in c.summands:
        parts.setdefault(s.u_power, []).append(d_LR(s))
        parts.setdefault(s.u_power + 1, []).append(de_rham(s).with_u(s.u_power + 1))
    out = []
    for k in sorted(parts):
        acc = parts[k][0]
        for t in parts[k][1:]:
            acc = _add_loose(acc, t)
        out.append(acc)
    return CartanElement(tuple(out))


def _add_loose(a: EquivariantForm, b: EquivariantForm) -> EquivariantForm:
    if a.degree != b.degree:
        raise FormDegreeError("inhomogeneous Cartan element")
    return a + b


def pullback(f: EquivariantForm, phi: Callable, source: GSpace, label: str = "") -> EquivariantForm:
    """phi^* f for a point map phi: source -> f.space (pushing vectors by jets)."""
    ev = f.evaluator

    def pev(x, pt, vs):
        q = phi(pt)
        pushed = [derivative(phi, pt, v) for v in vs]
        return ev(x, q, pushed)

    return EquivariantForm(source, f.degree, f.lie_degree, pev, f.u_power,
                           label or "pullback(%s)" % f.label)


# ---------------------------------------------------------------------------
# forms with polynomial coefficients


def polynomial_form(space: GSpace, degree: int, coefficients: dict, label: str = "") -> EquivariantForm:
    """
    sum_I c_I dx_{I_1} ^ ... ^ dx_{I_p} in the flattened ambient coordinates.

    ``coefficients`` maps increasing index tuples to Polynomials in those
    coordinates.
    """
    items = [(tuple(I), c) for I, c in coefficients.items()]
    for I, _ in items:
        if len(I) != degree or list(I) != sorted(set(I)):
            raise ValueError("index tuples must be strictly increasing of length %d" % degree)

    def pev(x, pt, vs):
        coords = vflat(pt)
        flats = [vflat(v) for v in vs]
        total = Fraction(0)
        for I, c in items:
            cval = c(coords)
            if degree == 0:
                total = total + cval
                continue
            m = Matrix([[fv[i] for i in I] for fv in flats], degree)
            total = total + cval * m.det()
        return total

    return EquivariantForm(space, degree, 0, pev, 0, label or "poly-form")


# ---------------------------------------------------------------------------
# [G/G^ad]


def adjoint_pairing(G: MatrixGroup, P: InvariantPairing):
    def pair(X, Y):
        return pair_matrices(G, P, X, Y)
    return pair


def build_omega0(G: MatrixGroup, P: InvariantPairing, space: AdjointSpace | None = None) -> EquivariantForm:
    """omega_0(x) = <beta, x>, a 1-form with linear Lie dependence."""
    from .liecore import check_pairing
    if not check_pairing(P).invariant:
        raise ValueError("pairing is not invariant")
    X = space or AdjointSpace(G)
    pair = adjoint_pairing(G, P)

    def ev(x, pt, vs):
        g, v = pt[0], vs[0][0]
        gi = g.inverse()
        beta = (gi @ v + v @ gi).scale(HALF)
        return pair(beta, x[0])

    return EquivariantForm(X, 1, 1, ev, 0, "omega0")


def theta_form_value(g: Matrix, vs: Sequence, pair, right: bool = False):
    """(1/2)<t1, [t2, t3]> with t = g^-1 v (or v g^-1), i.e. (1/12)<t,[t,t]>."""
    gi = g.inverse()
    t = [(v @ gi) if right else (gi @ v) for v in vs]
    # cyclic average: alternating on all matrices, not only on the Lie algebra
    s = (pair(t[0], bracket(t[1], t[2])) + pair(t[1], bracket(t[2], t[0]))
         + pair(t[2], bracket(t[0], t[1])))
    return s / 6


def build_omega1(G: MatrixGroup, P: InvariantPairing, space: AdjointSpace | None = None,
                 right: bool = False) -> EquivariantForm:
    """omega_1 = (1/12)<theta,[theta,theta]>, a Lie-independent 3-form."""
    from .liecore import check_pairing
    if not check_pairing(P).invariant:
        raise ValueError("pairing is not invariant")
    X = space or AdjointSpace(G)
    pair = adjoint_pairing(G, P)

    def ev(x, pt, vs):
        return theta_form_value(pt[0], [v[0] for v in vs], pair, right)

    return EquivariantForm(X, 3, 0, ev, 0, "omega1_bar" if right else "omega1")


def adjoint_cartan_element(G: MatrixGroup, P: InvariantPairing) -> CartanElement:
    X = AdjointSpace(G)
    return CartanElement((build_omega0(G, P, X), build_omega1(G, P, X).with_u(1)))


# ---------------------------------------------------------------------------
# deciding identities by evaluation


@dataclass
class SampleSet:
    """Random exact evaluation arguments for one space."""

    space: GSpace
    count: int = 20
    seed: int = 0
    p: int | None = None
    points: list = field(default_factory=list)

    def __post_init__(self):
        rng = random.Random(self.seed)
        self._rng = rng
        if not self.points:
            self.points = [self.space.sample(rng, self.p) for _ in range(self.count)]

    def arguments(self, degree: int):
        rng = random.Random(self.seed * 7919 + degree)
        for pt in self.points:
            x = self.space.random_lie(rng, self.p)
            vs = [self.space.random_tangent(rng, pt, self.p) for _ in range(degree)]
            yield x, pt, vs


def vanishes(f: EquivariantForm, samples: SampleSet) -> list:
    """Arguments at which f does not evaluate to zero (empty = identity holds)."""
    bad = []
    for x, pt, vs in samples.arguments(f.degree):
        val = f(x, pt, vs)
        if val != 0:
            bad.append((pt, val))
    return bad


def forms_agree(f: EquivariantForm, g: EquivariantForm, samples: SampleSet) -> bool:
    if f.degree != g.degree:
        return False
    return not vanishes(f - g, samples)


def basis_arguments(space: GSpace, pt, degree: int, lie_degree: int):
    """Lie basis elements (plus pairwise sums when the form is quadratic in x)
    against every increasing tuple of tangent basis vectors."""
    lie = []
    for i, G in enumerate(space.groups):
        for b in G.basis:
            lie.append(tuple(b if j == i else Matrix.zeros(H.n, H.n)
                             for j, H in enumerate(space.groups)))
    if lie_degree == 0:
        xs = lie[:1]
    elif lie_degree == 1:
        xs = lie
    else:
        xs = lie + [vadd(a, b) for a, b in itertools.combinations(lie, 2)]
    for x in xs:
        for vs in all_basis_directions(space, pt, degree):
            yield x, pt, vs


def vanishes_on_basis(f: EquivariantForm, points) -> list:
    bad = []
    for pt in points:
        for x, _, vs in basis_arguments(f.space, pt, f.degree, f.lie_degree):
            val = f(x, pt, vs)
            if val != 0:
                bad.append((pt, val))
    return bad


def closure_identities(G: MatrixGroup, P: InvariantPairing, samples: SampleSet | None = None,
                       count: int = 20, seed: int = 0, basis: bool = False) -> dict:
    """
    The three components of (d_LR + u d)(omega0 + u omega1):
    d_LR omega0, d omega0 + d_LR omega1, d omega1.  Maps name -> holds.
    """
    X = AdjointSpace(G)
    samples = samples or SampleSet(X, count, seed)
    w = CartanElement((build_omega0(G, P, X), build_omega1(G, P, X).with_u(1)))
    dw = cartan_diff(w)
    names = {0: "d_LR omega0 = 0", 1: "d omega0 + d_LR omega1 = 0", 2: "d omega1 = 0"}
    out = {}
    for k in (0, 1, 2):
        comp = dw.component(k)
        if comp is None:
            out[names[k]] = True
        elif basis:
            out[names[k]] = not vanishes_on_basis(comp, samples.points)
        else:
            out[names[k]] = not vanishes(comp, samples)
    return out


def all_basis_directions(space: GSpace, pt, degree: int):
    """All increasing tuples of tangent basis vectors of the given length."""
    basis = space.tangent_basis(pt)
    return [list(c) for c in itertools.combinations(basis, degree)]
