"""
Representation varieties of surface presentations.

* finite groups (SL2(F_p), diagonal tori, tiny matrix groups) with index
  tables, brute-force enumeration of representations;
* twisted cochains C^0 = g, C^1 = g^{gens}, C^2 = g^{rels} at a
  representation, with Fox derivatives for d^1;
* the cup-product (Goldman) pairing evaluated on the Fox bar chain of the
  relator;
* Lagrangian restriction to boundary circles, constrained moduli, and the
  counting TFT with gluing certificates.

Cocycles are right-trivialised crossed homomorphisms:
u(w1 w2) = u(w1) + Ad_{rho(w1)} u(w2).
"""

from __future__ import annotations

import itertools
import json
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cobcat import (Cobordism, ComponentPresentation, compose, present_component,
                     relative_orientation, to_cospan, word_inverse, word_mul)
from .exactalg import Fp, Matrix, is_prime, kernel_basis, rank, span_rank
from .liecore import InvariantPairing, MatrixGroup, trace_pairing

SCHEMA_VERSION = 1
THREADS_ENV = "SHIFTED_CARTAN_THREADS"
CUP_CONVENTION = ("(u cup v)[g|h] = <u(g), Ad_g v(h)>; fundamental chain of a word "
                  "x_1^e1..x_m^em: sum_k [w_{k-1} | x_k^e_k] - sum_{e_k=-1} [x_k | x_k^-1]")


class BudgetExceeded(RuntimeError):
    pass


class CocycleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# finite groups


def _mat_mul(x, y, p):
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % p, (a * f + b * h) % p, (c * e + d * g) % p, (c * f + d * h) % p)


@dataclass
class FiniteGroup:
    """Elements as hashable tuples with an index multiplication table."""

    name: str
    p: int
    n: int
    elements: list
    family: str = "sl"

    def __post_init__(self):
        self.index = {g: i for i, g in enumerate(self.elements)}
        self.order = len(self.elements)
        self.e = self.index[tuple(int(i == j) for i in range(self.n) for j in range(self.n))]
        self._mul = [[self.index[self._prod(x, y)] for y in self.elements] for x in self.elements]
        self.inv = [row.index(self.e) for row in self._mul]

    def _prod(self, x, y):
        n, p = self.n, self.p
        if n == 2:
            return _mat_mul(x, y, p)
        return tuple(sum(x[i * n + k] * y[k * n + j] for k in range(n)) % p
                     for i in range(n) for j in range(n))

    def mul(self, i: int, j: int) -> int:
        return self._mul[i][j]

    def matrix(self, i: int) -> Matrix:
        g = self.elements[i]
        n = self.n
        return Matrix([[Fp(g[r * n + c], self.p) for c in range(n)] for r in range(n)], n)

    def conjugacy_classes(self) -> list[list[int]]:
        seen, classes = set(), []
        for g in range(self.order):
            if g in seen:
                continue
            cls = sorted({self.mul(self.mul(h, g), self.inv[h]) for h in range(self.order)})
            seen.update(cls)
            classes.append(cls)
        return classes

    def centralizer_order(self, g: int) -> int:
        return sum(1 for h in range(self.order) if self.mul(h, g) == self.mul(g, h))

    def matrix_group(self) -> MatrixGroup:
        return MatrixGroup(self.family, self.n)


def sl2(p: int) -> FiniteGroup:
    if not is_prime(p):
        raise ValueError("p must be prime")
    els = [(a, b, c, d) for a in range(p) for b in range(p) for c in range(p) for d in range(p)
           if (a * d - b * c) % p == 1]
    return FiniteGroup("SL2(F%d)" % p, p, 2, els, "sl")


def torus(p: int, n: int = 1) -> FiniteGroup:
    if not is_prime(p):
        raise ValueError("p must be prime")
    els = []
    for diag in itertools.product(range(1, p), repeat=n):
        els.append(tuple(diag[i] if i == j else 0 for i in range(n) for j in range(n)))
    return FiniteGroup("T%d(F%d)" % (n, p), p, n, els, "torus")


def finite_group(name: str, p: int) -> FiniteGroup:
    name = name.lower()
    if name in ("sl2", "sl"):
        return sl2(p)
    if name in ("gl1", "torus", "t1"):
        return torus(p, 1)
    raise ValueError("unknown finite group %r (supported: sl2, gl1)" % name)


# ---------------------------------------------------------------------------
# presentations and enumeration


@dataclass(frozen=True)
class Presentation:
    generators: tuple
    relators: tuple = ()
    boundary: tuple = ()            # ((side, index), oriented word) per boundary circle
    cell: tuple = ()                # boundary word of the 2-cell carrying the relative class

    @classmethod
    def of(cls, comp: ComponentPresentation) -> "Presentation":
        rels = tuple(r for r in comp.relators if r)
        cell = comp.raw_words[-1] if comp.raw_words else (rels[0] if rels else ())
        return cls(comp.generators, rels, tuple(zip(comp.circles, comp.oriented_words)), cell)

    @classmethod
    def closed_surface(cls, genus: int) -> "Presentation":
        comp = present_component(_closed_component(genus))
        return cls.of(comp)

    @classmethod
    def circle(cls) -> "Presentation":
        return cls(("z",), (), ((("out", 0), (("z", 1),)),), (("z", 1),))


def _closed_component(genus):
    from .cobcat import Component
    return Component((), (), genus)


def eval_word(group: FiniteGroup, word, assign: dict) -> int:
    acc = group.e
    for g, e in word:
        x = assign[g]
        acc = group.mul(acc, x if e == 1 else group.inv[x])
    return acc


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _enum_chunk(args):
    group, pres, firsts = args
    gens = pres.generators
    out = []
    rest = len(gens) - 1
    for f in firsts:
        for tail in itertools.product(range(group.order), repeat=rest):
            assign = dict(zip(gens, (f,) + tail))
            if all(eval_word(group, r, assign) == group.e for r in pres.relators):
                out.append((f,) + tail)
    return out


@dataclass
class RepEnumeration:
    count: int
    reps: list                      # tuples of element indices in generator order
    presentation: Presentation


def enumerate_reps(pres: Presentation, group: FiniteGroup, budget: int = 2_000_000,
                   threads: int | None = None, keep: bool = True) -> RepEnumeration:
    """Exhaustive, in lexicographic order of generator images."""
    ngen = len(pres.generators)
    work = group.order ** ngen
    if ngen == 0:
        return RepEnumeration(1, [()], pres)
    if not pres.relators and not keep:
        # Hom(free group, G) = G^rank; nothing to enumerate
        return RepEnumeration(work, [], pres)
    if work > budget:
        raise BudgetExceeded("|G|^%d = %d exceeds the budget %d" % (ngen, work, budget))
    if not pres.relators:
        return RepEnumeration(work, list(itertools.product(range(group.order), repeat=ngen)), pres)
    threads = threads or _threads()
    firsts = list(range(group.order))
    if threads > 1 and work > 20000:
        chunks = [firsts[i::threads] for i in range(threads)]
        with ProcessPoolExecutor(threads) as ex:
            parts = list(ex.map(_enum_chunk, [(group, pres, c) for c in chunks]))
        reps = sorted(r for part in parts for r in part)
    else:
        reps = _enum_chunk((group, pres, firsts))
    return RepEnumeration(len(reps), reps if keep else [], pres)


def count_commuting_pairs(group: FiniteGroup) -> int:
    """Oracle for |Hom(Z^2, G)|."""
    return sum(1 for a in range(group.order) for b in range(group.order)
               if group.mul(a, b) == group.mul(b, a))


# ---------------------------------------------------------------------------
# representations and twisted cochains


def _coords(G: MatrixGroup, X: Matrix) -> tuple:
    return G.coords(X)


def ad_matrix(G: MatrixGroup, g: Matrix) -> Matrix:
    """Ad_g in the Lie basis: column i is coords(g B_i g^-1)."""
    gi = g.inverse()
    one = g[0, 0] - g[0, 0] + 1
    cols = [G.coords(g @ b.map(lambda t: t * one) @ gi) for b in G.basis]
    return Matrix.from_columns(cols)


@dataclass
class RepPoint:
    presentation: Presentation
    G: MatrixGroup
    images: dict                    # generator -> Matrix
    pairing: InvariantPairing | None = None

    def __post_init__(self):
        if self.pairing is None:
            self.pairing = trace_pairing(self.G)
        for g, m in self.images.items():
            if not self.G.contains(m):
                raise ValueError("image of %s is not in %s" % (g, self.G.name))
        for r in self.presentation.relators:
            if self.word(r) != self.identity():
                raise ValueError("relator %s is not satisfied" % (r,))
        self._ad = {g: ad_matrix(self.G, m) for g, m in self.images.items()}
        self._adi = {g: ad_matrix(self.G, m.inverse()) for g, m in self.images.items()}

    @property
    def scalar_one(self):
        m = next(iter(self.images.values()))
        return m[0, 0] - m[0, 0] + 1

    def identity(self) -> Matrix:
        return Matrix.identity(self.G.n, self.scalar_one) if self.images else \
            Matrix.identity(self.G.n)

    def word(self, w) -> Matrix:
        acc = self.identity()
        for g, e in w:
            acc = acc @ (self.images[g] if e == 1 else self.images[g].inverse())
        return acc

    def ad_word(self, w) -> Matrix:
        acc = Matrix.identity(self.G.dim, self.scalar_one)
        for g, e in w:
            acc = acc @ (self._ad[g] if e == 1 else self._adi[g])
        return acc

    def fox(self, w) -> dict:
        """Linear maps F_s with u(w) = sum_s F_s u(s)."""
        one = self.scalar_one
        dim = self.G.dim
        out = {g: Matrix.zeros(dim, dim, one - one) for g in self.presentation.generators}
        prefix = Matrix.identity(dim, one)
        for g, e in w:
            if e == 1:
                out[g] = out[g] + prefix
                prefix = prefix @ self._ad[g]
            else:
                prefix = prefix @ self._adi[g]
                out[g] = out[g] - prefix
        return out

    def conjugate(self, h: Matrix) -> "RepPoint":
        hi = h.inverse()
        return RepPoint(self.presentation, self.G, {g: h @ m @ hi for g, m in self.images.items()},
                        self.pairing)

    def pair(self, x, y):
        return self.pairing(x, y)


def rep_from_indices(pres: Presentation, group: FiniteGroup, idx: Sequence[int]) -> RepPoint:
    return RepPoint(pres, group.matrix_group(),
                    {g: group.matrix(i) for g, i in zip(pres.generators, idx)})


def _hstack(blocks, rows, zero):
    if not blocks:
        return Matrix([[] for _ in range(rows)], 0)
    out = [[] for _ in range(rows)]
    for b in blocks:
        for r in range(rows):
            out[r].extend(b.row(r))
    return Matrix(out, sum(b.cols for b in blocks))


def _vstack(blocks, cols):
    rows = []
    for b in blocks:
        rows.extend(list(r) for r in b.entries)
    return Matrix(rows, cols)


@dataclass
class RepTangentComplex:
    rep: RepPoint
    dims: tuple                     # (dim C0, dim C1, dim C2)
    d0: Matrix
    d1: Matrix

    @property
    def euler(self) -> int:
        return self.dims[0] - self.dims[1] + self.dims[2]

    def ranks(self):
        return (rank(self.d0) if self.d0.rows and self.d0.cols else 0,
                rank(self.d1) if self.d1.rows and self.d1.cols else 0)

    def homology(self) -> tuple[int, int, int]:
        r0, r1 = self.ranks()
        c0, c1, c2 = self.dims
        return c0 - r0, c1 - r1 - r0, c2 - r1

    def d_squared_zero(self) -> bool:
        if not (self.d1.rows and self.d0.cols):
            return True
        return (self.d1 @ self.d0).is_zero()

    def cocycles(self) -> list[tuple]:
        if self.d1.rows == 0:
            one = self.rep.scalar_one
            n = self.dims[1]
            return [tuple(one if i == j else one - one for i in range(n)) for j in range(n)]
        return kernel_basis(self.d1)

    def coboundary(self, x) -> tuple:
        return tuple(sum((a * b for a, b in zip(row, x)), self.rep.scalar_one - 1)
                     for row in self.d0.entries)


def tangent_complex(rep: RepPoint) -> RepTangentComplex:
    pres = rep.presentation
    dim = rep.G.dim
    one = rep.scalar_one
    ident = Matrix.identity(dim, one)
    blocks0 = [ident - rep._ad[g] for g in pres.generators]
    d0 = _vstack(blocks0, dim) if blocks0 else Matrix([], dim)
    rows = []
    for r in pres.relators:
        F = rep.fox(r)
        rows.append(_hstack([F[g] for g in pres.generators], dim, one - one))
    ngen = len(pres.generators)
    d1 = _vstack(rows, dim * ngen) if rows else Matrix([], dim * ngen)
    return RepTangentComplex(rep, (dim, dim * ngen, dim * len(pres.relators)), d0, d1)


def split(u, ngen: int, dim: int) -> list:
    return [tuple(u[k * dim:(k + 1) * dim]) for k in range(ngen)]


def crossed_value(rep: RepPoint, u, w) -> tuple:
    """u(w) for a cochain u given by its values on the generators."""
    dim = rep.G.dim
    vals = dict(zip(rep.presentation.generators, split(u, len(rep.presentation.generators), dim)))
    zero = rep.scalar_one - 1
    acc = [zero] * dim
    F = rep.fox(w)
    for g, M in F.items():
        for i in range(dim):
            acc[i] = acc[i] + sum((M[i, j] * vals[g][j] for j in range(dim)), zero)
    return tuple(acc)


def _matvec(M: Matrix, v) -> tuple:
    zero = v[0] - v[0] if len(v) else 0
    return tuple(sum((M[i, j] * v[j] for j in range(M.cols)), zero) for i in range(M.rows))


def fundamental_chain(w) -> list:
    """[(coefficient, g_word, h_word)] representing the 2-cell of the word w."""
    chain = []
    prefix = ()
    for g, e in w:
        chain.append((1, prefix, ((g, e),)))
        if e == -1:
            chain.append((-1, ((g, 1),), ((g, -1),)))
        prefix = prefix + ((g, e),)
    return chain


def cup_on_chain(rep: RepPoint, u, v, chain) -> object:
    total = rep.scalar_one - 1
    for c, gw, hw in chain:
        ug = crossed_value(rep, u, gw)
        vh = crossed_value(rep, v, hw)
        total = total + c * rep.pair(ug, _matvec(rep.ad_word(gw), vh))
    return total


def goldman_pairing(rep: RepPoint, u, v, check: bool = True):
    """Cup product of two cocycles capped with the relator 2-cell, then paired."""
    if check:
        t = tangent_complex(rep)
        for name, w in (("u", u), ("v", v)):
            if t.d1.rows and any(x != 0 for x in _matvec(t.d1, w)):
                raise CocycleError("%s is not a cocycle" % name)
    total = rep.scalar_one - 1
    for r in rep.presentation.relators:
        total = total + cup_on_chain(rep, u, v, fundamental_chain(r))
    return total


# ---------------------------------------------------------------------------
# Lagrangian restriction to the boundary


def _circle_cohomology(rep: RepPoint, w):
    """Kernel basis of (1 - Ad_g) and the image of (1 - Ad_g) for g = rho(w)."""
    one = rep.scalar_one
    A = Matrix.identity(rep.G.dim, one) - rep.ad_word(w)
    return kernel_basis(A), A


def restriction_lagrangian_check(rep: RepPoint, signs: dict | None = None,
                                 require_smooth: bool = True) -> dict:
    """
    Image of H^0 + H^1 of the surface in the total cohomology of the boundary
    circles: isotropic for sum_j s_j <H^0_j, H^1_j>, and half-dimensional.
    """
    pres = rep.presentation
    G, dim = rep.G, rep.G.dim
    circles = pres.boundary
    if not circles:
        raise ValueError("surface has no boundary")
    signs = signs or {c: (-1 if c[0] == "in" else 1) for c, _ in circles}
    t = tangent_complex(rep)
    h0, h1, h2 = t.homology()
    smooth = True
    circ_data = []
    total_dim = 0
    for c, w in circles:
        ker, A = _circle_cohomology(rep, w)
        k = len(ker)
        if k != G.rank:
            smooth = False
        circ_data.append((c, w, ker, A))
        total_dim += 2 * k
    Z0 = kernel_basis(t.d0) if t.d0.rows else []
    Z1 = t.cocycles()
    ncirc = len(circles)
    # image of H^0: x -> (x, ..., x)
    im0 = span_rank([tuple(x) * ncirc for x in Z0]) if Z0 else 0
    # image of H^1 modulo boundary coboundaries
    restricted = [sum((crossed_value(rep, u, w) for _, w, _, _ in circ_data), ()) for u in Z1]
    bnd = []
    for k, (_, _, _, A) in enumerate(circ_data):
        for col in range(dim):
            vec = [rep.scalar_one - 1] * (dim * ncirc)
            for i in range(dim):
                vec[k * dim + i] = A[i, col]
            bnd.append(tuple(vec))
    rb = span_rank(bnd) if bnd else 0
    im1 = (span_rank(restricted + bnd) - rb) if restricted else 0
    isotropic = True
    for x in Z0:
        for u, ru in zip(Z1, restricted):
            s = rep.scalar_one - 1
            for k, (c, _, _, _) in enumerate(circ_data):
                s = s + signs[c] * rep.pair(tuple(x), ru[k * dim:(k + 1) * dim])
            if s != 0:
                isotropic = False
    half = 2 * (im0 + im1) == total_dim
    verdict = "lagrangian" if (isotropic and half) else "not lagrangian"
    if require_smooth and not smooth:
        verdict = "inconclusive"
    return {"isotropic": isotropic, "half_dimensional": half, "image_dim": im0 + im1,
            "boundary_dim": total_dim, "smooth": smooth, "verdict": verdict,
            "surface_cohomology": [h0, h1, h2]}


# ---------------------------------------------------------------------------
# constrained moduli: fibre product of the surface leg and the class legs


from .lagstruct import (LagrangianDatum, _hcat, _vcat, adjoint_target,  # noqa: E402
                        compose_correspondences, lagrangian_as_correspondence)
from .exactalg import independent_subset, solve  # noqa: E402
from .shiftsym import ShiftedTwoForm, TangentComplex  # noqa: E402


def _hcat_all(ms):
    acc = ms[0]
    for m in ms[1:]:
        acc = _hcat(acc, m)
    return acc


def _vcat_all(ms):
    acc = ms[0]
    for m in ms[1:]:
        acc = _vcat(acc, m)
    return acc


def _signed_target(G, P, gs, signs):
    Y = None
    for g, s in zip(gs, signs):
        Yj = adjoint_target([G], [P], [g])
        if s < 0:
            Yj = Yj.opposite()
        Y = Yj if Y is None else Y + Yj
    return Y


def _basis_vectors(n, one):
    return [tuple(one if i == j else one - one for j in range(n)) for i in range(n)]


def surface_isotropy(rep: RepPoint) -> Matrix:
    """Antisymmetrised cup product on the 2-cell chain, as a Gram matrix on C^1."""
    n = rep.G.dim * len(rep.presentation.generators)
    E = _basis_vectors(n, rep.scalar_one)
    chain = fundamental_chain(rep.presentation.cell)
    C = [[cup_on_chain(rep, u, v, chain) for v in E] for u in E]
    half = Fraction(1, 2)
    return Matrix([[(C[i][j] - C[j][i]) * half for j in range(n)] for i in range(n)], n)


def boundary_signs(pres: Presentation) -> list:
    return [1 if side == "out" else -1 for (side, _), _ in pres.boundary]


def surface_lagrangian(rep: RepPoint) -> LagrangianDatum:
    """Restriction to the boundary circles as a Lagrangian into sum_j s_j [G/G]."""
    pres = rep.presentation
    if not pres.boundary:
        raise ValueError("surface has no boundary")
    if pres.relators:
        raise ValueError("boundaried surfaces have free fundamental group")
    G, dim = rep.G, rep.G.dim
    gs = [rep.word(w) for _, w in pres.boundary]
    Y = _signed_target(G, rep.pairing, gs, boundary_signs(pres))
    t = tangent_complex(rep)
    apex = TangentComplex({-1: dim, 0: t.dims[1]}, {-1: t.d0} if t.dims[1] else {})
    f0 = []
    for (_, w), g in zip(pres.boundary, gs):
        F = rep.fox(w)
        f0.append(ad_matrix(G, g.inverse()) @ _hcat_all([F[x] for x in pres.generators]))
    f = {-1: _vcat_all([Matrix.identity(dim, rep.scalar_one)] * len(gs)), 0: _vcat_all(f0)}
    eta = ShiftedTwoForm(0, {(0, 0): surface_isotropy(rep)}, "cup")
    return LagrangianDatum(Y, apex, f, eta, "surface")


def class_lagrangian(G: MatrixGroup, P: InvariantPairing, gs, signs) -> LagrangianDatum:
    """Conjugacy classes through the points gs, as a Lagrangian into sum_j s_j [G/G]."""
    Y = _signed_target(G, P, gs, signs)
    dim = G.dim
    blocks_d, blocks_f, blocks_eta, tdims = [], [], [], []
    for g, s in zip(gs, signs):
        adi, ad = ad_matrix(G, g.inverse()), ad_matrix(G, g)
        D = adi - Matrix.identity(dim)
        idx = independent_subset([D.col(j) for j in range(dim)])
        basis = Matrix.from_columns([D.col(j) for j in idx], dim)
        blocks_d.append(Matrix.from_columns([solve(basis, D.col(j)) for j in range(dim)], len(idx))
                        if idx else Matrix([], dim))
        blocks_f.append(basis)
        eta = [[Fraction(s, 2) * (P(_matvec(ad, _unit(dim, i)), _unit(dim, j))
                                  - P(_matvec(ad, _unit(dim, j)), _unit(dim, i)))
                for j in idx] for i in idx]
        blocks_eta.append(Matrix(eta, len(idx)))
        tdims.append(len(idx))
    from .lagstruct import _blockdiag
    d, fm, em = blocks_d[0], blocks_f[0], blocks_eta[0]
    for a, b, c in zip(blocks_d[1:], blocks_f[1:], blocks_eta[1:]):
        d, fm, em = _blockdiag(d, a), _blockdiag(fm, b), _blockdiag(em, c)
    m1, m0 = dim * len(gs), sum(tdims)
    apex = TangentComplex({-1: m1, 0: m0}, {-1: d} if m0 else {})
    f = {-1: Matrix.identity(m1), 0: fm} if m0 else {-1: Matrix.identity(m1)}
    return LagrangianDatum(Y, apex, f, ShiftedTwoForm(0, {(0, 0): em} if m0 else {}, "class"),
                           "classes")


def _unit(n, i):
    return tuple(Fraction(int(i == j)) for j in range(n))


def conjugator(G: MatrixGroup, x: Matrix, y: Matrix) -> Matrix | None:
    """Some h in GL_n with h x h^-1 = y, or None."""
    n = G.n
    rows = []
    for i in range(n):
        for j in range(n):
            # (h x - y h)_{ij} in the unknowns h_{kl}
            row = [Fraction(0)] * (n * n)
            for k in range(n):
                row[i * n + k] += x[k, j]
                row[k * n + j] -= y[i, k]
            rows.append(row)
    K = kernel_basis(Matrix(rows, n * n))
    rng = random.Random(0)
    for _ in range(200):
        c = [Fraction(rng.randint(-5, 5)) for _ in K]
        flat = [sum((ci * v[t] for ci, v in zip(c, K)), Fraction(0)) for t in range(n * n)]
        h = Matrix([flat[r * n:(r + 1) * n] for r in range(n)], n)
        if K and h.det() != 0:
            return h
    return None


@dataclass
class ModuliReport:
    dimension: int
    homology: dict
    euler_ok: bool
    isotropic: dict
    skew: bool
    rank: int
    nondegenerate: bool
    smooth: bool

    def as_dict(self) -> dict:
        return {"dimension": self.dimension, "homology": {str(k): v for k, v in sorted(self.homology.items())},
                "euler_ok": self.euler_ok, "isotropic": self.isotropic, "skew": self.skew,
                "rank": self.rank, "nondegenerate": self.nondegenerate, "smooth": self.smooth,
                "conventions": CUP_CONVENTION}


def _middle_pairing(apex: TangentComplex, eta: Matrix):
    """eta on representatives of H^0 of the apex."""
    Z = kernel_basis(apex.diff(0)) if apex.dim(1) else _basis_vectors(apex.dim(0), Fraction(1))
    B = [apex.diff(-1).col(j) for j in range(apex.dim(-1))] if apex.dim(-1) and apex.dim(0) else []
    reps = [Z[i] for i in independent_subset_after_fixed(B, Z)]
    M = Matrix([[sum((a * eta[i, j] * b for i, a in enumerate(u) if a
                      for j, b in enumerate(v) if b), Fraction(0)) for v in reps] for u in reps],
               len(reps))
    return reps, M


def independent_subset_after_fixed(fixed, cands):
    idx = independent_subset(list(fixed) + list(cands)) if (fixed or cands) else []
    return [i - len(fixed) for i in idx if i >= len(fixed)]


def constrained_moduli(rep: RepPoint, classes: Sequence[Matrix] | None = None) -> ModuliReport:
    """
    Fibre product of the surface leg and the conjugacy-class legs over the
    boundary circles.  ``classes`` gives one representative per boundary circle
    (default: the boundary holonomies themselves).  Closed surfaces reduce to
    the cup-product pairing on H^1.
    """
    pres = rep.presentation
    G, P = rep.G, rep.pairing
    if not pres.boundary:
        t = tangent_complex(rep)
        h = t.homology()
        Z1 = t.cocycles()
        B1 = [t.d0.col(j) for j in range(t.d0.cols)]
        reps = [Z1[i] for i in independent_subset_after_fixed(B1, Z1)]
        M = Matrix([[goldman_pairing(rep, u, v, check=False) for v in reps] for u in reps],
                   len(reps))
        r = rank(M) if reps else 0
        skew = M == M.T().scale(-1)
        return ModuliReport(len(reps), {-1: h[0], 0: h[1], 1: h[2]}, t.euler == sum(
            (-1) ** k * x for k, x in enumerate(h)), {}, skew, r, skew and r == len(reps),
            h[0] == 0 and h[2] == 0)
    gs = [rep.word(w) for _, w in pres.boundary]
    if classes is not None:
        if len(classes) != len(gs):
            raise ValueError("need one class per boundary circle")
        for k, (o, g) in enumerate(zip(classes, gs)):
            if conjugator(G, o, g) is None:
                raise ValueError("boundary image %d is not in the prescribed class" % k)
    signs = boundary_signs(pres)
    L1 = surface_lagrangian(rep)
    L2 = class_lagrangian(G, P, gs, signs)
    v1, v2 = L1.verdict(), L2.verdict()
    comp = compose_correspondences(lagrangian_as_correspondence(L1, "right"),
                                   lagrangian_as_correspondence(L2, "left"))
    apex = comp.apex
    hom = apex.homology()
    eul = apex.euler() == L1.apex.euler() + L2.apex.euler() - L1.target.t.euler()
    cv = comp.verdict()
    reps, M = _middle_pairing(apex, comp.eta.block(apex, 0, 0))
    r = rank(M) if reps else 0
    skew = M == M.T().scale(-1)
    smooth = all(hom.get(k, 0) == 0 for k in hom if k != 0)
    nd = cv["lagrangian"] and skew and r == len(reps)
    return ModuliReport(len(reps), hom, eul,
                        {"surface": v1["lagrangian"], "classes": v2["lagrangian"],
                         "fibre_product": cv["lagrangian"]}, skew, r, nd, smooth)


# ---------------------------------------------------------------------------
# counting TFT


def component_histogram(comp: ComponentPresentation, group: FiniteGroup,
                        budget: int = 2_000_000) -> dict:
    """Boundary holonomies (oriented words, presentation circle order) -> #reps."""
    pres = Presentation.of(comp)
    if not comp.circles:
        return {(): enumerate_reps(pres, group, budget, keep=False).count}
    hist: dict = {}
    for idx in enumerate_reps(pres, group, budget).reps:
        assign = dict(zip(pres.generators, idx))
        key = tuple(eval_word(group, w, assign) for w in comp.oriented_words)
        hist[key] = hist.get(key, 0) + 1
    return hist


def rep_count(c: Cobordism, group: FiniteGroup, budget: int = 2_000_000) -> int:
    """|Rep(c)| by enumeration, component by component (counts multiply)."""
    total = 1
    for comp in to_cospan(c).components:
        pres = Presentation.of(comp)
        total *= enumerate_reps(pres, group, budget, keep=False).count
    return total


@dataclass
class CorrespondenceValue:
    cobordism: str
    group: str
    count: int
    circles: list                   # [(side, index)]
    histogram: dict                 # holonomy tuple over ``circles`` -> count

    def as_dict(self) -> dict:
        return {"cobordism": self.cobordism, "group": self.group, "count": self.count,
                "circles": ["%s%d" % c for c in self.circles],
                "support": len(self.histogram)}


def tft_evaluate(c: Cobordism, group: FiniteGroup, budget: int = 2_000_000) -> CorrespondenceValue:
    """Rep(c) -> Rep(source) x Rep(target) as a histogram over boundary holonomies."""
    circles = [("in", i) for i in range(len(c.source))] + [("out", j) for j in range(len(c.target))]
    joint = {(): 1}
    order: list = []
    for comp in to_cospan(c).components:
        h = component_histogram(comp, group, budget)
        joint = {k1 + k2: v1 * v2 for k1, v1 in joint.items() for k2, v2 in h.items()}
        order += list(comp.circles)
    perm = [order.index(circ) for circ in circles]
    hist: dict = {}
    for k, v in joint.items():
        key = tuple(k[i] for i in perm)
        hist[key] = hist.get(key, 0) + v
    return CorrespondenceValue(str(c), group.name, sum(hist.values()), circles, hist)


def _conjugators(group: FiniteGroup, x: int, y: int) -> int:
    return sum(1 for t in range(group.order) if group.mul(group.mul(t, x), group.inv[t]) == y)


@dataclass
class GluingCertificate:
    first: str
    second: str
    composite: str
    direct: int
    fibre: int
    tree_gluings: int
    extra_gluings: int

    @property
    def holds(self) -> bool:
        return self.direct == self.fibre

    def as_dict(self) -> dict:
        return {"first": self.first, "second": self.second, "composite": self.composite,
                "direct_count": self.direct, "fibre_product_count": self.fibre,
                "tree_gluings": self.tree_gluings, "extra_gluings": self.extra_gluings,
                "holds": self.holds}


def gluing_certificate(c1: Cobordism, c2: Cobordism, group: FiniteGroup,
                       budget: int = 2_000_000) -> GluingCertificate:
    """
    |Rep(c1 ; c2)| two ways: directly from the composite's presentation, and as
    a sum over component representations agreeing on the glued circles, with
    one conjugator per gluing that closes a cycle in the gluing graph.
    """
    composite = compose(c1, c2)
    direct = rep_count(composite, group, budget)
    # factors: one per component, over its circles; middle circles are variables
    factors = []
    for tag, c in (("A", c1), ("B", c2)):
        for comp in to_cospan(c).components:
            h = component_histogram(comp, group, budget)
            factors.append((tag, comp.circles, h))
    parent = list(range(len(factors)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def owner(tag, circ):
        return next(k for k, (t, circs, _) in enumerate(factors) if t == tag and circ in circs)

    tree, extra = [], []
    for m in range(len(c1.target)):
        i, j = owner("A", ("out", m)), owner("B", ("in", m))
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree.append(m)
        else:
            extra.append(m)
    # variables: ("A", m) and ("B", m) holonomies; marginalise everything else
    tables = []
    for tag, circs, h in factors:
        side = "out" if tag == "A" else "in"
        keep = [k for k, circ in enumerate(circs) if circ[0] == side]
        names = tuple((tag, circs[k][1]) for k in keep)
        t: dict = {}
        for key, v in h.items():
            kk = tuple(key[k] for k in keep)
            t[kk] = t.get(kk, 0) + v
        tables.append((names, t))
    conj_cache: dict = {}

    def weight(m, x, y):
        if m in tree:
            return 1 if x == y else 0
        if (x, y) not in conj_cache:
            conj_cache[(x, y)] = _conjugators(group, x, y)
        return conj_cache[(x, y)]

    # join the factors one at a time; a middle circle is summed out as soon as
    # its second end joins (tree gluings are hash joins, the rest weighted)
    state_names: tuple = ()
    state = {(): 1}
    for names, t in tables:
        done = [m for m in range(len(c1.target))
                if {("A", m), ("B", m)} <= set(state_names + names)]
        pos_s = {m: state_names.index(("A", m) if ("A", m) in state_names else ("B", m))
                 for m in done}
        pos_t = {m: names.index(("A", m) if ("A", m) in names else ("B", m)) for m in done}
        eq = [m for m in done if m in tree]
        wt = [m for m in done if m not in tree]
        index: dict = {}
        for k2, v2 in t.items():
            index.setdefault(tuple(k2[pos_t[m]] for m in eq), []).append((k2, v2))
        keep_s = [k for k in range(len(state_names)) if k not in pos_s.values()]
        keep_t = [k for k in range(len(names)) if k not in pos_t.values()]
        merged: dict = {}
        for k1, v1 in state.items():
            for k2, v2 in index.get(tuple(k1[pos_s[m]] for m in eq), ()):
                w = v1 * v2
                for m in wt:
                    x, y = k1[pos_s[m]], k2[pos_t[m]]
                    if state_names[pos_s[m]][0] == "B":
                        x, y = y, x
                    w *= weight(m, x, y)
                    if not w:
                        break
                if w:
                    kk = tuple(k1[k] for k in keep_s) + tuple(k2[k] for k in keep_t)
                    merged[kk] = merged.get(kk, 0) + w
        state_names = tuple(state_names[k] for k in keep_s) + tuple(names[k] for k in keep_t)
        state = merged
    fibre = sum(state.values())
    return GluingCertificate(str(c1), str(c2), str(composite), direct, fibre, len(tree), len(extra))


def certificate_report(generators: dict, group: FiniteGroup, budget: int = 2_000_000) -> dict:
    """Certificates for every composable ordered pair of named cobordisms."""
    out = []
    for n1, c1 in generators.items():
        for n2, c2 in generators.items():
            if len(c1.target) != len(c2.source):
                continue
            cert = gluing_certificate(c1, c2, group, budget)
            d = cert.as_dict()
            d["pair"] = "%s ; %s" % (n1, n2)
            out.append(d)
    return {"schema_version": SCHEMA_VERSION, "group": group.name, "certificates": out,
            "all_hold": all(d["holds"] for d in out)}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)
