"""
Tangent complexes of quotient stacks at a point and shifted 2-forms on them.

A complex is a finite graded vector space with matrices ``d[k]: T^k -> T^{k+1}``.
A shifted 2-form of shift ``n`` is a family of pairing blocks ``B[(a, b)]``
between ``T^a`` and ``T^b``; only blocks with ``a + b = -n`` contribute to the
induced map ``T -> L[n]`` where ``L[n]^k = (T^{-k-n})^*``.  Blocks of the
wrong total degree are kept but ignored, so a form with the wrong shift is
simply degenerate.

Nondegeneracy is decided by exactness of the mapping cone, one rank at a
time.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .eqforms import (AdjointSpace, CartanElement, EquivariantForm, GSpace, SampleSet,
                      adjoint_cartan_element, cartan_diff, closure_identities, vanishes,
                      vflat)
from .exactalg import DimensionError, Matrix, rank, solve
from .liecore import (CONVENTIONS, InvariantPairing, LieData, MatrixGroup, check_pairing,
                      pair_matrices)

REPORT_SCHEMA_VERSION = 1


class ChainMapError(ValueError):
    """The pairing blocks do not assemble to a chain map T -> L[n]."""


def _zeros(r: int, c: int) -> Matrix:
    return Matrix.zeros(r, c)


def _is_zero(m: Matrix) -> bool:
    return all(x == 0 for row in m.entries for x in row)


@dataclass(frozen=True)
class TangentComplex:
    dims: dict                      # degree -> dimension
    d: dict = field(default_factory=dict)   # degree k -> Matrix (dims[k+1] x dims[k])
    point: object = None
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, m in self.d.items():
            if m.shape != (self.dim(k + 1), self.dim(k)):
                raise DimensionError("d[%d] has shape %s, expected %s"
                                     % (k, m.shape, (self.dim(k + 1), self.dim(k))))
        for k in self.d:
            if k + 1 in self.d and self.dim(k) and self.dim(k + 2):
                if not _is_zero(self.d[k + 1] @ self.d[k]):
                    raise ValueError("d o d != 0 at degree %d" % k)

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def diff(self, k: int) -> Matrix:
        m = self.d.get(k)
        return m if m is not None else _zeros(self.dim(k + 1), self.dim(k))

    @property
    def degrees(self) -> list[int]:
        return sorted(k for k, v in self.dims.items() if v)

    def euler(self) -> int:
        return sum((-1) ** (k % 2) * v for k, v in self.dims.items())

    def homology(self) -> dict:
        out = {}
        for k in self.degrees:
            out[k] = self.dim(k) - rank(self.diff(k)) - rank(self.diff(k - 1))
        return out

    def is_acyclic(self) -> bool:
        return all(h == 0 for h in self.homology().values())

    def dual(self, n: int = 0) -> "TangentComplex":
        """L[n]: degree k holds (T^{-k-n})^*, differential -(-1)^k d^T."""
        dims = {-k - n: v for k, v in self.dims.items()}
        d = {}
        for k in dims:
            src = -k - n - 1
            if self.dim(src) and dims.get(k):
                sign = -1 if k % 2 == 0 else 1
                d[k] = self.diff(src).T().scale(sign)
        return TangentComplex(dims, d, self.point)


def cotangent(t: TangentComplex) -> TangentComplex:
    return t.dual(0)


@dataclass(frozen=True)
class ShiftedTwoForm:
    n: int
    blocks: dict                    # (a, b) -> Matrix dims[a] x dims[b]
    label: str = ""

    def block(self, t: TangentComplex, a: int, b: int) -> Matrix:
        m = self.blocks.get((a, b))
        if m is None or a + b != -self.n:
            return _zeros(t.dim(a), t.dim(b))
        return m

    def phi(self, t: TangentComplex, k: int) -> Matrix:
        """T^k -> L[n]^k = (T^{-k-n})^*, i.e. the transpose of block (k, -k-n)."""
        return self.block(t, k, -k - self.n).T()

    def pairing(self, t: TangentComplex, a: int, i: int, b: int, j: int):
        return self.block(t, a, b)[i, j]


def map_defects(src: TangentComplex, tgt: TangentComplex, phi: Callable) -> list[int]:
    """Degrees k where phi_{k+1} d^k != d^k phi_k; ``phi(k)`` is a matrix tgt^k x src^k."""
    bad = []
    degs = set(src.dims) | set(tgt.dims)
    for k in sorted(degs | {k - 1 for k in degs}):
        lhs = phi(k + 1) @ src.diff(k)
        rhs = tgt.diff(k) @ phi(k)
        if lhs.shape != rhs.shape:
            raise DimensionError("incompatible shapes at degree %d" % k)
        if lhs.rows and lhs.cols and lhs != rhs:
            bad.append(k)
    return bad


def mapping_cone(src: TangentComplex, tgt: TangentComplex, phi: Callable) -> TangentComplex:
    """C^k = src^{k+1} + tgt^k with d(s, t) = (-d s, phi s + d t)."""
    degs = [k - 1 for k in src.dims] + list(tgt.dims)
    lo, hi = min(degs) - 1, max(degs) + 1
    dims, d = {}, {}
    for k in range(lo, hi + 1):
        dims[k] = src.dim(k + 1) + tgt.dim(k)
    for k in range(lo, hi):
        rows, cols = dims[k + 1], dims[k]
        if not rows or not cols:
            continue
        a = src.diff(k + 1).scale(-1)
        b = phi(k + 1)
        c = tgt.diff(k)
        ta, lb = src.dim(k + 1), tgt.dim(k)
        out = []
        for i in range(src.dim(k + 2)):
            out.append(list(a.row(i)) + [Fraction(0)] * lb)
        for i in range(tgt.dim(k + 1)):
            out.append(list(b.row(i) if ta else ()) + list(c.row(i) if lb else ()))
        d[k] = Matrix(out, cols)
    return TangentComplex(dims, d, src.point)


def quasi_isomorphic(src: TangentComplex, tgt: TangentComplex, phi: Callable) -> bool:
    bad = map_defects(src, tgt, phi)
    if bad:
        raise ChainMapError("chain-map condition fails in degrees %s" % bad)
    return mapping_cone(src, tgt, phi).is_acyclic()


def chain_map_defects(form: ShiftedTwoForm, t: TangentComplex) -> list[int]:
    """Degrees k where the induced map T -> L[n] fails to commute with d."""
    return map_defects(t, t.dual(form.n), lambda k: form.phi(t, k))


def cone(form: ShiftedTwoForm, t: TangentComplex) -> TangentComplex:
    return mapping_cone(t, t.dual(form.n), lambda k: form.phi(t, k))


def nondegenerate(form: ShiftedTwoForm, t: TangentComplex) -> bool:
    """True iff T -> L[n] is a quasi-isomorphism (its cone is exact)."""
    return quasi_isomorphic(t, t.dual(form.n), lambda k: form.phi(t, k))


def graded_antisymmetric(form: ShiftedTwoForm, t: TangentComplex) -> bool:
    """<a,b> = -(-1)^{|a||b|} <b,a> on basis vectors."""
    for (a, b), m in form.blocks.items():
        if a + b != -form.n:
            continue
        other = form.block(t, b, a)
        sign = 1 if (a * b) % 2 else -1
        if m != other.T().scale(sign):
            return False
    return True


def change_basis(t: TangentComplex, form: ShiftedTwoForm, S: dict):
    """New coordinates c' = S[k] c in each degree; returns (t', form')."""
    inv = {k: S[k].inverse() for k in S}
    d = {k: S[k + 1] @ m @ inv[k] for k, m in t.d.items()}
    blocks = {(a, b): inv[a].T() @ m @ inv[b] for (a, b), m in form.blocks.items()}
    return TangentComplex(dict(t.dims), d, t.point), ShiftedTwoForm(form.n, blocks, form.label)


def random_invertible(rng: random.Random, n: int) -> Matrix:
    while True:
        m = Matrix([[Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(n)]
                    for _ in range(n)], n)
        if rank(m) == n:
            return m


# ---------------------------------------------------------------------------
# tangent complexes of quotient stacks


def tangent_complex_quotient(X: GSpace, pt) -> TangentComplex:
    """Lie algebra in degree -1 mapping to T_pt X in degree 0 by x -> v_x(pt)."""
    if not X.contains(pt):
        raise ValueError("point is not on %s" % X.name)
    lie_basis = []
    for i, G in enumerate(X.groups):
        for b in G.basis:
            x = tuple(b if j == i else Matrix.zeros(H.n, H.n) for j, H in enumerate(X.groups))
            lie_basis.append(x)
    tb = X.tangent_basis(pt)
    cols = []
    if tb:
        basis_m = Matrix.from_columns([vflat(b) for b in tb])
        for x in lie_basis:
            c = solve(basis_m, vflat(X.field(x, pt)))
            if c is None:
                raise ValueError("generating field is not tangent")
            cols.append(c)
    dims = {-1: len(lie_basis), 0: len(tb)}
    d = {}
    if lie_basis and tb:
        d[-1] = Matrix.from_columns(cols)
    return TangentComplex(dims, d, pt)


# ---------------------------------------------------------------------------
# the three structures


@dataclass
class ShiftedStructure:
    """A family of complexes and shifted forms indexed by atlas points."""

    name: str
    n: int
    complex_at: Callable
    form_at: Callable
    sample: Callable                 # (rng, p) -> point
    cartan: CartanElement | None = None
    closure: Callable | None = None  # (count, seed) -> dict name -> bool
    notes: dict = field(default_factory=dict)

    def check_point(self, pt) -> dict:
        t, w = self.complex_at(pt), self.form_at(pt)
        defects = chain_map_defects(w, t)
        entry = {"chain_map": not defects, "antisymmetric": graded_antisymmetric(w, t)}
        entry["nondegenerate"] = (not defects) and cone(w, t).is_acyclic()
        return entry

    def report(self, count: int = 10, seed: int = 0, closure: bool = True) -> dict:
        rng = random.Random(seed)
        points = []
        for _ in range(count):
            pt = self.sample(rng, None)
            entry = {"point": _jsonable(pt)}
            entry.update(self.check_point(pt))
            points.append(entry)
        rep = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "structure": self.name,
            "shift": self.n,
            "seed": seed,
            "samples": count,
            "conventions": dict(CONVENTIONS),
            "points": points,
            "nondegenerate": all(p["nondegenerate"] for p in points),
        }
        if closure and self.closure is not None:
            rep["closure"] = self.closure(count, seed)
        rep.update(self.notes)
        return rep


def _jsonable(x):
    if isinstance(x, Matrix):
        return [[str(v) for v in r] for r in x.entries]
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    return str(x)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def build_bg(P: InvariantPairing, n: int = 2) -> ShiftedStructure:
    """BG: the Lie algebra in degree -1 paired with itself by the gram matrix."""
    dim = P.lie.dim

    def complex_at(pt):
        return TangentComplex({-1: dim}, {}, pt)

    def form_at(pt):
        return ShiftedTwoForm(n, {(-1, -1): P.gram}, "BG")

    return ShiftedStructure("BG", n, complex_at, form_at, lambda rng, p: ())


def coadjoint_complex(l: LieData, xi: Sequence) -> TangentComplex:
    """At xi in g^* (dual coordinates): d(e_i) = -xi([e_i, -])."""
    n = l.dim
    cols = []
    for i in range(n):
        cols.append(tuple(-sum((c * xk for c, xk in zip(l.constants[i][j], xi)), Fraction(0))
                          for j in range(n)))
    d = {-1: Matrix.from_columns(cols)} if n else {}
    return TangentComplex({-1: n, 0: n}, d, tuple(xi))


def build_coadjoint(l: LieData) -> ShiftedStructure:
    """[g^*/G] with the canonical pairing of g and g^*, shift 1."""
    n = l.dim
    one = Matrix.identity(n)

    def form_at(pt):
        return ShiftedTwoForm(1, {(-1, 0): one, (0, -1): one.scale(-1)}, "canonical")

    def sample(rng, p):
        return tuple(Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(n))

    return ShiftedStructure("[g*/G]", 1, lambda pt: coadjoint_complex(l, pt), form_at, sample)


def beta_matrix(G: MatrixGroup, P: InvariantPairing, g: Matrix) -> Matrix:
    """Rows: tangent basis g*e_i; columns: Lie basis e_j; entry <beta(g e_i), e_j>."""
    gi = g.inverse()
    rows = []
    for bi in G.basis:
        v = g @ bi
        beta = (gi @ v + v @ gi).scale(Fraction(1, 2))
        rows.append([pair_matrices(G, P, beta, bj) for bj in G.basis])
    return Matrix(rows, G.dim)


def build_adjoint_group(G: MatrixGroup, P: InvariantPairing) -> ShiftedStructure:
    """[G/G^ad] with the beta pairing and the Cartan element omega0 + u omega1."""
    X = AdjointSpace(G)
    verdict = check_pairing(P)

    def form_at(pt):
        B = beta_matrix(G, P, pt[0])
        return ShiftedTwoForm(1, {(0, -1): B, (-1, 0): B.T().scale(-1)}, "beta")

    def closure(count, seed):
        return closure_identities(G, P, SampleSet(X, count, seed))

    notes = {"group": G.name}
    if not verdict.nondegenerate:
        notes["warning"] = "pairing is degenerate"
    return ShiftedStructure("[G/G^ad]", 1, lambda pt: tangent_complex_quotient(X, pt), form_at,
                            lambda rng, p: X.sample(rng, p), adjoint_cartan_element(G, P),
                            closure, notes)


# ---------------------------------------------------------------------------
# isotropic structures


@dataclass
class IsotropyWitness:
    """
    A degree-0 equivariant 2-form ``gamma`` on a source space together with a
    map ``mu`` into the space carrying a closed Cartan element ``target``.
    The witness is valid when ``(d_LR + u d) gamma = -mu^* target``.
    """

    gamma: EquivariantForm
    mu: Callable
    target: CartanElement

    def defects(self, samples: SampleSet) -> dict:
        from .eqforms import pullback
        src = self.gamma.space
        dg = cartan_diff(CartanElement((self.gamma,)))
        out = {}
        powers = sorted(set(dg.u_powers) | set(self.target.u_powers))
        for k in powers:
            lhs = dg.component(k)
            tgt = self.target.component(k)
            rhs = pullback(tgt, self.mu, src).with_u(k) if tgt is not None else None
            if lhs is None and rhs is None:
                continue
            if lhs is None:
                diff = rhs
            elif rhs is None:
                diff = lhs
            else:
                diff = lhs + rhs
            out[k] = len(vanishes(diff, samples))
        return out

    def holds(self, samples: SampleSet) -> bool:
        return all(v == 0 for v in self.defects(samples).values())
