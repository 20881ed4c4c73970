"""
Lie algebras by structure constants, invariant pairings and matrix groups
with exact points.

Conventions
-----------
* ``c[i][j]`` is the coordinate vector of ``[e_i, e_j]``.
* G acts on itself by ``g -> h g h^-1``; the generating field of ``x`` is
  ``v_x(g) = x g - g x``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactalg import (Fp, Jet, Matrix, fresh_tag, rank, solve, tangent_part,
                       UnsupportedScalar)

CONVENTIONS = {
    "conjugation_action": "g -> h g h^-1",
    "action_field": "v_x(g) = x g - g x",
    "beta": "(g^-1 v + v g^-1)/2",
}

SPEC_SCHEMA_VERSION = 1


class SpecError(ValueError):
    """Bad group/pairing specification."""


class TangencyError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Lie algebras


@dataclass(frozen=True)
class LieData:
    names: tuple[str, ...]
    constants: tuple  # constants[i][j] = coordinates of [e_i, e_j]

    @property
    def dim(self) -> int:
        return len(self.names)

    def bracket(self, x: Sequence, y: Sequence) -> tuple:
        n = self.dim
        out = [Fraction(0)] * n
        for i in range(n):
            if x[i] == 0:
                continue
            for j in range(n):
                if y[j] == 0:
                    continue
                cij = self.constants[i][j]
                xy = x[i] * y[j]
                for k in range(n):
                    if cij[k]:
                        out[k] = out[k] + cij[k] * xy
        return tuple(out)

    def ad(self, i: int) -> Matrix:
        """Matrix of ad(e_i) acting on coordinate columns."""
        n = self.dim
        return Matrix([[self.constants[i][j][k] for j in range(n)] for k in range(n)], n)

    def basis_vector(self, i: int) -> tuple:
        return tuple(Fraction(int(i == j)) for j in range(self.dim))


@dataclass
class Verdict:
    """Outcome of a structural check; ``ok`` iff no violations."""

    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_lie(l: LieData) -> Verdict:
    n = l.dim
    v = Verdict()
    c = l.constants
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if c[i][j][k] != -c[j][i][k]:
                    v.violations.append(("antisymmetry", l.names[i], l.names[j]))
                    break
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                ei, ej, ek = (l.basis_vector(t) for t in (i, j, k))
                s = [a + b + cc for a, b, cc in zip(
                    l.bracket(ei, l.bracket(ej, ek)),
                    l.bracket(ej, l.bracket(ek, ei)),
                    l.bracket(ek, l.bracket(ei, ej)))]
                if any(s):
                    v.violations.append(("jacobi", l.names[i], l.names[j], l.names[k]))
    return v


def killing_gram(l: LieData) -> Matrix:
    ads = [l.ad(i) for i in range(l.dim)]
    return Matrix([[(a @ b).trace() for b in ads] for a in ads])


@dataclass(frozen=True)
class InvariantPairing:
    lie: LieData
    gram: Matrix

    def __call__(self, x: Sequence, y: Sequence):
        acc = Fraction(0)
        g = self.gram.entries
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            row = g[i]
            for j, yj in enumerate(y):
                if row[j]:
                    acc = row[j] * xi * yj + acc
        return acc


@dataclass(frozen=True)
class PairingVerdict:
    symmetric: bool
    invariant: bool
    nondegenerate: bool

    @property
    def ok(self) -> bool:
        return self.symmetric and self.invariant and self.nondegenerate


def check_pairing(p: InvariantPairing) -> PairingVerdict:
    l = p.lie
    g = p.gram
    n = l.dim
    sym = g == g.T()
    inv = True
    for i in range(n):
        ei = l.basis_vector(i)
        for j in range(n):
            ej = l.basis_vector(j)
            bij = l.bracket(ei, ej)
            for k in range(n):
                ek = l.basis_vector(k)
                if p(bij, ek) + p(ej, l.bracket(ei, ek)) != 0:
                    inv = False
                    break
            if not inv:
                break
        if not inv:
            break
    return PairingVerdict(sym, inv, rank(g) == n if n else True)


# ---------------------------------------------------------------------------
# matrix groups


def _E(n: int, i: int, j: int) -> Matrix:
    return Matrix([[Fraction(int(a == i and b == j)) for b in range(n)] for a in range(n)], n)


def _symplectic_J(m: int) -> Matrix:
    n = 2 * m
    return Matrix([[Fraction(1) if (b == a + m) else Fraction(-1) if (a == b + m) else Fraction(0)
                    for b in range(n)] for a in range(n)], n)


def _basis_for(family: str, n: int) -> tuple[list[str], list[Matrix]]:
    names, mats = [], []
    if family == "sl":
        for i in range(n - 1):
            names.append("h%d" % (i + 1) if n > 2 else "h")
            mats.append(_E(n, i, i) - _E(n, i + 1, i + 1))
        for i in range(n):
            for j in range(i + 1, n):
                names.append("e%d%d" % (i + 1, j + 1) if n > 2 else "e")
                mats.append(_E(n, i, j))
        for i in range(n):
            for j in range(i + 1, n):
                names.append("f%d%d" % (j + 1, i + 1) if n > 2 else "f")
                mats.append(_E(n, j, i))
    elif family == "so":
        for i in range(n):
            for j in range(i + 1, n):
                names.append("r%d%d" % (i + 1, j + 1))
                mats.append(_E(n, i, j) - _E(n, j, i))
    elif family == "sp":
        m = n // 2
        for i in range(m):
            for j in range(m):
                names.append("a%d%d" % (i + 1, j + 1))
                mats.append(_E(n, i, j) - _E(n, j + m, i + m))
        for i in range(m):
            for j in range(i, m):
                names.append("b%d%d" % (i + 1, j + 1))
                b = _E(n, i, j + m) + (_E(n, j, i + m) if i != j else Matrix.zeros(n, n))
                mats.append(b)
        for i in range(m):
            for j in range(i, m):
                names.append("c%d%d" % (i + 1, j + 1))
                c = _E(n, i + m, j) + (_E(n, j + m, i) if i != j else Matrix.zeros(n, n))
                mats.append(c)
    elif family == "torus":
        for i in range(n):
            names.append("t%d" % (i + 1))
            mats.append(_E(n, i, i))
    else:
        raise SpecError("unknown group family %r" % (family,))
    return names, mats


class MatrixGroup:
    """
    A classical matrix group with a chosen basis of its Lie algebra.

    ``family`` is one of ``sl``, ``so``, ``sp``, ``torus`` and ``n`` the
    ambient matrix size (even for ``sp``).
    """

    def __init__(self, family: str, n: int):
        if family == "sp" and n % 2:
            raise SpecError("symplectic groups need even ambient size")
        if n < 1 or (family in ("sl", "so") and n < 2):
            raise SpecError("ambient size too small for %s" % family)
        self.family = family
        self.n = n
        names, mats = _basis_for(family, n)
        self.basis = tuple(mats)
        self.J = _symplectic_J(n // 2) if family == "sp" else None
        self._pick_coordinates()
        consts = []
        for a in mats:
            row = []
            for b in mats:
                row.append(self.coords(a @ b - b @ a))
            consts.append(tuple(row))
        self.lie = LieData(tuple(names), tuple(consts))

    @property
    def name(self) -> str:
        return "%s%d" % ({"sl": "SL", "so": "SO", "sp": "Sp", "torus": "T"}[self.family], self.n)

    def __repr__(self):
        return "MatrixGroup(%r, %d)" % (self.family, self.n)

    def __eq__(self, other):
        return isinstance(other, MatrixGroup) and (self.family, self.n) == (other.family, other.n)

    def __hash__(self):
        return hash((self.family, self.n))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def rank(self) -> int:
        return {"sl": self.n - 1, "so": self.n // 2, "sp": self.n // 2, "torus": self.n}[self.family]

    def _pick_coordinates(self):
        # choose matrix positions on which the basis is independent; coordinates
        # of any matrix are then read off those positions (a fixed linear map)
        flat = [b.flat() for b in self.basis]
        cols = Matrix([list(f) for f in flat]).T()  # n^2 x dim
        from .exactalg import independent_subset
        rows = independent_subset([cols.row(i) for i in range(cols.rows)])
        sub = Matrix([list(cols.row(i)) for i in rows])
        self._coord_positions = tuple(rows)
        self._coord_inverse = sub.inverse() if sub.rows <= 4 else _inv(sub)

    def coords(self, X: Matrix) -> tuple:
        f = X.flat()
        vals = [f[i] for i in self._coord_positions]
        out = []
        for r in self._coord_inverse.entries:
            acc = 0
            for c, v in zip(r, vals):
                if c:
                    acc = c * v + acc
            out.append(acc)
        return tuple(out)

    def from_coords(self, v: Sequence) -> Matrix:
        acc = None
        for c, b in zip(v, self.basis):
            if c == 0:
                continue
            term = b.map(lambda t: c * t if t else c - c)
            acc = term if acc is None else acc + term
        if acc is None:
            zero = v[0] - v[0] if len(v) else Fraction(0)
            return Matrix.zeros(self.n, self.n, zero)
        return acc

    # defining equations -----------------------------------------------------
    def equations(self, M: Matrix) -> list:
        n = self.n
        if self.family == "sl":
            return [M.det() - 1]
        if self.family == "so":
            P = M.T() @ M
            return [P[i, j] - int(i == j) for i in range(n) for j in range(n)] + [M.det() - 1]
        if self.family == "sp":
            J = self.J
            if isinstance(M[0, 0], Fp):
                J = J.map(lambda t: Fp(t, M[0, 0].p))
            P = M.T() @ J @ M - J
            return list(P.flat())
        return [M[i, j] for i in range(n) for j in range(n) if i != j]

    def contains(self, M: Matrix) -> bool:
        if M.shape != (self.n, self.n):
            return False
        if self.family == "torus" and any(M[i, i] == 0 for i in range(self.n)):
            return False
        return all(e == 0 for e in self.equations(M))

    def is_tangent(self, g: Matrix, v: Matrix) -> bool:
        tag = fresh_tag()
        M = Matrix([[Jet(a, b, tag) for a, b in zip(r, s)]
                    for r, s in zip(g.entries, v.entries)], self.n)
        return all(tangent_part(e, tag) == 0 for e in self.equations(M))

    def in_lie_algebra(self, X: Matrix) -> bool:
        return self.from_coords(self.coords(X)) == X

    def identity(self, p: int | None = None) -> Matrix:
        one = Fp(1, p) if p else Fraction(1)
        return Matrix.identity(self.n, one)

    # sampling -----------------------------------------------------------------
    def random_scalar(self, rng: random.Random, p: int | None, nonzero=False, bound=3):
        if p:
            lo = 1 if nonzero else 0
            return Fp(rng.randint(lo, p - 1), p)
        while True:
            x = Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
            if x or not nonzero:
                return x

    def random_lie(self, rng: random.Random, p: int | None = None) -> Matrix:
        return self.from_coords([self.random_scalar(rng, p) for _ in range(self.dim)])

    def sample_points(self, count: int, seed: int = 0, p: int | None = None) -> list[Matrix]:
        if count < 1:
            raise ValueError("count must be positive")
        if p is not None and self.family in ("so", "sp") and p == 2:
            raise SpecError("Cayley transform needs characteristic != 2")
        rng = random.Random(seed)
        out = []
        while len(out) < count:
            out.append(self._sample(rng, p))
        return out

    def _sample(self, rng, p):
        n = self.n
        one = Fp(1, p) if p else Fraction(1)
        if self.family == "sl":
            g = Matrix.identity(n, one)
            for _ in range(2 * n + 2):
                i, j = rng.sample(range(n), 2)
                t = self.random_scalar(rng, p, nonzero=True)
                g = g @ (Matrix.identity(n, one) + _E(n, i, j).map(lambda a: t * a if a else one - one))
            return g
        if self.family == "torus":
            zero = one - one
            return Matrix([[self.random_scalar(rng, p, nonzero=True) if i == j else zero
                            for j in range(n)] for i in range(n)], n)
        while True:
            A = self.random_lie(rng, p)
            I = Matrix.identity(n, one)
            try:
                inv = (I + A).inverse()
            except ZeroDivisionError:
                continue
            return (I - A) @ inv


def _inv(m: Matrix) -> Matrix:
    return m.inverse()


@dataclass(frozen=True)
class GroupPoint:
    group: MatrixGroup
    matrix: Matrix

    def __post_init__(self):
        if not self.group.contains(self.matrix):
            raise SpecError("matrix is not a point of %s" % self.group.name)


def trace_pairing(G: MatrixGroup) -> InvariantPairing:
    gram = Matrix([[(a @ b).trace() for b in G.basis] for a in G.basis])
    return InvariantPairing(G.lie, gram)


def killing_pairing(G: MatrixGroup) -> InvariantPairing:
    return InvariantPairing(G.lie, killing_gram(G.lie))


def pair_matrices(G: MatrixGroup, P: InvariantPairing, X: Matrix, Y: Matrix):
    """<X, Y> for Lie-algebra matrices, extended linearly to all matrices."""
    return P(G.coords(X), G.coords(Y))


def bracket(X: Matrix, Y: Matrix) -> Matrix:
    return X @ Y - Y @ X


def Ad(g: Matrix, X: Matrix, g_inv: Matrix | None = None) -> Matrix:
    if g_inv is None:
        g_inv = g.inverse()
    return g @ X @ g_inv


def maurer_cartan(G: MatrixGroup, g: Matrix, v: Matrix, check: bool = True):
    """(theta, theta_bar, beta) = (g^-1 v, v g^-1, (theta + theta_bar)/2)."""
    if check and not G.is_tangent(g, v):
        raise TangencyError("vector is not tangent to %s at the point" % G.name)
    gi = g.inverse()
    theta = gi @ v
    theta_bar = v @ gi
    half = Fraction(1, 2)
    if isinstance(g[0, 0], Fp):
        half = Fp(1, g[0, 0].p) / 2
    beta = (theta + theta_bar).scale(half)
    return theta, theta_bar, beta


def conjugation_field(x: Matrix, g: Matrix) -> Matrix:
    return x @ g - g @ x


# ---------------------------------------------------------------------------
# group/pairing specification files


def load_group_spec(source) -> tuple[MatrixGroup, InvariantPairing]:
    """
    Read a group/pairing specification (path, JSON text or dict)::

        {"schema_version": 1, "family": "sl", "n": 2,
         "pairing": "trace" | "killing" | {"gram": [[...]]},
         "structure_constants": [[[...]]]}   # optional, must match the group
    """
    if isinstance(source, dict):
        data = source
    else:
        try:
            text = source if str(source).lstrip().startswith("{") else open(source).read()
            data = json.loads(text)
        except (OSError, json.JSONDecodeError) as e:
            raise SpecError("cannot read group spec: %s" % e) from e
    if not isinstance(data, dict):
        raise SpecError("group spec must be a JSON object")
    if data.get("schema_version", SPEC_SCHEMA_VERSION) != SPEC_SCHEMA_VERSION:
        raise SpecError("unsupported schema_version %r" % data.get("schema_version"))
    try:
        G = MatrixGroup(str(data["family"]), int(data["n"]))
    except KeyError as e:
        raise SpecError("missing field %s" % e) from e
    if "structure_constants" in data:
        c = data["structure_constants"]
        mine = [[list(v) for v in row] for row in G.lie.constants]
        theirs = [[[Fraction(x) for x in v] for v in row] for row in c]
        if mine != theirs:
            raise SpecError("structure constants do not match the matrix realization")
    pr = data.get("pairing", "trace")
    if pr == "trace":
        P = trace_pairing(G)
    elif pr == "killing":
        P = killing_pairing(G)
    elif isinstance(pr, dict) and "gram" in pr:
        gram = Matrix([[Fraction(x) for x in r] for r in pr["gram"]])
        if gram.shape != (G.dim, G.dim):
            raise SpecError("gram matrix must be %dx%d" % (G.dim, G.dim))
        P = InvariantPairing(G.lie, gram)
    else:
        raise SpecError("unknown pairing %r" % (pr,))
    return G, P


def to_field(M: Matrix, p: int | None) -> Matrix:
    if p is None:
        return M
    return M.map(lambda t: t if isinstance(t, Fp) else Fp(Fraction(t), p))


def abelian_lie(dim: int) -> LieData:
    z = tuple(Fraction(0) for _ in range(dim))
    return LieData(tuple("t%d" % (i + 1) for i in range(dim)),
                   tuple(tuple(z for _ in range(dim)) for _ in range(dim)))


def sl2_lie() -> LieData:
    return MatrixGroup("sl", 2).lie


__all__ = [
    "CONVENTIONS", "LieData", "InvariantPairing", "MatrixGroup", "GroupPoint",
    "Verdict", "PairingVerdict", "check_lie", "check_pairing", "killing_gram",
    "trace_pairing", "killing_pairing", "pair_matrices", "bracket", "Ad",
    "maurer_cartan", "conjugation_field", "load_group_spec", "SpecError",
    "TangencyError", "UnsupportedScalar", "abelian_lie", "sl2_lie", "to_field",
]
