"""
Exact arithmetic: rationals, prime fields, first-order jets, polynomials
and dense linear algebra.

Rationals are plain ``fractions.Fraction``.  Everything here is immutable.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Sequence


class UnsupportedScalar(TypeError):
    pass


class DimensionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# prime fields

_PRIMES_CACHE: dict[int, bool] = {}


def is_prime(p: int) -> bool:
    if p in _PRIMES_CACHE:
        return _PRIMES_CACHE[p]
    ok = p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))
    _PRIMES_CACHE[p] = ok
    return ok


class Fp:
    """Element of the prime field F_p, p < 2**16."""

    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        if not (2 <= p < 1 << 16) or not is_prime(p):
            raise ValueError("modulus must be a prime below 2**16, got %r" % (p,))
        if isinstance(v, Fraction):
            v = v.numerator * pow(v.denominator, -1, p)
        self.v = int(v) % p
        self.p = p

    def _lift(self, other):
        if isinstance(other, Fp):
            if other.p != self.p:
                raise UnsupportedScalar("mixing F_%d and F_%d" % (self.p, other.p))
            return other.v
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return other.numerator * pow(other.denominator, -1, self.p)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Fp(self.v + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Fp(self.v - o, self.p)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Fp(o - self.v, self.p)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Fp(self.v * o, self.p)

    __rmul__ = __mul__

    def inverse(self) -> "Fp":
        if self.v == 0:
            raise ZeroDivisionError("0 has no inverse in F_%d" % self.p)
        return Fp(pow(self.v, -1, self.p), self.p)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * Fp(o, self.p).inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Fp(o, self.p) * self.inverse()

    def __neg__(self):
        return Fp(-self.v, self.p)

    def __pos__(self):
        return self

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return (self.v - o) % self.p == 0

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __int__(self):
        return self.v

    def __repr__(self):
        return "Fp(%d, %d)" % (self.v, self.p)

    def __str__(self):
        return str(self.v)


# ---------------------------------------------------------------------------
# jets

_jet_tags = itertools.count(1)


def fresh_tag() -> int:
    """A new infinitesimal.  Later tags are outer to earlier ones."""
    return next(_jet_tags)


class Jet:
    """
    First-order jet ``value + tangent * eps`` with eps**2 = 0.

    Jets nest: a jet whose value is itself a jet (in an older infinitesimal)
    gives mixed second derivatives.  The tag decides which infinitesimal is
    outer when two jets meet.
    """

    __slots__ = ("value", "tangent", "tag")

    def __init__(self, value, tangent, tag: int):
        self.value = value
        self.tangent = tangent
        self.tag = tag

    def _outer(self, other) -> bool:
        return isinstance(other, Jet) and other.tag > self.tag

    def __add__(self, other):
        if isinstance(other, Jet):
            if other.tag == self.tag:
                if not other.tangent:
                    return Jet(self.value + other.value, self.tangent, self.tag)
                if not self.tangent:
                    return Jet(self.value + other.value, other.tangent, self.tag)
                return Jet(self.value + other.value, self.tangent + other.tangent, self.tag)
            if other.tag > self.tag:
                return other.__radd__(self)
        return Jet(self.value + other, self.tangent, self.tag)

    def __radd__(self, other):
        return Jet(other + self.value, self.tangent, self.tag)

    def __neg__(self):
        return Jet(-self.value, -self.tangent, self.tag)

    def __sub__(self, other):
        if self._outer(other):
            return (-other).__radd__(self)
        return self + (-other)

    def __rsub__(self, other):
        return Jet(other - self.value, -self.tangent, self.tag)

    def __mul__(self, other):
        if isinstance(other, Jet):
            if other.tag == self.tag:
                # zero tangents are common (sparse directions); skip their products
                if not self.tangent:
                    t = self.value * other.tangent if other.tangent else self.tangent
                elif not other.tangent:
                    t = self.tangent * other.value
                else:
                    t = self.value * other.tangent + self.tangent * other.value
                return Jet(self.value * other.value, t, self.tag)
            if other.tag > self.tag:
                return other.__rmul__(self)
        return Jet(self.value * other, self.tangent * other if self.tangent else self.tangent,
                   self.tag)

    def __rmul__(self, other):
        return Jet(other * self.value, other * self.tangent if self.tangent else self.tangent,
                   self.tag)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            if other.tag == self.tag:
                c = other.value
                return Jet(self.value / c,
                           (self.tangent * c - self.value * other.tangent) / (c * c),
                           self.tag)
            if other.tag > self.tag:
                return other.__rtruediv__(self)
        return Jet(self.value / other, self.tangent / other, self.tag)

    def __rtruediv__(self, other):
        a = self.value
        return Jet(other / a, -(other * self.tangent) / (a * a), self.tag)

    def __eq__(self, other):
        if isinstance(other, Jet) and other.tag == self.tag:
            return self.value == other.value and self.tangent == other.tangent
        if self._outer(other):
            return other == self
        return self.value == other and self.tangent == 0

    def __hash__(self):
        return hash((self.value, self.tangent, self.tag))

    def __repr__(self):
        return "Jet(%r, %r, tag=%d)" % (self.value, self.tangent, self.tag)


def tangent_part(x, tag: int):
    """Coefficient of the infinitesimal ``tag`` in x (0 if x is independent of it)."""
    if isinstance(x, Jet):
        if x.tag == tag:
            return x.tangent
        if x.tag > tag:
            return Jet(tangent_part(x.value, tag), tangent_part(x.tangent, tag), x.tag)
    return 0


def is_jet(x) -> bool:
    return isinstance(x, Jet)


def scalar_kind(x) -> str:
    if isinstance(x, Jet):
        return "jet"
    if isinstance(x, Fp):
        return "F%d" % x.p
    if isinstance(x, (int, Fraction)):
        return "Q"
    raise UnsupportedScalar("not an exact scalar: %r" % (x,))


def as_scalar(x, p: int | None = None):
    """Coerce ints/strings to Fraction, or to F_p when p is given."""
    if p is not None:
        return x if isinstance(x, Fp) else Fp(Fraction(x), p)
    if isinstance(x, (Fp, Jet)):
        return x
    return Fraction(x)


# ---------------------------------------------------------------------------
# matrices


class Matrix:
    """Dense immutable matrix over one exact scalar kind."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence], cols: int | None = None):
        rows = tuple(tuple(r) for r in entries)
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise DimensionError("ragged matrix")
        self.rows = len(rows)
        self.cols = cols
        self.entries = rows

    # construction
    @classmethod
    def zeros(cls, rows: int, cols: int, zero=Fraction(0)) -> "Matrix":
        return cls([[zero] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int, one=Fraction(1)) -> "Matrix":
        zero = one - one
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], n)

    @classmethod
    def column(cls, values: Sequence) -> "Matrix":
        return cls([[v] for v in values], 1)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "Matrix":
        if not columns:
            return cls([[] for _ in range(rows or 0)], 0)
        n = len(columns[0])
        return cls([[c[i] for c in columns] for i in range(n)], len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def flat(self) -> tuple:
        return tuple(x for r in self.entries for x in r)

    def map(self, f) -> "Matrix":
        return Matrix([[f(x) for x in r] for r in self.entries], self.cols)

    # arithmetic
    def _check_same(self, other: "Matrix"):
        if self.shape != other.shape:
            raise DimensionError("shape mismatch %s vs %s" % (self.shape, other.shape))

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
                      self.cols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
                      self.cols)

    def __neg__(self) -> "Matrix":
        return self.map(lambda x: -x)

    def scale(self, c) -> "Matrix":
        return Matrix([[c * x for x in r] for r in self.entries], self.cols)

    def __mul__(self, c) -> "Matrix":
        if isinstance(c, Matrix):
            return self @ c
        return self.scale(c)

    __rmul__ = scale

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise DimensionError("cannot multiply %s by %s" % (self.shape, other.shape))
        ocols = other.col
        cols = [ocols(j) for j in range(other.cols)]
        out = []
        for r in self.entries:
            row = []
            for c in cols:
                acc = None
                for a, b in zip(r, c):
                    if not a or not b:
                        continue
                    acc = a * b if acc is None else acc + a * b
                if acc is None:
                    acc = r[0] * c[0] if r else 0
                row.append(acc)
            out.append(row)
        return Matrix(out, other.cols)

    def T(self) -> "Matrix":
        if not self.rows:
            return Matrix([[] for _ in range(self.cols)], 0)
        return Matrix([list(c) for c in zip(*self.entries)], self.rows)

    def trace(self):
        acc = self.entries[0][0]
        for i in range(1, self.rows):
            acc = acc + self.entries[i][i]
        return acc

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for r, s in zip(self.entries, other.entries) for a, b in zip(r, s))

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return "Matrix(%s)" % ([[str(x) for x in r] for r in self.entries],)

    # determinants and inverses
    def minor(self, i: int, j: int) -> "Matrix":
        return Matrix([r[:j] + r[j + 1:] for k, r in enumerate(self.entries) if k != i],
                      self.cols - 1)

    def det(self):
        if self.rows != self.cols:
            raise DimensionError("det of non-square matrix")
        n = self.rows
        if n == 0:
            return Fraction(1)
        if n == 1:
            return self.entries[0][0]
        if n == 2:
            (a, b), (c, d) = self.entries
            return a * d - b * c
        if n <= 4 or any(is_jet(x) for x in self.flat()):
            # cofactor expansion: ring-only operations, safe for jets
            r0 = self.entries[0]
            acc = None
            for j in range(n):
                if r0[j] == 0:
                    continue
                term = r0[j] * self.minor(0, j).det()
                if j % 2:
                    term = -term
                acc = term if acc is None else acc + term
            return acc if acc is not None else r0[0] - r0[0]
        return _det_elim(self)

    def adjugate(self) -> "Matrix":
        n = self.rows
        if n == 1:
            return Matrix([[self.entries[0][0] - self.entries[0][0] + 1]])
        return Matrix([[(-1) ** (i + j) * self.minor(j, i).det() for j in range(n)]
                       for i in range(n)], n)

    def inverse(self) -> "Matrix":
        if self.rows != self.cols:
            raise DimensionError("inverse of non-square matrix")
        if self.rows <= 4 or any(is_jet(x) for x in self.flat()):
            d = self.det()
            if d == 0:
                raise ZeroDivisionError("singular matrix")
            adj = self.adjugate()
            return adj.map(lambda x: x / d)
        return _inverse_elim(self)

    def tolist(self) -> list[list]:
        return [list(r) for r in self.entries]


def _check_field(m: Matrix) -> list[list]:
    out = []
    for r in m.entries:
        row = []
        for x in r:
            if isinstance(x, Jet):
                raise UnsupportedScalar("elimination over jets is not supported")
            row.append(Fraction(x) if isinstance(x, int) else x)
        out.append(row)
    return out


def _echelon(m: Matrix):
    """Row echelon form; pivot = first nonzero entry in column order."""
    a = _check_field(m)
    rows, cols = m.rows, m.cols
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pr = a[r]
        inv = 1 / pr[c] if not isinstance(pr[c], Fp) else pr[c].inverse()
        pr = [x * inv for x in pr]
        a[r] = pr
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                ai = a[i]
                a[i] = [x - f * y for x, y in zip(ai, pr)]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: Matrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(_echelon(m)[1])


def kernel_basis(m: Matrix) -> list[tuple]:
    """Basis of the right kernel as coordinate tuples; m @ v == 0 exactly."""
    _check_field(m)
    cols = m.cols
    if m.rows == 0:
        one = Fraction(1)
        zero = Fraction(0)
        return [tuple(one if i == j else zero for i in range(cols)) for j in range(cols)]
    a, pivots = _echelon(m)
    sample = a[0][0] if cols and a else Fraction(0)
    zero = sample - sample
    one = zero + 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * cols
        v[f] = one
        for r, pc in enumerate(pivots):
            v[pc] = -a[r][f]
        basis.append(tuple(v))
    return basis


def _det_elim(m: Matrix):
    a = _check_field(m)
    n = m.rows
    det = a[0][0] - a[0][0] + 1
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return det - det
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def _inverse_elim(m: Matrix) -> Matrix:
    n = m.rows
    one = m.entries[0][0] - m.entries[0][0] + 1
    aug = Matrix([list(r) + [one if i == j else one - one for j in range(n)]
                  for i, r in enumerate(m.entries)], 2 * n)
    a, pivots = _echelon(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return Matrix([r[n:] for r in a[:n]], n)


def solve(m: Matrix, b: Sequence):
    """One exact solution x of m x = b, or None if inconsistent."""
    aug = Matrix([list(r) + [bi] for r, bi in zip(m.entries, b)], m.cols + 1)
    a, pivots = _echelon(aug)
    if m.cols in pivots:
        return None
    zero = b[0] - b[0] if len(b) else Fraction(0)
    x = [zero] * m.cols
    for r, pc in enumerate(pivots):
        x[pc] = a[r][m.cols]
    return tuple(x)


def span_rank(vectors: Sequence[Sequence]) -> int:
    if not vectors:
        return 0
    return rank(Matrix([list(v) for v in vectors]))


def in_span(vectors: Sequence[Sequence], v: Sequence) -> bool:
    return span_rank(list(vectors) + [v]) == span_rank(vectors)


def independent_subset(vectors: Sequence[Sequence]) -> list[int]:
    """Indices of the first maximal independent subfamily (greedy, in order)."""
    if not vectors:
        return []
    m = Matrix([list(v) for v in vectors]).T()
    return _echelon(m)[1]


def matvec(m: Matrix, v: Sequence) -> tuple:
    out = []
    for r in m.entries:
        acc = r[0] * v[0]
        for k in range(1, len(r)):
            acc = acc + r[k] * v[k]
        out.append(acc)
    return tuple(out)


# ---------------------------------------------------------------------------
# polynomials


class Polynomial:
    """Multivariate polynomial with rational coefficients."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: dict | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != n:
                raise DimensionError("exponent vector %r has wrong length" % (exps,))
            c = Fraction(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self.terms = clean

    @classmethod
    def constant(cls, variables, c) -> "Polynomial":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, variables, name: str) -> "Polynomial":
        i = list(variables).index(name)
        e = [0] * len(variables)
        e[i] = 1
        return cls(variables, {tuple(e): 1})

    def _same(self, other: "Polynomial"):
        if self.variables != other.variables:
            raise DimensionError("polynomials over different variables")

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.variables, other)
        self._same(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return Polynomial(self.variables, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(self.variables, {e: c * other for e, c in self.terms.items()})
        self._same(other)
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return Polynomial(self.variables, t)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, Polynomial) and self.variables == other.variables
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.variables, tuple(sorted(self.terms.items()))))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def partial(self, i: int) -> "Polynomial":
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = c * e[i]
        return Polynomial(self.variables, t)

    def __call__(self, point: Sequence):
        if len(point) != len(self.variables):
            raise DimensionError("expected %d values, got %d" % (len(self.variables), len(point)))
        acc = None
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                for _ in range(k):
                    term = term * x
            acc = term if acc is None else acc + term
        if acc is None:
            return Fraction(0)
        return acc

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            mon = "*".join(v if k == 1 else "%s^%d" % (v, k)
                           for v, k in zip(self.variables, e) if k)
            parts.append("%s%s" % (c, "*" + mon if mon else ""))
        return " + ".join(parts)


def poly_eval_jet(p: Polynomial, point: Sequence, direction: Sequence):
    """(p(point), derivative of p at point along direction), by jet arithmetic."""
    n = len(p.variables)
    if len(point) != n or len(direction) != n:
        raise DimensionError("point/direction must have %d coordinates" % n)
    tag = fresh_tag()
    val = p([Jet(Fraction(x), Fraction(d), tag) for x, d in zip(point, direction)])
    if isinstance(val, Jet):
        return val.value, val.tangent
    return val, Fraction(0)


def random_polynomial(rng, nvars: int, max_degree: int, nterms: int = 6) -> Polynomial:
    names = ["x%d" % i for i in range(nvars)]
    terms = {}
    for _ in range(nterms):
        d = rng.randint(0, max_degree)
        e = [0] * nvars
        for _ in range(d):
            e[rng.randrange(nvars)] += 1
        terms[tuple(e)] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return Polynomial(names, terms)
