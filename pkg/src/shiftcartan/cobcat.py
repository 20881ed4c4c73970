"""
Oriented cobordisms in normal form.

A 2-dimensional cobordism is a list of connected components, each recorded
by its genus and the sets of source/target circles on its boundary; oriented
surfaces are classified by (genus, boundary count), so this is a complete
invariant of the diffeomorphism class relative to the boundary.  Composition
glues along the middle object with union-find and recovers the genus from
the additive Euler characteristic.

Expression grammar (``;`` binds looser than ``|``)::

    expr    := term (";" term)*
    term    := factor ("|" factor)*
    factor  := atom | "(" expr ")"
    atom    := "cyl" | "cap" | "cup" | "pants" | "copants" | "empty"
             | "id" "(" INT ")"
             | "genus" "(" INT ";" INT "," INT ")"
             | "perm" "(" INT ("," INT)* ")"

``cup`` is the disc 0 -> 1, ``cap`` the disc 1 -> 0, ``pants`` is 1 -> 2,
``copants`` 2 -> 1 and ``perm(p0, ..., pk)`` sends input i to output p_i.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field

SCHEMA_VERSION = 1
PRESENTATION_CONVENTION = (
    "generators a1,b1,..,ag,bg,c1..c_{b-1}; boundary circles ordered outputs then inputs; "
    "raw words w_j = c_j, w_b = (prod[a_i,b_i] prod c_j)^-1; oriented word = w for outputs, "
    "w^-1 for inputs; closed surfaces carry the relator prod[a_i,b_i]")


class CobordismError(ValueError):
    pass


class ArityError(CobordismError):
    """Composition of cobordisms whose middle objects differ."""


class ParseError(CobordismError):
    def __init__(self, msg: str, pos: int):
        super().__init__("%s at position %d" % (msg, pos))
        self.pos = pos


class OrientationError(CobordismError):
    pass


# ---------------------------------------------------------------------------
# objects and morphisms


@dataclass(frozen=True)
class ClosedObject:
    """Circles (d = 1) or points (d = 0), each with an orientation sign."""

    signs: tuple = ()
    d: int = 1

    @classmethod
    def circles(cls, n: int) -> "ClosedObject":
        return cls((1,) * n, 1)

    def __len__(self):
        return len(self.signs)

    def __add__(self, other: "ClosedObject") -> "ClosedObject":
        if self.d != other.d:
            raise CobordismError("objects of different dimension")
        return ClosedObject(self.signs + other.signs, self.d)

    def reverse(self, i: int) -> "ClosedObject":
        s = list(self.signs)
        s[i] = -s[i]
        return ClosedObject(tuple(s), self.d)


@dataclass(frozen=True, order=True)
class Component:
    inputs: tuple      # sorted source indices
    outputs: tuple     # sorted target indices
    genus: int = 0

    @property
    def boundary(self) -> int:
        return len(self.inputs) + len(self.outputs)

    @property
    def euler(self) -> int:
        return 2 - 2 * self.genus - self.boundary


def _sort_key(c: Component):
    closed = not c.inputs and not c.outputs
    return (closed, c.inputs, c.outputs, c.genus)


@dataclass(frozen=True)
class Cobordism:
    source: ClosedObject
    target: ClosedObject
    components: tuple

    def __post_init__(self):
        comps = tuple(sorted(self.components, key=_sort_key))
        object.__setattr__(self, "components", comps)
        ins = [i for c in comps for i in c.inputs]
        outs = [j for c in comps for j in c.outputs]
        if sorted(ins) != list(range(len(self.source))):
            raise CobordismError("inputs do not partition the source")
        if sorted(outs) != list(range(len(self.target))):
            raise CobordismError("outputs do not partition the target")
        for c in comps:
            if c.genus < 0:
                raise CobordismError("negative genus")

    @property
    def euler(self) -> int:
        return sum(c.euler for c in self.components)

    @property
    def arity(self) -> tuple[int, int]:
        return len(self.source), len(self.target)

    def __str__(self):
        return print_cobordism(self)


def atom(genus: int, n_in: int, n_out: int) -> Cobordism:
    return Cobordism(ClosedObject.circles(n_in), ClosedObject.circles(n_out),
                     (Component(tuple(range(n_in)), tuple(range(n_out)), genus),))


def identity(n: int) -> Cobordism:
    return permutation(list(range(n)))


def permutation(p) -> Cobordism:
    p = list(p)
    if sorted(p) != list(range(len(p))):
        raise CobordismError("perm(...) needs a permutation of 0..n-1")
    comps = tuple(Component((i,), (p[i],), 0) for i in range(len(p)))
    return Cobordism(ClosedObject.circles(len(p)), ClosedObject.circles(len(p)), comps)


EMPTY = Cobordism(ClosedObject(), ClosedObject(), ())

ATOMS = {
    "cyl": lambda: atom(0, 1, 1),
    "cap": lambda: atom(0, 1, 0),
    "cup": lambda: atom(0, 0, 1),
    "pants": lambda: atom(0, 1, 2),
    "copants": lambda: atom(0, 2, 1),
    "empty": lambda: EMPTY,
}


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def compose(c1: Cobordism, c2: Cobordism) -> Cobordism:
    """c1 followed by c2 (glued along target(c1) = source(c2))."""
    if c1.target != c2.source:
        raise ArityError("cannot compose: %d circle(s) out, %d circle(s) in"
                         % (len(c1.target), len(c2.source)))
    n1 = len(c1.components)
    uf = _UnionFind(n1 + len(c2.components))
    out_owner = {j: k for k, c in enumerate(c1.components) for j in c.outputs}
    in_owner = {i: n1 + k for k, c in enumerate(c2.components) for i in c.inputs}
    for j in range(len(c1.target)):
        uf.union(out_owner[j], in_owner[j])
    groups: dict[int, list] = {}
    for k, c in enumerate(c1.components + c2.components):
        groups.setdefault(uf.find(k), []).append((k, c))
    comps = []
    for members in groups.values():
        chi = sum(c.euler for _, c in members)
        ins = tuple(sorted(i for k, c in members if k < n1 for i in c.inputs))
        outs = tuple(sorted(j for k, c in members if k >= n1 for j in c.outputs))
        twice_g = 2 - chi - len(ins) - len(outs)
        comps.append(Component(ins, outs, twice_g // 2))
    return Cobordism(c1.source, c2.target, tuple(comps))


def tensor(c1: Cobordism, c2: Cobordism) -> Cobordism:
    s, t = len(c1.source), len(c1.target)
    shifted = tuple(Component(tuple(i + s for i in c.inputs), tuple(j + t for j in c.outputs), c.genus)
                    for c in c2.components)
    return Cobordism(c1.source + c2.source, c1.target + c2.target, c1.components + shifted)


def trace(c: Cobordism, j1: int, j2: int) -> Cobordism:
    """Glue output circles j1 and j2 together (self-gluing)."""
    n = len(c.target)
    if not (0 <= j1 < n and 0 <= j2 < n) or j1 == j2:
        raise CobordismError("need two distinct output circles")
    rest = [j for j in range(n) if j not in (j1, j2)]
    p = [0] * n
    for new, j in enumerate(rest):
        p[j] = new
    p[j1], p[j2] = len(rest), len(rest) + 1
    glued = compose(c, permutation(p))
    return compose(glued, tensor(identity(len(rest)), compose(atom(0, 2, 1), atom(0, 1, 0))))


# ---------------------------------------------------------------------------
# parser and printer


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]+)|(.))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(1) if m.group(1) else m.start(2) if m.group(2) else m.start(3)
        if m.group(1):
            out.append(("int", int(m.group(1)), start))
        elif m.group(2):
            out.append(("name", m.group(2), start))
        elif m.group(3):
            if m.group(3).isspace():
                pos = m.end()
                continue
            out.append(("sym", m.group(3), start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] if tok[0] != "end" else "end of input"
            raise ParseError("expected %r, got %r" % (want, got), tok[2])
        self.i += 1
        return tok

    def expr(self):
        left = self.term()
        while self.peek()[:2] == ("sym", ";"):
            pos = self.take()[2]
            right = self.term()
            try:
                left = compose(left, right)
            except ArityError as e:
                raise ParseError(str(e), pos) from None
        return left

    def term(self):
        left = self.factor()
        while self.peek()[:2] == ("sym", "|"):
            self.take()
            left = tensor(left, self.factor())
        return left

    def factor(self):
        tok = self.peek()
        if tok[:2] == ("sym", "("):
            self.take()
            e = self.expr()
            self.take("sym", ")")
            return e
        if tok[0] != "name":
            got = tok[1] if tok[0] != "end" else "end of input"
            raise ParseError("expected an atom, got %r" % (got,), tok[2])
        name = tok[1]
        self.take()
        if name in ATOMS:
            return ATOMS[name]()
        if name == "id":
            self.take("sym", "(")
            n = self.take("int")[1]
            self.take("sym", ")")
            return identity(n)
        if name == "genus":
            self.take("sym", "(")
            g = self.take("int")[1]
            self.take("sym", ";")
            a = self.take("int")[1]
            self.take("sym", ",")
            b = self.take("int")[1]
            self.take("sym", ")")
            return atom(g, a, b)
        if name == "perm":
            self.take("sym", "(")
            vals = [self.take("int")[1]]
            while self.peek()[:2] == ("sym", ","):
                self.take()
                vals.append(self.take("int")[1])
            self.take("sym", ")")
            try:
                return permutation(vals)
            except CobordismError as e:
                raise ParseError(str(e), tok[2]) from None
        raise ParseError("unknown atom %r" % name, tok[2])


def parse(text: str) -> Cobordism:
    p = _Parser(text)
    c = p.expr()
    tok = p.peek()
    if tok[0] != "end":
        raise ParseError("unexpected %r" % (tok[1],), tok[2])
    return c


def _atom_text(c: Component) -> str:
    a, b = len(c.inputs), len(c.outputs)
    names = {(0, 1, 1): "cyl", (0, 1, 0): "cap", (0, 0, 1): "cup", (0, 1, 2): "pants",
             (0, 2, 1): "copants"}
    return names.get((c.genus, a, b), "genus(%d; %d, %d)" % (c.genus, a, b))


def print_cobordism(c: Cobordism) -> str:
    """An expression whose parse is ``c`` (positively oriented objects)."""
    if any(s != 1 for s in c.source.signs + c.target.signs):
        raise CobordismError("the grammar only expresses positively oriented objects")
    if not c.components:
        return "empty"
    order_in = [i for comp in c.components for i in comp.inputs]
    order_out = [j for comp in c.components for j in comp.outputs]
    parts = [_atom_text(comp) for comp in c.components]
    body = " | ".join(parts)
    pieces = []
    if order_in != sorted(order_in):
        p = [0] * len(order_in)
        for pos, i in enumerate(order_in):
            p[i] = pos
        pieces.append("perm(%s)" % ", ".join(map(str, p)))
    pieces.append("(%s)" % body if len(parts) > 1 else body)
    if order_out != sorted(order_out):
        pieces.append("perm(%s)" % ", ".join(map(str, order_out)))
    return " ; ".join(pieces)


def random_expression(rng: random.Random, depth: int = 3) -> str:
    """A random well-typed expression (for round-trip testing)."""
    text, _, _ = _random_expr(rng, depth, None)
    return text


def _random_atom(rng, n_in):
    choices = [("cyl", 1, 1), ("cap", 1, 0), ("cup", 0, 1), ("pants", 1, 2), ("copants", 2, 1)]
    if n_in is not None:
        choices = [c for c in choices if c[1] == n_in]
        if not choices:
            g = rng.randint(0, 1)
            k = rng.randint(0, 2)
            return "genus(%d; %d, %d)" % (g, n_in, k), n_in, k
    if rng.random() < 0.15:
        a = n_in if n_in is not None else rng.randint(0, 2)
        g, b = rng.randint(0, 2), rng.randint(0, 2)
        return "genus(%d; %d, %d)" % (g, a, b), a, b
    return rng.choice(choices)


def _random_expr(rng, depth, n_in):
    """Returns (text, inputs, outputs); n_in constrains the source arity."""
    if depth <= 0 or rng.random() < 0.3:
        return _random_atom(rng, n_in)
    if rng.random() < 0.5:
        t1, a1, b1 = _random_expr(rng, depth - 1, n_in)
        t2, a2, b2 = _random_expr(rng, depth - 1, b1)
        if a2 != b1:
            return t1, a1, b1
        return "(%s ; %s)" % (t1, t2), a1, b2
    if n_in is None:
        t1, a1, b1 = _random_expr(rng, depth - 1, None)
        t2, a2, b2 = _random_expr(rng, depth - 1, None)
        return "%s | %s" % (t1, t2) if rng.random() < 0.5 else "(%s | %s)" % (t1, t2), a1 + a2, b1 + b2
    split = rng.randint(0, n_in)
    t1, a1, b1 = _random_expr(rng, depth - 1, split)
    t2, a2, b2 = _random_expr(rng, depth - 1, n_in - split)
    if a1 + a2 != n_in:
        return _random_atom(rng, n_in)
    return "(%s | %s)" % (t1, t2), a1 + a2, b1 + b2


# ---------------------------------------------------------------------------
# presentations


def word_reduce(w) -> tuple:
    out = []
    for g, e in w:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


def word_inverse(w) -> tuple:
    return tuple((g, -e) for g, e in reversed(w))


def word_mul(*ws) -> tuple:
    acc = ()
    for w in ws:
        acc = word_reduce(acc + tuple(w))
    return acc


def commutator(x: str, y: str) -> tuple:
    return ((x, 1), (y, 1), (x, -1), (y, -1))


def word_text(w) -> str:
    if not w:
        return "1"
    return " ".join(g if e == 1 else "%s^-1" % g for g, e in w)


@dataclass(frozen=True)
class ComponentPresentation:
    genus: int
    generators: tuple
    relators: tuple                 # empty when free
    circles: tuple                  # (("out", j) | ("in", i)) in presentation order
    raw_words: tuple
    oriented_words: tuple

    @property
    def free(self) -> bool:
        return not self.relators

    def standard_relator(self) -> tuple:
        acc = ()
        for i in range(1, self.genus + 1):
            acc = word_mul(acc, commutator("a%d" % i, "b%d" % i))
        return acc

    def check(self) -> bool:
        """Product of raw boundary words times the commutators is trivial."""
        prod = word_mul(self.standard_relator(), *self.raw_words)
        return prod == ()


@dataclass(frozen=True)
class CospanPresentation:
    cobordism: Cobordism
    components: tuple
    convention: str = PRESENTATION_CONVENTION

    def word_for(self, side: str, index: int):
        for k, comp in enumerate(self.components):
            for circ, w in zip(comp.circles, comp.oriented_words):
                if circ == (side, index):
                    return k, w
        raise KeyError((side, index))


def present_component(c: Component) -> ComponentPresentation:
    g = c.genus
    gens = []
    for i in range(1, g + 1):
        gens += ["a%d" % i, "b%d" % i]
    circles = tuple(("out", j) for j in c.outputs) + tuple(("in", i) for i in c.inputs)
    b = len(circles)
    if b == 0:
        rel = ()
        for i in range(1, g + 1):
            rel = word_mul(rel, commutator("a%d" % i, "b%d" % i))
        return ComponentPresentation(g, tuple(gens), (rel,) if rel else ((),), (), (), ())
    cs = ["c%d" % j for j in range(1, b)]
    gens += cs
    raw = [((cj, 1),) for cj in cs]
    acc = ()
    for i in range(1, g + 1):
        acc = word_mul(acc, commutator("a%d" % i, "b%d" % i))
    for cj in cs:
        acc = word_mul(acc, ((cj, 1),))
    raw.append(word_inverse(acc))
    oriented = [w if side == "out" else word_inverse(w) for (side, _), w in zip(circles, raw)]
    return ComponentPresentation(g, tuple(gens), (), circles, tuple(raw), tuple(oriented))


def to_cospan(c: Cobordism) -> CospanPresentation:
    return CospanPresentation(c, tuple(present_component(comp) for comp in c.components))


# ---------------------------------------------------------------------------
# orientation bookkeeping


def relative_orientation(c: Cobordism) -> dict:
    """Sign of each boundary circle in the boundary of the relative class: out - in."""
    table = {}
    for i, s in enumerate(c.source.signs):
        table[("in", i)] = -s
    for j, s in enumerate(c.target.signs):
        table[("out", j)] = s
    return table


def compose_orientation(c1: Cobordism, c2: Cobordism) -> dict:
    """Composite sign table, checking that the middle circles cancel."""
    t1, t2 = relative_orientation(c1), relative_orientation(c2)
    for j in range(len(c1.target)):
        if t1[("out", j)] + t2[("in", j)] != 0:
            raise OrientationError("middle circle %d does not cancel" % j)
    out = {k: v for k, v in t1.items() if k[0] == "in"}
    out.update({k: v for k, v in t2.items() if k[0] == "out"})
    return out


def reverse_circle(c: Cobordism, side: str, i: int) -> Cobordism:
    if side == "in":
        return Cobordism(c.source.reverse(i), c.target, c.components)
    return Cobordism(c.source, c.target.reverse(i), c.components)


# ---------------------------------------------------------------------------
# JSON


def to_json(c: Cobordism) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "source": list(c.source.signs),
        "target": list(c.target.signs),
        "components": [{"genus": k.genus, "inputs": list(k.inputs), "outputs": list(k.outputs),
                        "euler": k.euler} for k in c.components],
        "euler": c.euler,
        "expression": print_cobordism(c) if all(s == 1 for s in c.source.signs + c.target.signs)
        else None,
    }


def from_json(data) -> Cobordism:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise CobordismError("unsupported schema_version %r" % data.get("schema_version"))
    comps = tuple(Component(tuple(sorted(k["inputs"])), tuple(sorted(k["outputs"])), int(k["genus"]))
                  for k in data["components"])
    return Cobordism(ClosedObject(tuple(data["source"])), ClosedObject(tuple(data["target"])), comps)


# ---------------------------------------------------------------------------
# d = 0: oriented points and intervals


@dataclass(frozen=True)
class OneCobordism:
    """
    Oriented 1-manifolds between signed point sets: intervals pairing
    endpoints ("in", i) / ("out", j), plus a count of closed circles.
    """

    source: ClosedObject
    target: ClosedObject
    arcs: frozenset
    circles: int = 0

    def __post_init__(self):
        ends = sorted(e for a in self.arcs for e in a)
        want = sorted([("in", i) for i in range(len(self.source))]
                      + [("out", j) for j in range(len(self.target))])
        if ends != want:
            raise CobordismError("arcs must pair up all endpoints")
        for a in self.arcs:
            (s1, i1), (s2, i2) = sorted(a)
            x = (self.source if s1 == "in" else self.target).signs[i1]
            y = (self.source if s2 == "in" else self.target).signs[i2]
            through = s1 != s2
            if (through and x != y) or (not through and x == y):
                raise OrientationError("arc %s joins incompatible orientations" % (sorted(a),))


def one_identity(obj: ClosedObject) -> OneCobordism:
    return OneCobordism(ClosedObject(obj.signs, 0), ClosedObject(obj.signs, 0),
                        frozenset(frozenset({("in", i), ("out", i)}) for i in range(len(obj))))


def one_compose(c1: OneCobordism, c2: OneCobordism) -> OneCobordism:
    if c1.target != c2.source:
        raise ArityError("cannot compose 1-cobordisms: middle objects differ")
    # vertices: ("a", end) for c1 endpoints, ("b", end) for c2 endpoints
    partner = {}
    for tag, c in (("a", c1), ("b", c2)):
        for arc in c.arcs:
            e1, e2 = tuple(arc)
            partner[(tag, e1)] = (tag, e2)
            partner[(tag, e2)] = (tag, e1)

    def glue(v):
        tag, (side, i) = v
        if tag == "a" and side == "out":
            return ("b", ("in", i))
        if tag == "b" and side == "in":
            return ("a", ("out", i))
        return None

    def outer(v):
        return glue(v) is None

    seen = set()
    arcs = []
    for v in sorted(partner):
        if v in seen or not outer(v):
            continue
        cur = v
        seen.add(cur)
        while True:
            nxt = partner[cur]
            seen.add(nxt)
            if outer(nxt):
                arcs.append(frozenset({v[1], nxt[1]}))
                break
            cur = glue(nxt)
            seen.add(cur)
    loops = 0
    for v in sorted(partner):
        if v in seen:
            continue
        loops += 1
        cur = v
        while cur not in seen:
            seen.add(cur)
            nxt = partner[cur]
            seen.add(nxt)
            cur = glue(nxt)
    return OneCobordism(c1.source, c2.target, frozenset(arcs), c1.circles + c2.circles + loops)


def one_evaluation(sign: int = 1) -> OneCobordism:
    """The arc closing a point and its dual: (+, -) -> empty."""
    obj = ClosedObject((sign, -sign), 0)
    return OneCobordism(obj, ClosedObject((), 0), frozenset({frozenset({("in", 0), ("in", 1)})}))


def one_coevaluation(sign: int = 1) -> OneCobordism:
    obj = ClosedObject((sign, -sign), 0)
    return OneCobordism(ClosedObject((), 0), obj, frozenset({frozenset({("out", 0), ("out", 1)})}))
