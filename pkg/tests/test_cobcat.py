import json
import random

import pytest
from hypothesis import given, strategies as st

from shiftcartan import cobcat as cb


@st.composite
def cobordisms(draw, n_in=None, n_out=None):
    if n_in is None:
        n_in = draw(st.integers(0, 3))
    if n_out is None:
        n_out = draw(st.integers(0, 3))
    labels_in = [draw(st.integers(0, 3)) for _ in range(n_in)]
    labels_out = [draw(st.integers(0, 3)) for _ in range(n_out)]
    used = sorted(set(labels_in + labels_out))
    comps = []
    for lab in used:
        ins = tuple(i for i, l in enumerate(labels_in) if l == lab)
        outs = tuple(j for j, l in enumerate(labels_out) if l == lab)
        comps.append(cb.Component(ins, outs, draw(st.integers(0, 2))))
    for _ in range(draw(st.integers(0, 1))):
        comps.append(cb.Component((), (), draw(st.integers(0, 2))))
    return cb.Cobordism(cb.ClosedObject.circles(n_in), cb.ClosedObject.circles(n_out), tuple(comps))


@st.composite
def chains(draw, length):
    sizes = [draw(st.integers(0, 3)) for _ in range(length + 1)]
    return [draw(cobordisms(sizes[k], sizes[k + 1])) for k in range(length)]


@given(chains(3))
def test_composition_is_associative(cs):
    a, b, c = cs
    assert cb.compose(cb.compose(a, b), c) == cb.compose(a, cb.compose(b, c))


@given(cobordisms())
def test_identities(c):
    n, m = c.arity
    assert cb.compose(cb.identity(n), c) == c
    assert cb.compose(c, cb.identity(m)) == c
    assert cb.tensor(cb.EMPTY, c) == c == cb.tensor(c, cb.EMPTY)


@given(chains(2), chains(2))
def test_interchange_law(left, right):
    (a1, b1), (a2, b2) = left, right
    lhs = cb.compose(cb.tensor(a1, a2), cb.tensor(b1, b2))
    rhs = cb.tensor(cb.compose(a1, b1), cb.compose(a2, b2))
    assert lhs == rhs


@given(chains(2))
def test_euler_characteristic_is_additive(cs):
    a, b = cs
    assert cb.compose(a, b).euler == a.euler + b.euler


@given(cobordisms(), cobordisms())
def test_tensor_is_associative_and_adds_euler(a, b):
    assert cb.tensor(a, b).euler == a.euler + b.euler
    assert cb.tensor(cb.tensor(a, b), a) == cb.tensor(a, cb.tensor(b, a))


@pytest.mark.parametrize("text, genus, arity, euler", [
    ("pants ; copants", 1, (1, 1), -2),
    ("cup ; pants ; copants ; cap", 1, (0, 0), 0),
    ("cup ; cap", 0, (0, 0), 2),
    ("pants ; (cap | cyl)", 0, (1, 1), 0),
    ("genus(2; 0, 0)", 2, (0, 0), -2),
    ("copants ; pants", 0, (2, 2), -2),
])
def test_known_composites(text, genus, arity, euler):
    c = cb.parse(text)
    assert c.arity == arity and c.euler == euler
    assert len(c.components) == 1 and c.components[0].genus == genus


def test_pants_cap_is_a_cylinder():
    assert cb.parse("pants ; (cap | cyl)") == cb.parse("cyl")


def test_trace_of_a_cylinder_pair():
    c = cb.trace(cb.parse("copants ; pants"), 0, 1)
    assert c.arity == (2, 0) and c.components[0].genus == 1


def test_parser_round_trip_on_random_expressions():
    rng = random.Random(7)
    for _ in range(100):
        text = cb.random_expression(rng, depth=4)
        c = cb.parse(text)
        again = cb.parse(cb.print_cobordism(c))
        assert again == c, text


def test_permutations_round_trip():
    c = cb.parse("perm(1, 0) ; copants")
    assert c == cb.parse("copants")
    c = cb.parse("(cyl | pants) ; perm(1, 0, 2)")
    assert cb.parse(str(c)) == c


@pytest.mark.parametrize("text, pos", [
    ("cyl ; pants ;", 13),
    ("pants ; cyl", 6),
    ("cyl | | cap", 6),
    ("genus(1, 1)", 7),
    ("donut", 0),
    ("(cyl", 4),
    ("cyl )", 4),
    ("perm(0, 0)", 0),
])
def test_parse_errors_carry_positions(text, pos):
    with pytest.raises(cb.ParseError) as info:
        cb.parse(text)
    assert info.value.pos == pos


def test_arity_error_from_compose():
    with pytest.raises(cb.ArityError):
        cb.compose(cb.parse("cyl"), cb.parse("copants"))


def test_presentations_satisfy_the_boundary_relation():
    for text in ["cyl", "pants", "copants", "cap", "genus(2; 1, 2)", "genus(1; 0, 1)", "genus(3; 0, 0)"]:
        pres = cb.to_cospan(cb.parse(text))
        for comp in pres.components:
            if comp.circles:
                assert comp.check()
                assert len(comp.generators) == 2 * comp.genus + len(comp.circles) - 1


def test_presentation_order_is_outputs_then_inputs():
    comp = cb.to_cospan(cb.parse("genus(1; 2, 1)")).components[0]
    assert comp.circles == (("out", 0), ("in", 0), ("in", 1))
    assert comp.oriented_words[1] == cb.word_inverse(comp.raw_words[1])


def test_closed_presentation_has_the_commutator_relator():
    comp = cb.to_cospan(cb.parse("genus(2; 0, 0)")).components[0]
    assert cb.word_text(comp.relators[0]) == "a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1"


def test_json_round_trip():
    for text in ["pants ; copants", "cap | cup", "genus(1; 2, 1) ; pants"]:
        c = cb.parse(text)
        data = json.dumps(cb.to_json(c), sort_keys=True)
        assert cb.from_json(data) == c
    with pytest.raises(cb.CobordismError):
        cb.from_json({"schema_version": 99})


def test_orientation_bookkeeping():
    c = cb.parse("cyl")
    assert cb.compose_orientation(c, c) == {("in", 0): -1, ("out", 0): 1}
    flipped = cb.reverse_circle(c, "in", 0)
    with pytest.raises(cb.OrientationError):
        cb.compose_orientation(c, flipped)
    with pytest.raises(cb.CobordismError):
        cb.print_cobordism(flipped)


def test_intervals_and_zigzag():
    plus = cb.ClosedObject((1,), 0)
    coev = cb.one_coevaluation(1)
    ev = cb.one_evaluation(1)
    ident = cb.one_identity(plus)
    # (id | coev) ; (ev | id) collapses to the identity arc
    left = cb.OneCobordism(plus, cb.ClosedObject((1, 1, -1), 0),
                           frozenset({frozenset({("in", 0), ("out", 0)}),
                                      frozenset({("out", 1), ("out", 2)})}))
    right = cb.OneCobordism(cb.ClosedObject((1, 1, -1), 0), plus,
                            frozenset({frozenset({("in", 0), ("in", 2)}),
                                       frozenset({("in", 1), ("out", 0)})}))
    assert cb.one_compose(left, right) == ident
    loop = cb.one_compose(coev, ev)
    assert loop.circles == 1 and not loop.arcs
    with pytest.raises(cb.OrientationError):
        cb.OneCobordism(plus, cb.ClosedObject((-1,), 0),
                        frozenset({frozenset({("in", 0), ("out", 0)})}))
