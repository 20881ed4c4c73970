"""Sample points on representation varieties shared by several test modules."""

import random

from shiftcartan import charstack as cs
from shiftcartan import cobcat as cb
from shiftcartan.liecore import MatrixGroup


def component(text):
    return cs.Presentation.of(cb.to_cospan(cb.parse(text)).components[0])


def irreducible_genus_two(group, seed):
    """Random a1, b1, a2 in the finite group, then the first b2 closing the
    relator with H^0 = 0."""
    rng = random.Random(seed)
    pres = cs.Presentation.closed_surface(2)
    m = group.mul
    comm = lambda x, y: m(m(m(x, y), group.inv[x]), group.inv[y])
    while True:
        a1, b1, a2 = (rng.randrange(group.order) for _ in range(3))
        target = group.inv[comm(a1, b1)]
        for b2 in range(group.order):
            if comm(a2, b2) != target:
                continue
            rep = cs.rep_from_indices(pres, group, (a1, b1, a2, b2))
            if cs.tangent_complex(rep).homology()[0] == 0:
                return rep


def rational_point(text, seed, G=None):
    """Random rational images for a surface with boundary (free group)."""
    G = G or MatrixGroup("sl", 2)
    pres = component(text)
    rng = random.Random(seed)
    return cs.RepPoint(pres, G, {g: G._sample(rng, None) for g in pres.generators})
