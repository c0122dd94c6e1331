"""Hypothesis strategies for small jet-space expressions."""
import sympy as sp
from hypothesis import strategies as st

from musym.jet import JetSpace
from musym.muform import GaugeMap
from musym.vfield import VectorField

SPACE = JetSpace(("x", "y"), ("u",), order=5)
SPACE2 = JetSpace(("x", "y"), ("u", "v"), order=4)

x, y = SPACE.base


def _leaves(space, max_order):
    syms = list(space.base)
    for s in space.coordinates(max_order):
        if s not in syms:
            syms.append(s)
    return syms


def exprs(space=SPACE, max_order=2, depth=3, transcendental=True):
    leaf = st.one_of(st.sampled_from(_leaves(space, max_order)),
                     st.integers(-3, 3).filter(bool).map(sp.Integer))
    unary = [lambda e: e ** 2]
    if transcendental:
        unary += [sp.sin, sp.exp]

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda t: t[0] + t[1]),
            st.tuples(children, children).map(lambda t: t[0] * t[1]),
            st.tuples(st.sampled_from(unary), children).map(lambda t: t[0](t[1])),
        )

    return st.recursive(leaf, extend, max_leaves=depth * 2)


def polys(symbols=(x, y), max_degree=2):
    monos = [sp.Integer(1)] + [s ** k for s in symbols for k in range(1, max_degree + 1)]
    monos += [a * b for i, a in enumerate(symbols) for b in symbols[i:]]
    return st.lists(st.tuples(st.integers(-2, 2), st.sampled_from(monos)), min_size=1, max_size=3).map(
        lambda terms: sp.Add(*(c * m for c, m in terms)))


def scalar_gammas(symbols=(x, y), max_degree=2):
    return polys(symbols, max_degree).map(lambda p: GaugeMap.scalar(sp.exp(p)))


def unipotent_gammas(symbols=(x, y)):
    return polys(symbols).map(lambda p: GaugeMap(sp.ImmutableMatrix([[1, p], [0, 1]])))


def evolutionary_fields(space, max_order=1):
    return st.lists(exprs(space, max_order, depth=2, transcendental=False), min_size=space.q,
                    max_size=space.q).map(lambda q: VectorField.evolutionary(q, space.p))


def point_fields(space=SPACE, max_leaves=3):
    base = list(space.base) + [space.jet(a) for a in range(space.q)]
    coef = st.recursive(st.one_of(st.sampled_from(base), st.integers(-2, 2).map(sp.Integer)),
                        lambda c: st.tuples(c, c).map(lambda t: t[0] * t[1] + t[0]), max_leaves=max_leaves)
    return st.tuples(st.lists(coef, min_size=space.p, max_size=space.p),
                     st.lists(coef, min_size=space.q, max_size=space.q)).map(
        lambda t: VectorField(tuple(t[0]), tuple(t[1])))
