"""Seeded property suites (50 cases each).

Plain functions wrapped by hypothesis; test_acceptance.py runs each one as a
separate test and reports them together.
"""
import functools

import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from musym.expr import ZeroVerdict, is_zero, normalize
from musym.jet import total_derivative
from musym.muform import GLOBAL, HorizontalForm, check_compatibility, darboux_derivative, gauge_act
from musym.oracle import numeric_zero_check
from musym.symcheck import build_conditional_system, check_mu_symmetry, check_standard_symmetry
from musym.vfield import (apply, characteristic, prolong_mu, prolong_standard, recursion_residual)

from conftest import problem
from strategies import (SPACE, SPACE2, evolutionary_fields, exprs, point_fields, polys, scalar_gammas,
                        unipotent_gammas, x, y)

u = SPACE.jet(0)


def _same_table(A, B):
    return all(normalize(A.table[k] - B.table[k]) == 0 for k in A.table)


@given(exprs(SPACE, max_order=3), st.sampled_from([(0, 1), (1, 0), (0, 0)]))
def commutation(e, ij):
    i, j = ij
    lhs = total_derivative(total_derivative(e, i, SPACE), j, SPACE)
    rhs = total_derivative(total_derivative(e, j, SPACE), i, SPACE)
    assert normalize(lhs - rhs) == 0


@given(point_fields(SPACE))
def mu_zero_degeneration(X):
    zero = HorizontalForm.zero(2, 1)
    assert _same_table(prolong_mu(X, zero, SPACE, 2), prolong_standard(X, SPACE, 2))


# mu must be compatible: otherwise mixed coefficients depend on the order in
# which the recursion visits the indices.
@given(point_fields(SPACE, 2), scalar_gammas((x, y, u), 1))
def recursion_residuals_vanish(X, gamma):
    mu = darboux_derivative(gamma, SPACE)
    residuals = recursion_residual(X, mu, SPACE, 2)
    assert all(normalize(r) == 0 for r in residuals.values())


@given(st.one_of(st.tuples(st.just(SPACE), scalar_gammas((x, y, u))),
                 st.tuples(st.just(SPACE2), unipotent_gammas())).flatmap(
    lambda t: st.tuples(st.just(t[0]), st.just(t[1]), evolutionary_fields(t[0]))))
def gauge_round_trip(case):
    space, gamma, X = case
    mu = darboux_derivative(gamma, space)
    lhs = gauge_act(gamma, prolong_mu(X, mu, space, 2))
    Xt = gauge_act(gamma, characteristic(X, space))
    rhs = prolong_standard(type(X).evolutionary(Xt.q, space.p), space, 2)
    assert _same_table(lhs, rhs)


@given(st.one_of(st.tuples(st.just(SPACE), scalar_gammas((x, y, u))),
                 st.tuples(st.just(SPACE2), unipotent_gammas((x, y, SPACE2.jet(0))))))
def darboux_is_compatible(case):
    space, gamma = case
    assert check_compatibility(darboux_derivative(gamma, space), space).status == GLOBAL


@given(unipotent_gammas(), unipotent_gammas(), evolutionary_fields(SPACE2))
def gauge_group_law(g1, g2, X):
    Y = prolong_standard(X, SPACE2, 1)
    composed = gauge_act(g1, gauge_act(g2, Y))
    assert _same_table(composed, gauge_act(g1 @ g2, Y))
    assert _same_table(gauge_act(g1.inv(), gauge_act(g1, Y)), Y)


# Agreement of mu- and standard verdicts on augmented systems: q = 1 corpus fields with a
# random compatible mu (Darboux derivative of a random scalar gauge).
_AUGMENTABLE = [("ex01_scaling", 0), ("ex04_kdv", 0), ("ex08_euler", 0), ("ex09_cdis", 0), ("ex09_cdis", 1)]


@functools.lru_cache(maxsize=None)
def _augmented(name, k):
    pb = problem(name)
    X = pb.fields[k].field
    return pb, X, build_conditional_system(X, pb.system)


@given(st.sampled_from(_AUGMENTABLE), polys(max_degree=1))
def augmented_agreement(case, p):
    pb, X, aug = _augmented(*case)
    space = aug.space
    t1, t2 = space.base
    mu = HorizontalForm.scalar([sp.diff(p.subs({x: t1, y: t2}), v) for v in (t1, t2)])
    n = max(aug.order, 1)
    Y, W = prolong_mu(X, mu, space, n), prolong_standard(X, space, n)
    for d in aug.expressions:
        assert aug.restrict(apply(Y, d) - apply(W, d)) == 0
    mv = check_mu_symmetry(X, mu, aug, trials=5)
    sv = check_standard_symmetry(X, aug, trials=5)
    assert mv.outcome == sv.outcome


@functools.lru_cache(maxsize=None)
def corpus_identities():
    """(expression, space, constraints) triples that are ProvedZero in the corpus."""
    from musym.muform import compatibility_residual
    from musym.symcheck import _jet_lift

    out = []
    for name in ("ex08_euler", "ex09_cdis", "ex10_burgers"):
        pb = problem(name)
        for e in compatibility_residual(pb.mu, 0, 1, pb.space):
            if e != 0:
                out.append((e, pb.space, pb.system))
        for f in pb.fields:
            Y = prolong_mu(f.field, pb.mu, pb.space, max(pb.system.order, 1))
            for d in pb.system.expressions:
                out.append((apply(Y, d), pb.space, pb.system))
    for name in ("ex01_scaling", "ex02_rotation", "ex03_complex_scaling", "ex06_system"):
        pb = problem(name)
        for f in pb.fields:
            Y = prolong_mu(f.field, pb.mu, pb.space, 2)
            for z in pb.data["invariants"]:
                zeta = pb.expr(z)
                raw = sum((Y.table[pb.space.decode(s)] * sp.diff(zeta, s)
                           for s in pb.space.jet_symbols(zeta)), sp.S.Zero)
                raw += sum((xi * sp.diff(zeta, b) for xi, b in zip(f.field.xi, pb.space.base)), sp.S.Zero)
                out.append((raw, pb.space, None))
    for name in ("ex04_kdv", "ex05_boussinesq", "ex06_system"):
        pb = problem(name)
        for sol in pb.data["solutions"]:
            parsed = {k: pb.expr(v) for k, v in sol.items()}
            for d in pb.system.expressions:
                lift = _jet_lift(parsed, pb.space, pb.space.jet_symbols(d))
                out.append((d.xreplace(lift), pb.space, None))
    proved = []
    for e, space, cons in out:
        if cons is not None:
            if cons.restrict(e) == 0:
                proved.append((e, space, cons))
        elif is_zero(e, space, trials=1).status == ZeroVerdict.PROVED:
            proved.append((e, space, cons))
    return tuple(proved)


@given(st.data())
def oracle_agreement(data):
    ids = corpus_identities()
    e, space, cons = data.draw(st.sampled_from(ids))
    seed = data.draw(st.integers(0, 10 ** 6))
    v = numeric_zero_check(e, space, trials=3, seed=seed, constraints=cons)
    assert v.status == ZeroVerdict.NUMERIC


SUITES = {
    "a": ("D_i D_j commutation", commutation),
    "b": ("mu = 0 degeneration", mu_zero_degeneration),
    "c": ("recursion residuals vanish", recursion_residuals_vanish),
    "d": ("gauge round trip", gauge_round_trip),
    "e": ("Darboux derivative is compatible", darboux_is_compatible),
    "f": ("gauge group law and inverse", gauge_group_law),
    "g": ("mu/standard agreement on augmented systems", augmented_agreement),
    "h": ("numeric oracle agrees with proofs", oracle_agreement),
}
