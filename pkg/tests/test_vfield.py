import pytest
import sympy as sp
from hypothesis import given, settings

from musym.expr import normalize
from musym.jet import JetSpace, MultiIndex, multiindices, total_derivative
from musym.muform import GaugeMap, HorizontalForm, darboux_derivative, gauge_act
from musym.vfield import (VectorField, apply, characteristic, evolutionary, nabla, prolong_mu,
                          prolong_standard, recursion_residual)

from conftest import problem
from strategies import SPACE, point_fields

P = SPACE.parse
lam = sp.Symbol("lambda")


def test_characteristic():
    pb = problem("ex06_system")
    Q = characteristic(pb.fields[0].field, pb.space)
    x = pb.space.base[0]
    assert Q.q == (-x * pb.expr("u_x"), -x * pb.expr("v_x"))
    assert characteristic(VectorField.evolutionary([P("u^2")], 2), SPACE).q == (P("u^2"),)
    cdis = problem("ex09_cdis")
    assert characteristic(cdis.fields[0].field, cdis.space).is_trivial


def test_prolong_standard_of_vertical_translation():
    Y = prolong_standard(VectorField((0, 0), (1,)), SPACE, 3)
    assert all(Y.coefficient(0, J) == 0 for J in multiindices(2, 3) if J.order)


def test_prolong_evolutionary_identity():
    Y = prolong_standard(VectorField.evolutionary([P("u")], 2), SPACE, 2)
    for J in multiindices(2, 2):
        assert Y.coefficient(0, J) == SPACE.jet(0, J)


def test_mu_prolongation_single_step():
    mu = HorizontalForm.scalar([lam, 0])
    Y = prolong_mu(VectorField.evolutionary([P("u")], 2), mu, SPACE, 1)
    assert normalize(Y.coefficient(0, (1, 0)) - (P("u_x") + lam * P("u"))) == 0


def test_nabla():
    mu = HorizontalForm.scalar([lam, 0])
    assert normalize(nabla([P("u")], 0, mu, SPACE)[0] - P("u_x") - lam * P("u")) == 0


def test_rotation_mu_prolongation_annihilates_invariants():
    pb = problem("ex02_rotation")
    Y = prolong_mu(pb.fields[0].field, pb.mu, pb.space, 2)
    for z in pb.data["invariants"][:2]:
        assert apply(Y, pb.expr(z)) == 0
    W = prolong_standard(pb.fields[0].field, pb.space, 2)
    assert apply(W, pb.expr("x^2 + y^2")) == 0


def test_apply_constant_is_zero():
    W = prolong_standard(VectorField((P("x"), 0), (P("u"),)), SPACE, 1)
    assert apply(W, sp.Integer(7)) == 0


def test_apply_extends_order():
    W = prolong_standard(VectorField((0, 0), (P("x*u"),)), SPACE, 1)
    assert normalize(apply(W, P("u_xx")) - P("x*u_xx + 2*u_x")) == 0


def test_gauge_round_trip_scaling():
    pb = problem("ex01_scaling")
    X = pb.fields[0].field
    Q = characteristic(X, pb.space)
    lhs = gauge_act(pb.gamma, prolong_mu(VectorField.evolutionary(Q.q, 2), pb.mu, pb.space, 2))
    rhs = prolong_standard(VectorField.evolutionary(gauge_act(pb.gamma, Q).q, 2), pb.space, 2)
    assert all(normalize(lhs.table[k] - rhs.table[k]) == 0 for k in lhs.table)


def test_recursion_residual_on_scaling_data():
    pb = problem("ex01_scaling")
    assert all(v == 0 for v in recursion_residual(pb.fields[0].field, pb.mu, pb.space, 2).values())
    zero = HorizontalForm.zero(2, 1)
    assert all(v == 0 for v in recursion_residual(pb.fields[0].field, zero, pb.space, 2).values())


# mu compatible only on S: the residuals vanish after restriction
@pytest.mark.parametrize("name", ["ex02_rotation", "ex06_system", "ex08_euler", "ex10_burgers"])
def test_recursion_residual_on_corpus(name):
    pb = problem(name)
    res = recursion_residual(pb.fields[0].field, pb.mu, pb.space, 2)
    assert all(pb.system.restrict(v) == 0 for v in res.values())


def test_evolutionary_consistency():
    g = sp.exp(P("x*y + u"))
    mu = darboux_derivative(GaugeMap.scalar(g), SPACE)
    Qv = P("u_x*y + u")
    Y = prolong_mu(VectorField.evolutionary([Qv], 2), mu, SPACE, 2)
    lam_x, lam_y = (m[0, 0] for m in mu.matrices)
    step = lambda e, i, l: normalize(total_derivative(e, i, SPACE) + l * e)
    assert normalize(Y.coefficient(0, (1, 1)) - step(step(Qv, 0, lam_x), 1, lam_y)) == 0


@settings(max_examples=15)
@given(point_fields(SPACE), point_fields(SPACE))
def test_prolongation_is_linear(X1, X2):
    mu = HorizontalForm.scalar([lam, P("y")])
    comb = VectorField(tuple(2 * a + 3 * b for a, b in zip(X1.xi, X2.xi)),
                       tuple(2 * a + 3 * b for a, b in zip(X1.phi, X2.phi)))
    Y1, Y2, Y = (prolong_mu(F, mu, SPACE, 1) for F in (X1, X2, comb))
    assert all(normalize(Y.table[k] - 2 * Y1.table[k] - 3 * Y2.table[k]) == 0 for k in Y.table)


def test_evolutionary_representative():
    X = VectorField((P("x"), 0), (P("u"),))
    E = evolutionary(X, SPACE)
    assert E.is_evolutionary and E.phi == (P("u - x*u_x"),)
    assert MultiIndex((0, 0)).order == 0
