import pytest
import sympy as sp
from hypothesis import given

from musym.expr import normalize
from musym.jet import (InconsistentSystem, JetSpace, MultiIndex, OrientationError, PDESystem, multiindices,
                       order_of, total_derivative, total_derivative_multi)

from conftest import problem
from strategies import exprs

EULER_SPACE = JetSpace(("x", "t"), ("u",), order=3)
EULER = PDESystem.build(EULER_SPACE, [("u_t + u*u_x", "u_t")])
P = EULER_SPACE.parse
x, t = EULER_SPACE.base


def test_multiindex():
    J = MultiIndex((2, 1))
    assert J.order == 3
    assert J + MultiIndex.unit(2, 0) == (3, 1)
    assert len(list(multiindices(2, 2))) == 6


def test_total_derivative():
    assert total_derivative(P("u"), 0, EULER_SPACE) == P("u_x")
    assert normalize(total_derivative(P("u*u_x"), 0, EULER_SPACE) - P("u_x^2 + u*u_xx")) == 0
    space = JetSpace(("x", "y", "t"), ("u",))
    assert total_derivative(space.parse("arctan(y/x)"), 2, space) == 0


def test_total_derivative_multi():
    assert total_derivative_multi(P("u"), (2, 0), EULER_SPACE) == P("u_xx")


def test_order_of():
    assert order_of(P("u_xxt + u"), EULER_SPACE) == 3


def test_restrict_examples():
    assert EULER.restrict(P("u_t + u*u_x")) == 0
    assert EULER.restrict(P("x^2 + u_x")) == P("x^2 + u_x")
    assert normalize(EULER.restrict(P("u_tt")) - P("2*u*u_x^2 + u^2*u_xx")) == 0


def test_differential_consequence():
    lead, rule = EULER.differential_consequence(0, (1, 0))
    assert lead == P("u_xt")
    assert normalize(rule - P("-u_x^2 - u*u_xx")) == 0


def test_orientation_errors():
    with pytest.raises(OrientationError):
        PDESystem.build(EULER_SPACE, [("u_t + u*u_x", "u_xx")])
    with pytest.raises(OrientationError):
        PDESystem.build(EULER_SPACE, [("u_t^2 + u", "u_t")])


def test_extend_detects_inconsistency_free_relation():
    with pytest.raises((InconsistentSystem, OrientationError)):
        EULER.extend(P("u_t + u*u_x + 1"), P("u_t"))


@given(exprs(EULER_SPACE, max_order=2))
def test_restrict_idempotent(e):
    r = EULER.restrict(e)
    assert EULER.restrict(r) == r


@given(exprs(EULER_SPACE, max_order=1, depth=2))
def test_restrict_commutes_with_total_derivative(e):
    for i in range(2):
        lhs = EULER.restrict(total_derivative(EULER.restrict(e), i, EULER_SPACE))
        rhs = EULER.restrict(total_derivative(e, i, EULER_SPACE))
        assert normalize(lhs - rhs) == 0


@given(exprs(EULER_SPACE, max_order=2, depth=2), exprs(EULER_SPACE, max_order=2, depth=2))
def test_restrict_is_ring_morphism(a, b):
    assert normalize(EULER.restrict(a * b) - EULER.restrict(a) * EULER.restrict(b)) == 0


def test_system_orientation_of_fixture():
    pb = problem("ex06_system")
    leads = [str(eq.lead) for eq in pb.system.equations]
    assert leads == ["v_x", "u_x"]
    assert not any(pb.system.is_constrained(s) for s in (P("u"), sp.Symbol("x")))
