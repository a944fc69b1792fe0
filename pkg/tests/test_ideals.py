from fractions import Fraction

import pytest
from hypothesis import given, settings

from resolvesing.ideals import (
    BudgetExceeded,
    Ideal,
    contains,
    derivative_ideal,
    dim_ideal,
    eliminate,
    groebner,
    in_radical,
    intersect,
    is_empty,
    is_unit_ideal,
    jacobian_smooth,
    max_order_on_variety,
    normal_form,
    order_along,
    s_polynomial,
    saturate,
)
from resolvesing.polyring import INF, Poly, order_at_point, parse_poly
from fixtures import UNIT_IDEAL_CASES
from strategies import nonzero_polys, points

V = ("x", "y")
W = ("x", "y", "z")


def P(s, vars=V):
    return parse_poly(s, vars)


def _s_pairs_reduce(G):
    B = G.basis
    for i in range(len(B)):
        for j in range(i + 1, len(B)):
            if not normal_form(s_polynomial(B[i], B[j], G.order), G).is_zero():
                return False
    return True


@settings(max_examples=30)
@given(nonzero_polys(max_deg=3, max_terms=3), nonzero_polys(max_deg=3, max_terms=3))
def test_groebner_basis_properties(f, g):
    for order in ("grevlex", "lex"):
        G = groebner([f, g], order=order)
        assert _s_pairs_reduce(G)
        assert contains(G, f) and contains(G, g)
        for b in G.basis:
            assert contains([f, g], b)


def test_groebner_known_basis():
    G = groebner([P("x^2 - y"), P("x*y - 1")], order="lex")
    assert _s_pairs_reduce(G)
    assert contains(G, P("y^3 - 1"))


@pytest.mark.parametrize("vars,gens,expected", UNIT_IDEAL_CASES)
def test_unit_ideal_fixture(vars, gens, expected):
    vs = tuple(vars.split(","))
    assert is_unit_ideal([parse_poly(g, vs) for g in gens]) is expected


def test_is_empty_with_opens():
    assert is_empty([P("x*y - 1")], [P("x")]) is False
    assert is_empty([P("x*y")], [P("x"), P("y")]) is True
    assert is_empty([P("x^2 + 1")]) is False


def test_saturation_and_intersection():
    sat = saturate([P("x*y"), P("x^2")], P("x"))
    assert is_unit_ideal(sat)
    K = intersect([P("x")], [P("y")])
    assert contains(K, P("x*y")) and not contains(K, P("x"))


def test_elimination():
    E = eliminate([P("x - y^2", W), P("z - y^3", W)], ["y"])
    assert contains(E, parse_poly("x^3 - z^2", ("x", "z")))
    assert not contains(E, parse_poly("x", ("x", "z")))


def test_radical_membership():
    assert in_radical([P("x^2")], P("x"))
    assert not in_radical([P("x^2")], P("y"))


def test_dimension_and_smoothness():
    assert dim_ideal([P("x", W), P("y", W)]) == 1
    assert dim_ideal([P("x^2 - y^2*z", W)]) == 2
    assert jacobian_smooth([P("y^2 - x")], 1)
    assert not jacobian_smooth([P("y^2 - x^3")], 1)
    assert jacobian_smooth([P("y^2 - x^3")], 1, opens=[P("x")])


@settings(max_examples=40)
@given(nonzero_polys(max_deg=4, max_terms=4), points(2, -2, 2))
def test_derivative_ideal_criterion(g, a):
    o = order_at_point(g, a)
    for s in range(1, 5):
        vanish = all(d.evaluate(a) == 0 for d in derivative_ideal(g, s).nonzero())
        assert vanish == (o >= s)


def test_max_order_on_variety():
    assert max_order_on_variety(P("y^2 - x^3")) == 2
    assert max_order_on_variety(P("x*y*(x - y)")) == 3
    assert max_order_on_variety(P("y^2 - x^3"), opens=[P("x")]) == 1
    assert max_order_on_variety(P("y - x^2")) == 1


def test_order_along_submanifold():
    N = [P("y")]
    assert order_along(P("y^2 - x^3"), N, (0, 0)) == 3
    assert order_along(P("y"), N, (0, 0)) is INF


def test_budget_is_enforced():
    gens = [P("x^5 - y^3 + x*y", V), P("y^5 - x^2 + 3*x*y^2", V), P("x^4*y - y^4 + 2", V)]
    with pytest.raises(BudgetExceeded):
        groebner(gens, budget=1)
