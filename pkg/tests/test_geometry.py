from fractions import Fraction

import json

import pytest
from hypothesis import given, settings

from resolvesing.geometry import (
    CenterSpec,
    Chart,
    InadmissibleCenter,
    ResolutionTree,
    StraighteningFailed,
    blow_up_component,
    blowup,
    nc_check,
    pullback,
    snc_check,
    straighten_center,
    strict_transform,
    update_divisors,
    weak_transform_ideal,
)
from resolvesing.ideals import contains, is_empty, saturate
from resolvesing.polyring import Poly, parse_poly
from resolvesing.resolver import resolve_hypersurface
from strategies import nonzero_polys

V = ("x", "y")
W = ("x", "y", "z")


def P(s, vars=V):
    return parse_poly(s, vars)


def test_cusp_point_blowup():
    root = Chart("c0", 0, V)
    c1, c2 = blowup(root, [0, 1], new_divisor="E1")
    f = P("y^2 - x^3")
    assert strict_transform(f, c1, c1.divisor("E1")) == (P("y^2 - x"), 2)
    g, d = strict_transform(f, c2, c2.divisor("E1"))
    assert d == 2 and g == P("1 - x^3*y")


def test_single_coordinate_blowup_is_identity():
    root = Chart("c0", 0, V)
    (c,) = blowup(root, [0], new_divisor="E1")
    assert pullback(P("x^2 + y"), c) == P("x^2 + y")
    assert c.divisor("E1") == P("x")


def test_weak_transform_of_ideal():
    root = Chart("c0", 0, V)
    c1, c2 = blowup(root, [0, 1], new_divisor="E1")
    I, mu = weak_transform_ideal([P("x^2"), P("x*y")], c1, c1.divisor("E1"))
    assert mu == 2 and contains(I, Poly.const(V, 1))
    I, mu = weak_transform_ideal([P("x^2"), P("x*y")], c2, c2.divisor("E1"))
    assert mu == 2 and contains(I, P("x")) and not contains(I, Poly.const(V, 1))


@settings(max_examples=30)
@given(nonzero_polys(max_deg=4, max_terms=4))
def test_total_transform_identity(f):
    root = Chart("c0", 0, V)
    for ch in blowup(root, [0, 1], new_divisor="E1"):
        theta = ch.divisor("E1")
        g, d = strict_transform(f, ch, theta)
        assert pullback(f, ch) == g * theta ** d


def test_prior_divisors_are_pulled_back():
    root = Chart("c0", 0, V, divisors=(("E1", P("x")),))
    c1, c2 = blowup(root, [0, 1], new_divisor="E2")
    # in chart 1 the old divisor x becomes the exceptional one and disappears
    assert c1.divisor_ids() == ["E2"]
    assert c2.divisor("E1") == P("x") and c2.divisor("E2") == P("y")


def test_straighten_polynomial_graph():
    ch = Chart("c0", 0, W)
    st = straighten_center(ch, [P("x - y^2", W), P("z", W)])
    assert st.den is None
    moved = [st.apply(P("x - y^2", W)), st.apply(P("z", W))]
    target = [Poly.var(W, i) for i in st.indices]
    assert all(contains(moved, t) for t in target) and all(contains(target, m) for m in moved)


def test_straighten_with_denominator():
    ch = Chart("c0", 0, W)
    C = [P("x", W), P("y*z - 1", W)]
    st = straighten_center(ch, C)
    assert st.den is not None and is_empty(C + [st.den])
    moved = [st.apply(c) for c in C]
    sat = saturate(moved, st.den)
    assert all(contains(sat, Poly.var(W, i)) for i in st.indices)


def test_straighten_rejects_singular_center():
    ch = Chart("c0", 0, V)
    with pytest.raises(InadmissibleCenter):
        straighten_center(ch, [P("y^2 - x^3")])


def test_straightening_budget():
    ch = Chart("c0", 0, V)
    # a smooth conic is not a graph over either axis even after inverting a unit
    with pytest.raises(StraighteningFailed):
        straighten_center(ch, [P("x^2 + y^2 - 1")], bound=1)


def test_blow_up_curve_center():
    ch = Chart("c0", 0, W)
    spec = CenterSpec("c0", (P("x", W), P("y", W)), straighten_center(ch, [P("x", W), P("y", W)]))
    kids = blow_up_component(ch, spec, 1, "E1")
    f = P("x^2 - y^2*z", W)
    outs = [strict_transform(f, k, k.divisor("E1")) for k in kids]
    assert (P("1 - y^2*z", W), 2) in outs
    assert (P("x^2 - z", W), 2) in outs


def test_update_divisors_checks_smoothness():
    bad = Chart("c", 1, V, divisors=(("E1", P("y^2 - x^3")),))
    with pytest.raises(InadmissibleCenter):
        update_divisors({}, [bad], "E1", 1)
    good = Chart("c", 1, V, divisors=(("E1", P("x")),))
    recs = update_divisors({}, [good], "E1", 1)
    assert recs["E1"].birth == 1 and recs["E1"].equations["c"] == P("x")


def test_nc_and_snc_checks():
    ch = Chart("c0", 0, V, divisors=(("Dx", P("x")), ("Dy", P("y"))))
    assert nc_check(P("x^2*y^3"), ch) == {"Dx": 2, "Dy": 3}
    assert nc_check(P("x^2*y^3*(1 + x)"), ch) is None
    assert nc_check(P("x^2*y^3*(1 + x)"), ch, at=[P("x"), P("y")]) == {"Dx": 2, "Dy": 3}
    tang = Chart("c0", 0, V, divisors=(("Dx", P("x")),))
    assert snc_check([P("y^2 - x")], tang) is False
    assert snc_check([P("y - x")], ch) is False
    assert snc_check([P("y - 1")], ch) is True


def test_tree_round_trip_and_dot():
    tree, cert = resolve_hypersurface(P("y^2 - x^3"))
    text = tree.dumps()
    back = ResolutionTree.from_json(json.loads(text))
    assert back.dumps() == text
    dot = tree.to_dot()
    assert dot.startswith("digraph resolution {") and "E1" in dot


def test_map_point_through_denominator_chart():
    root = Chart("c0", 0, W)
    st = straighten_center(root, [P("x", W), P("y*z - 1", W)])
    kids = blow_up_component(root, CenterSpec("c0", (P("x", W), P("y*z - 1", W)), st), 1, "E1")
    tree = ResolutionTree("hypersurface", W, charts={"c0": root, **{k.id: k for k in kids}})
    f = P("x^2 + y*z + x*z^2 - 1", W)
    pt = (Fraction(1, 2), Fraction(2), Fraction(3))
    for k in kids:
        if any(o.evaluate(pt) == 0 for o in k.opens):
            continue
        img = tree.map_point(k.id, pt)
        d = k.den.evaluate(pt)
        lhs, rhs = pullback(f, k).evaluate(pt), f.evaluate(img)
        # the pullback is f at the image times a power of the unit denominator
        assert any(lhs == rhs * d ** e for e in range(8))
