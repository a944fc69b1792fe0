from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resolvesing.geometry import Chart
from resolvesing.invariant import (
    Bounds,
    MarkedPair,
    NotOnVariety,
    coefficient_pairs,
    companion_subtract,
    divisor_split,
    history_index,
    invariant_at_point,
    max_stratum,
    maximal_contact,
    monomial_divide,
    nu_next,
    scale_pairs,
)
from resolvesing.polyring import INF, Poly, parse_poly
from resolvesing.words import InvariantWord

V = ("x", "y")
W3 = ("x", "y", "z")


def P(s, vars=V):
    return parse_poly(s, vars)


def word_at(src, pt, vars=V, skip=0):
    ch = Chart("c0", 0, vars)
    return str(invariant_at_point([P(src, vars)], ch, (), pt, {}, Bounds(witness_skip=skip)))


@pytest.mark.parametrize("src,pt,expected", [
    ("y^2 - x^3", (0, 0), "(2,0; 3/2,0; inf)"),
    ("y^2 - x^3", (1, 1), "(1,0; inf)"),
    ("y^2 - x^4", (0, 0), "(2,0; 2,0; inf)"),
    ("y^2 - x^5", (0, 0), "(2,0; 5/2,0; inf)"),
    ("x*y", (0, 0), "(2,0; 1,0; inf)"),
    ("x*y", (0, 3), "(1,0; inf)"),
    ("x", (0, 7), "(1,0; inf)"),
    ("(x - 1)^2 - (y + 2)^3", (1, -2), "(2,0; 3/2,0; inf)"),
])
def test_words_at_points(src, pt, expected):
    assert word_at(src, pt) == expected


def test_whitney_umbrella_words():
    assert word_at("x^2 - y^2*z", (0, 0, 0), W3) == "(2,0; 3/2,0; 1,0; inf)"
    assert word_at("x^2 - y^2*z", (0, 0, 5), W3) == "(2,0; 1,0; inf)"


def test_off_variety():
    with pytest.raises(NotOnVariety):
        word_at("y^2 - x^3", (2, 1))


@settings(max_examples=15)
@given(st.integers(-3, 3))
def test_witness_choice_does_not_change_words(t):
    pt = (Fraction(t * t), Fraction(t ** 3))
    assert word_at("y^2 - x^3", pt) == word_at("y^2 - x^3", pt, skip=1)


def test_single_steps():
    pairs = [MarkedPair(P("y^2 - x^3"), Fraction(2))]
    assert nu_next(pairs) == 1
    assert nu_next([MarkedPair(P("-x^3"), Fraction(2))]) == Fraction(3, 2)
    assert nu_next([]) is INF
    assert scale_pairs(pairs, Fraction(3, 2))[0].mu == 3
    with pytest.raises(ValueError):
        scale_pairs(pairs, 0)


def test_maximal_contact_and_coefficients():
    g = P("y^2 - x^3")
    images, N1, c = maximal_contact(g, 2)
    assert c == 1 and N1 == P("2*y")
    (pair,) = coefficient_pairs(g, 2, N1, c)
    assert pair.mu == 2 and pair.h.primitive() == parse_poly("x^3", ("x",)).primitive()


def test_companion_subtraction_tacnode():
    mu, nu, muH = companion_subtract([MarkedPair(P("-x^2"), Fraction(2))], {"E1": P("x")})
    assert (mu, nu, muH) == (1, 0, {"E1": 1})
    # a divisor away from the point does not contribute
    mu, nu, muH = companion_subtract([MarkedPair(P("-x^2"), Fraction(2))], {"E1": P("x - 1")})
    assert nu == 1 and muH == {}


def test_monomial_divide():
    out = monomial_divide([MarkedPair(P("x^2*y"), 2), MarkedPair(P("x^3"), 3)], [P("x")])
    assert [(str(p.h), p.mu) for p in out] == [("y^3", 6), ("1", 6)]
    same = [MarkedPair(P("y"), 1)]
    assert monomial_divide(same, [P("x")]) == same


def test_divisor_split_and_history_index():
    births = {"E1": 1, "E2": 2, "E3": 3}
    assert divisor_split(["E3", "E1", "E2"], births, 2) == (["E1", "E2"], 2, ["E3"])
    with pytest.raises(ValueError):
        divisor_split(["E3"], births, 0, year=2)
    w = InvariantWord.build
    history = [(1, w([1, 1, 2, 0, INF]), ["c1"]), (0, w([2, 0, Fraction(3, 2), 0, INF]), ["c0"])]
    # nu_1 = 1 first reached after year 0
    assert history_index((Fraction(1),), history, lambda C: True) == 1
    assert history_index((Fraction(2),), history, lambda C: True) == 2


def test_max_stratum_umbrella_is_origin():
    ch = Chart("c0", 0, W3)
    rep = max_stratum({"c0": [P("x^2 - y^2*z", W3)]}, {"c0": ch})
    assert str(rep.word) == "(2,0; 3/2,0; 1,0; inf)"
    (K,) = rep.loci["c0"]
    assert sorted(str(p) for p in K) == ["x", "y", "z"]
    assert rep.smooth


def test_max_stratum_node_and_smooth():
    ch = Chart("c0", 0, V)
    rep = max_stratum({"c0": [P("x*y")]}, {"c0": ch})
    assert str(rep.word) == "(2,0; 1,0; inf)"
    rep = max_stratum({"c0": [P("y - x^2")]}, {"c0": ch})
    assert str(rep.word) == "(1,0; inf)"


def test_witness_tangent_to_divisor():
    # x^2 - yz with E1 = V(y): V(x) and V(y + z) are both contact hypersurfaces,
    # only the first is tangent to E1 and it fixes the companion subtraction
    ch = Chart("c", 1, W3, divisors=(("E1", P("y", W3)),))
    hist = [(0, InvariantWord.build([2, 0, Fraction(3, 2), 0, INF]), None)]
    f = [P("x^2 - y*z", W3)]
    words = {str(invariant_at_point(f, ch, hist, (0, 0, 0), {"E1": 1}, Bounds(witness_skip=s)))
             for s in range(3)}
    assert len(words) == 1 and words.pop().startswith("(2,0; 1/2,")
