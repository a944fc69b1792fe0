import pytest

from resolvesing.geometry import ResolutionTree, snc_check
from resolvesing.polyring import parse_poly
from resolvesing.resolver import (
    ResolverConfig,
    chart_history,
    resolve_hypersurface,
    resolve_ideal_to_nc,
    verify_tree,
)
from resolvesing.words import e_bounds_check

V = ("x", "y")


def run(src, vars=V, **kw):
    return resolve_hypersurface(parse_poly(src, vars), config=ResolverConfig(**kw))


def test_cusp_three_blowups():
    tree, cert = run("y^2 - x^3")
    assert cert.ok and tree.status == "resolved"
    assert tree.blowup_count() == 3
    assert str(tree.years[0].word) == "(2,0; 3/2,0; inf)"
    assert [str(c.ideal[0]) for c in tree.years[0].centers] == ["x"] or tree.years[0].centers[0].q == 2


def test_tacnode_monomial_year():
    tree, cert = run("y^2 - x^4")
    assert cert.ok
    w = tree.years[1].word
    assert str(w) == "(2,0; 0)" and w.terminal == 0
    assert w.J == ("E1",) or list(w.J) == ["E1"]


@pytest.mark.parametrize("src,blowups", [("x*y", 2), ("y^2 - x^5", None), ("y - x^2", 0)])
def test_small_corpus(src, blowups):
    tree, cert = run(src)
    assert cert.ok, cert.failures
    if blowups is not None:
        assert tree.blowup_count() == blowups
    for y in tree.years:
        assert e_bounds_check(y.word)


def test_words_strictly_decrease():
    tree, cert = run("y^2 - x^5")
    assert cert.decreasing
    assert cert.semicontinuity["samples"] > 0 and not cert.semicontinuity["violations"]


def test_leaves_are_normal_crossings():
    tree, _ = run("y^2 - x^3")
    for cid in tree.leaves:
        assert snc_check(tree.transforms[cid], tree.charts[cid])


def test_chart_history_lengths():
    tree, _ = run("y^2 - x^3")
    for cid, ch in tree.charts.items():
        assert len(chart_history(tree, cid)) == ch.year


def test_json_roundtrip_verifies():
    tree, cert = run("y^2 - x^4")
    back = ResolutionTree.from_json(tree.to_json())
    assert back.dumps() == tree.dumps()
    assert verify_tree(back).ok


def test_determinism():
    a, ca = run("y^2 - x^3")
    b, cb = run("y^2 - x^3")
    assert a.dumps() == b.dumps() and ca.to_json() == cb.to_json()


def test_budget():
    tree, cert = run("y^2 - x^5", max_years=1)
    assert tree.status == "budget_exceeded" and not cert.ok


def test_bad_input():
    with pytest.raises(ValueError):
        resolve_hypersurface(parse_poly("3", V))
    with pytest.raises(ValueError):
        resolve_hypersurface(parse_poly("y^2 - x^3", V), k=1, l=0)
    with pytest.raises(ValueError):
        ResolverConfig(max_years=0)


def test_ideal_mode():
    I = [parse_poly(s, V) for s in ("x^2", "x*y")]
    tree, cert = resolve_ideal_to_nc(I)
    assert cert.ok and cert.transform_identity
    assert tree.blowup_count() == 2
    tree, cert = resolve_ideal_to_nc([parse_poly("x", V), parse_poly("y", V)])
    assert cert.ok and tree.blowup_count() == 1
    with pytest.raises(ValueError):
        resolve_ideal_to_nc([parse_poly("x", V), parse_poly("x - 1", V)])
