"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line. The lines are printed in the pytest
terminal summary (see conftest.py) and when this file runs as a script.
"""
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from resolvesing import ideals, resolver
from resolvesing.ideals import derivative_ideal, groebner, is_unit_ideal, max_order_on_variety, normal_form, s_polynomial
from resolvesing.geometry import Chart
from resolvesing.invariant import Bounds, NotOnVariety, invariant_at_point
from resolvesing.polyring import INF, Poly, order_at_point, parse_poly, product
from resolvesing.resolver import ResolverConfig, chart_history, fiber_samples, resolve_hypersurface, resolve_ideal_to_nc
from resolvesing.words import e_bounds_check, word_compare

try:
    from fixtures import UNIT_IDEAL_CASES
except ImportError:  # run as a script from elsewhere
    sys.path.insert(0, str(Path(__file__).parent))
    from fixtures import UNIT_IDEAL_CASES

ROOT = Path(__file__).resolve().parent.parent
CORPUS = {
    "node": ("x*y", ("x", "y")),
    "cusp": ("y^2 - x^3", ("x", "y")),
    "tacnode": ("y^2 - x^4", ("x", "y")),
    "higher_cusp": ("y^2 - x^5", ("x", "y")),
    "umbrella": ("x^2 - y^2*z", ("x", "y", "z")),
}
RESULTS = {}


def record(n, ok, detail=""):
    RESULTS[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    return ok


def summary_lines():
    return [RESULTS[k] for k in sorted(RESULTS)]


def _spawn_corpus_runs(tmp):
    """Two independent CLI runs of the whole corpus, for the determinism check."""
    procs = []
    for run in ("a", "b"):
        script = "; ".join(
            f"main(['resolve', r'{ROOT / 'problems' / (name + '.json')}', '--out-dir', r'{tmp / run / name}'])"
            for name in CORPUS
        )
        code = f"from resolvesing.cli import main; {script}"
        procs.append(subprocess.Popen([sys.executable, "-c", code], stdout=subprocess.DEVNULL,
                                      stderr=subprocess.PIPE))
    return procs


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    words = []
    bases = []
    orig_iap = resolver.invariant_at_point
    orig_gb = ideals.groebner

    def iap(*a, **kw):
        w = orig_iap(*a, **kw)
        words.append(w)
        return w

    def gb(*a, **kw):
        G = orig_gb(*a, **kw)
        bases.append(G)
        return G

    resolver.invariant_at_point = iap
    ideals.groebner = gb
    runs = {}
    try:
        for name, (src, vars) in CORPUS.items():
            t0 = time.time()
            tree, cert = resolve_hypersurface(parse_poly(src, vars))
            runs[name] = (tree, cert, time.time() - t0)
    finally:
        resolver.invariant_at_point = orig_iap
        ideals.groebner = orig_gb
    # started after the timed runs so they do not compete for the CPU
    tmp = tmp_path_factory.mktemp("determinism")
    procs = _spawn_corpus_runs(tmp)
    for tree, _, _ in runs.values():
        words.extend(y.word for y in tree.years)
    return {"runs": runs, "words": words, "bases": bases, "procs": procs, "tmp": tmp}


def test_criterion_01_cusp(corpus):
    tree, cert, dt = corpus["runs"]["cusp"]
    w0 = str(tree.years[0].word)
    origin = tree.years[0].centers[0].ideal
    ok = (cert.ok and tree.blowup_count() == 3 and w0 == "(2,0; 3/2,0; inf)"
          and sorted(map(str, origin)) == ["x", "y"] and dt < 10)
    record(1, ok, f"blowups={tree.blowup_count()} year0={w0} certificate={cert.ok} time={dt:.1f}s")
    assert ok


def test_criterion_02_umbrella(corpus):
    tree, cert, dt = corpus["runs"]["umbrella"]
    V3 = ("x", "y", "z")
    ch = Chart("c0", 0, V3)
    f = parse_poly("x^2 - y^2*z", V3)
    nu_origin = invariant_at_point([f], ch, a=(0, 0, 0)).nus()[1]
    nu_axis = invariant_at_point([f], ch, a=(0, 0, 1)).nus()[1]
    first = sorted(map(str, tree.years[0].centers[0].ideal))
    ok = (first == ["x", "y", "z"] and nu_origin == Fraction(3, 2) and nu_axis == 1
          and cert.ok and dt < 60)
    record(2, ok, f"first center={first} nu2 origin={nu_origin} axis={nu_axis} "
                  f"years={tree.year} certificate={cert.ok} time={dt:.1f}s")
    assert ok


def test_criterion_03_tacnode(corpus):
    tree, cert, _ = corpus["runs"]["tacnode"]
    w = tree.years[1].word
    ok = (str(w) == "(2,0; 0)" and w.companion == 1 and list(w.J) == ["E1"]
          and tree.blowup_count() >= 2 and cert.ok)
    record(3, ok, f"year1={w} companion={w.companion} J={','.join(w.J)}")
    assert ok


def test_criterion_04_integrality(corpus):
    ws = corpus["words"]
    bad = [str(w) for w in ws if not e_bounds_check(w)]
    record(4, not bad, f"{len(ws)} words checked, {len(bad)} failures")
    assert not bad


def test_criterion_05_semicontinuity(corpus):
    samples = sum(c.semicontinuity["samples"] for _, c, _ in corpus["runs"].values())
    bad = sum(len(c.semicontinuity["violations"]) for _, c, _ in corpus["runs"].values())
    ok = bad == 0 and samples > 0
    record(5, ok, f"{samples} fiber samples, {bad} violations")
    assert ok


def test_criterion_06_transforms(corpus):
    ident = all(c.transform_identity for _, c, _ in corpus["runs"].values())
    V = ("x", "y")
    tree, cert = resolve_ideal_to_nc([parse_poly("x^2", V), parse_poly("x*y", V)])
    nb = tree.blowup_count()
    ok = ident and cert.ok and cert.transform_identity and nb == 1
    record(6, ok, f"identities={ident and cert.transform_identity} "
                  f"(x^2,xy) unit after {nb} blowups (criterion asks 1)")
    assert ok


def _random_poly(rng, vars, deg):
    n = len(vars)
    terms = {}
    for _ in range(rng.randint(1, 6)):
        e = [0] * n
        budget = rng.randint(0, deg)
        for _ in range(budget):
            e[rng.randrange(n)] += 1
        terms[tuple(e)] = Fraction(rng.randint(-3, 3))
    return Poly(vars, terms)


def _lines_through(rng, p, m, vars):
    n = len(vars)
    out = []
    for _ in range(m):
        coef = [rng.randint(-2, 2) for _ in range(n)]
        if not any(coef):
            coef[0] = 1
        out.append(sum((Poly.var(vars, i) - p[i]) * coef[i] for i in range(n)))
    return product(out, vars)


def test_criterion_07_orders():
    rng = random.Random(20240607)
    mismatches = 0
    checked = 0
    maxbad = 0
    for trial in range(200):
        vars = ("x", "y", "z")[: rng.randint(1, 3)]
        g = _random_poly(rng, vars, rng.randint(1, 6))
        if g.is_zero() or g.is_constant():
            g = g + Poly.var(vars, 0) ** 2
        a = tuple(Fraction(rng.randint(-2, 2)) for _ in vars)
        g = g - g.evaluate(a)
        if g.is_zero():
            continue
        o = order_at_point(g, a)
        for s in range(1, g.total_degree() + 2):
            vanish = all(h.evaluate(a) == 0 for h in derivative_ideal(g, s).generators)
            if vanish != (o >= s):
                mismatches += 1
        checked += 1
        if trial % 5 == 0 and len(vars) <= 2:
            if max_order_on_variety(g) < o:
                maxbad += 1
    # structured: products of hyperplanes through a rational point
    struct_bad = 0
    for m in range(1, 5):
        for vars in (("x", "y"), ("x", "y", "z")):
            p = tuple(Fraction(rng.randint(-2, 2)) for _ in vars)
            g = _lines_through(rng, p, m, vars)
            if g.is_constant():
                continue
            top = max_order_on_variety(g)
            if top < order_at_point(g, p) or order_at_point(g, p) != m or top != m:
                struct_bad += 1
    ok = mismatches == 0 and maxbad == 0 and struct_bad == 0 and checked >= 190
    record(7, ok, f"{checked} random polynomials, {mismatches} order mismatches, "
                  f"{maxbad + struct_bad} max-order failures")
    assert ok


def _pointwise_skip(tree, skip):
    """Words at every fiber sample and its image, with the default and a later witness."""
    b0, b1 = Bounds(), Bounds(witness_skip=skip)
    births = {d: r.birth for d, r in tree.divisors.items()}
    bad = 0
    n = 0
    for y in tree.years:
        for parent, kids in sorted(y.children.items()):
            for kid in kids:
                if kid not in y.origin:
                    continue
                ch = tree.charts[kid]
                theta = ch.divisor(y.new_divisor)
                if theta is None:
                    continue
                c = next(i for i in range(len(ch.vars)) if theta == Poly.var(ch.vars, i))
                gens = tree.transforms[kid]
                for pt in fiber_samples(gens, ch, c, 8, 3):
                    img = tree.map_point(kid, pt, upto=parent)
                    for cid, p in ((kid, pt), (parent, img)):
                        args = (tree.transforms[cid], tree.charts[cid], chart_history(tree, cid), p, births)
                        try:
                            w0 = invariant_at_point(*args, b0)
                        except NotOnVariety:
                            continue
                        n += 1
                        if word_compare(w0, invariant_at_point(*args, b1)) != 0:
                            bad += 1
    return n, bad


def test_criterion_08_witness_independence(corpus):
    mism = 0
    points = 0
    for name, (src, vars) in CORPUS.items():
        tree = corpus["runs"][name][0]
        if name == "umbrella":
            # a full rerun with the later witness is slow here, compare pointwise instead
            n, bad = _pointwise_skip(tree, 1)
            points += n
            mism += bad
            continue
        other, _ = resolve_hypersurface(parse_poly(src, vars), config=ResolverConfig(witness_skip=1))
        a = [(str(y.word), y.word.J) for y in tree.years]
        b = [(str(y.word), y.word.J) for y in other.years]
        mism += sum(1 for u, v in zip(a, b) if u != v) + abs(len(a) - len(b))
        points += len(a)
    record(8, mism == 0, f"{points} words compared, {mism} mismatches")
    assert mism == 0


def test_criterion_09_groebner(corpus):
    t0 = time.time()
    seen = {}
    for G in corpus["bases"]:
        seen[(G.basis, G.order)] = G
    fails = 0
    for G in seen.values():
        B = G.basis
        for i in range(len(B)):
            for j in range(i + 1, len(B)):
                if not normal_form(s_polynomial(B[i], B[j], G.order), G).is_zero():
                    fails += 1
    wrong = 0
    for vs, gens, expected in UNIT_IDEAL_CASES:
        vars = tuple(vs.split(","))
        if is_unit_ideal([parse_poly(g, vars) for g in gens]) is not expected:
            wrong += 1
    dt = time.time() - t0
    ok = fails == 0 and wrong == 0 and dt < 30 and len(UNIT_IDEAL_CASES) == 50
    record(9, ok, f"{len(seen)} bases, {fails} nonzero S-remainders, "
                  f"{wrong}/{len(UNIT_IDEAL_CASES)} fixture errors, {dt:.1f}s")
    assert ok


def test_criterion_10_determinism(corpus):
    for p in corpus["procs"]:
        p.wait(timeout=600)
    tmp = corpus["tmp"]
    diffs = []
    count = 0
    for name in CORPUS:
        for art in ("tree.json", "certificate.json", "tree.dot"):
            a = (tmp / "a" / name / art).read_bytes()
            b = (tmp / "b" / name / art).read_bytes()
            count += 1
            if a != b:
                diffs.append(f"{name}/{art}")
    # the in-process run must agree with the CLI artifacts too
    for name in CORPUS:
        tree = corpus["runs"][name][0]
        count += 1
        if (tmp / "a" / name / "tree.json").read_text() != tree.dumps():
            diffs.append(f"{name}/tree.json (in-process)")
    record(10, not diffs, f"{count} artifacts compared, {len(diffs)} differ")
    assert not diffs, diffs


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    print("\n".join(summary_lines()))
    sys.exit(code)
