"""The year loop: maximum locus, straighten, blow up, transform, certify."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .geometry import (
    CenterSpec,
    Chart,
    InadmissibleCenter,
    ResolutionTree,
    YearRecord,
    blow_up_component,
    clean_opens,
    component_covers,
    pullback,
    snc_check,
    straighten_center,
    strict_transform,
    update_divisors,
    weak_transform_ideal,
)
from .ideals import BudgetExceeded, Ideal, is_empty, jacobian_smooth
from .invariant import (
    Bounds,
    MaxLocusNotSmooth,
    NotOnVariety,
    WitnessNotFound,
    _subset,
    invariant_at_point,
    max_stratum,
)
from .polyring import INF, Poly, domain_member, factor_poly, squarefree_part
from .words import InvariantWord, e_bounds_check, word_compare

__all__ = [
    "ResolverConfig",
    "Certificate",
    "chart_history",
    "year_step",
    "resolve_hypersurface",
    "resolve_ideal_to_nc",
    "verify_tree",
    "fiber_samples",
]

SMOOTH_WORD = InvariantWord.build([1, 0, INF])


@dataclass(frozen=True)
class ResolverConfig:
    max_years: int = 32
    coef_bound: int = 3
    kmax: int = 64
    mode: str = "hypersurface"
    prime: Optional[int] = None
    sample_height: int = 8
    samples_per_chart: int = 6
    witness_skip: int = 0
    k: Optional[int] = None
    l: Optional[int] = None

    def __post_init__(self):
        if self.max_years < 1 or self.coef_bound < 1 or self.kmax < 1 or self.sample_height < 1:
            raise ValueError("bounds must be >= 1")
        if self.mode not in ("hypersurface", "ideal"):
            raise ValueError(f"unknown mode {self.mode}")

    @property
    def bounds(self):
        return Bounds(self.coef_bound, self.kmax, self.witness_skip)


@dataclass
class Certificate:
    status: str = "resolved"
    charts: Dict[str, dict] = field(default_factory=dict)
    year_words: List[str] = field(default_factory=list)
    final_word: Optional[str] = None
    decreasing: bool = True
    e_bounds: bool = True
    admissible: bool = True
    transform_identity: bool = True
    terminal_ok: bool = True
    semicontinuity: dict = field(default_factory=lambda: {"samples": 0, "violations": []})
    blowups: int = 0
    years: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self):
        return self.status == "resolved" and not self.failures

    def fail(self, msg):
        self.failures.append(msg)

    def to_json(self):
        return {
            "ok": self.ok,
            "status": self.status,
            "charts": {k: v for k, v in sorted(self.charts.items())},
            "year_words": list(self.year_words),
            "final_word": self.final_word,
            "decreasing": self.decreasing,
            "e_bounds": self.e_bounds,
            "admissible": self.admissible,
            "transform_identity": self.transform_identity,
            "terminal_ok": self.terminal_ok,
            "semicontinuity": self.semicontinuity,
            "blowups": self.blowups,
            "years": self.years,
            "failures": list(self.failures),
        }


# ---------------------------------------------------------------------------
# history


def chart_history(tree: ResolutionTree, cid: str):
    """``(k, word_k, center_k pulled back to cid or None)`` for k descending."""
    memo = tree.memo.setdefault("history", {})
    if cid in memo:
        return memo[cid]
    ch = tree.charts[cid]
    if ch.parent is None:
        out = []
    else:
        k = tree.charts[ch.parent].year
        yr = tree.years[k]
        idx = yr.origin.get(cid)
        C = None
        if idx is not None:
            C = [pullback(p, ch) for p in yr.centers[idx].ideal]
        out = [(k, yr.word, C)]
        for kk, w, D in chart_history(tree, ch.parent):
            out.append((kk, w, None if D is None else [pullback(p, ch) for p in D]))
    memo[cid] = out
    return out


def _births(tree):
    return {d: r.birth for d, r in tree.divisors.items()}


def _is_unit_on(gens, chart):
    return is_empty(list(gens), list(chart.opens), vars=chart.vars)


def _stratum(tree: ResolutionTree, config: ResolverConfig):
    leaves = {c: tree.charts[c] for c in tree.leaves}
    hist = {c: chart_history(tree, c) for c in tree.leaves}
    return max_stratum({c: tree.transforms[c] for c in tree.leaves}, leaves, hist, _births(tree), config.bounds)


# ---------------------------------------------------------------------------
# one year


def _admissible(tree: ResolutionTree, chart: Chart, K, mode: str) -> bool:
    gens = tree.transforms[chart.id]
    opens, vars = chart.opens, chart.vars
    if not _subset(K, gens, opens, vars):
        return False
    if mode == "hypersurface":
        g = gens[0]
        sing = [g] + [g.diff(i) for i in range(len(vars))]
        if not _subset(K, sing, opens, vars):
            if not jacobian_smooth([g], 1, opens=opens):
                return False
            if not any(_subset(K, [eq], opens, vars) for _, eq in chart.divisors):
                return False
    # normal crossings of the center with the divisors not containing it
    q = len(vars) - _dim(K)
    outside = [eq for _, eq in chart.divisors if not _subset(K, [eq], opens, vars)]
    for r in range(len(outside) + 1):
        for S in itertools.combinations(outside, r):
            if not jacobian_smooth(list(K) + list(S), q + r, opens=opens):
                return False
    return True


def _dim(K):
    from .ideals import dim_ideal

    return dim_ideal(list(K))


def year_step(tree: ResolutionTree, config: ResolverConfig, report=None) -> ResolutionTree:
    """Blow up the maximum locus of the current year in every leaf chart."""
    if report is None:
        report = _stratum(tree, config)
    if report.word is None:
        raise ValueError("nothing left to blow up")
    if not report.smooth:
        raise MaxLocusNotSmooth(f"maximum locus of {report.word} is not smooth")
    j = tree.year
    eid = f"E{j + 1}"
    rec = YearRecord(j, report.word, new_divisor=eid)
    children = []
    for cid in list(tree.leaves):
        chart = tree.charts[cid]
        comps = report.loci.get(cid, [])
        kids = []
        if not comps:
            kid = Chart(f"{cid}/0", j + 1, chart.vars, cid, tuple(Poly.gens(chart.vars)),
                        chart.divisors, chart.opens)
            kids.append(kid)
            tree.transforms[kid.id] = list(tree.transforms[cid])
        else:
            nxt = 1
            for K in comps:
                if not _admissible(tree, chart, K, config.mode):
                    raise InadmissibleCenter(f"center {[str(p) for p in K]} in chart {cid} is not admissible")
            covers = component_covers(chart, comps)
            for ci, seps in enumerate(covers):
                for _, sep in seps:
                    sub = chart if sep is None else Chart(chart.id, chart.year, chart.vars, chart.parent,
                                                          chart.transition, chart.divisors,
                                                          chart.opens + (sep,))
                    st = straighten_center(sub, list(comps[ci]), config.coef_bound)
                    spec = CenterSpec(cid, tuple(comps[ci]), st, sep)
                    rec.centers.append(spec)
                    made = blow_up_component(chart, spec, j + 1, eid, first_index=nxt)
                    nxt += len(made)
                    for kid in made:
                        rec.origin[kid.id] = len(rec.centers) - 1
                        theta = kid.divisor(eid)
                        if theta is None:
                            theta = Poly.const(kid.vars, 1)
                        tree.transforms[kid.id] = _transform(tree.transforms[cid], kid, theta, config.mode)
                    kids.extend(made)
                    if st.den is not None:
                        # where the denominator vanishes the center is absent
                        for h in _away_opens(sub, st.den, comps[ci]):
                            kid = Chart(f"{cid}/{nxt}", j + 1, chart.vars, cid, tuple(Poly.gens(chart.vars)),
                                        chart.divisors, clean_opens(sub.opens + (h,)))
                            nxt += 1
                            kids.append(kid)
                            tree.transforms[kid.id] = list(tree.transforms[cid])
        rec.children[cid] = [k.id for k in kids]
        children.extend(kids)
    tree.divisors = update_divisors(tree.divisors, children, eid, j + 1)
    for kid in children:
        tree.charts[kid.id] = kid
    tree.years.append(rec)
    tree.leaves = [k.id for k in children]
    return tree


def _away_opens(chart: Chart, den: Poly, K):
    """Opens missing the center ``K`` that together cover ``den = 0`` on the chart."""
    gens = [g for g in K if not g.is_constant()]
    for h in gens:
        if is_empty([den, h], list(chart.opens), vars=chart.vars):
            return [h]
    return gens


def _normalize(p: Poly) -> Poly:
    if p.is_zero():
        return p
    if p.is_constant():
        return Poly.const(p.vars, 1)
    return p.primitive()


def _transform(gens, kid, theta, mode):
    if mode == "hypersurface":
        g, _ = strict_transform(gens[0], kid, theta)
        return [_normalize(g)]
    I, _ = weak_transform_ideal(list(gens), kid, theta)
    out = []
    for g in I.generators:
        g = _normalize(g)
        if g not in out:
            out.append(g)
    if any(g.is_constant() for g in out):
        return [Poly.const(kid.vars, 1)]
    return out


# ---------------------------------------------------------------------------
# drivers


def _root_tree(mode, gens, vars):
    tree = ResolutionTree(mode, tuple(vars))
    root = Chart("c0", 0, tuple(vars))
    tree.charts["c0"] = root
    tree.leaves = ["c0"]
    tree.transforms["c0"] = list(gens)
    tree.input = list(gens)
    return tree


def _done(tree, report, mode):
    if mode == "hypersurface":
        return report.word is None or word_compare(report.word, SMOOTH_WORD) == 0
    return all(_is_unit_on(tree.transforms[c], tree.charts[c]) for c in tree.leaves)


def _run(tree, config):
    try:
        while True:
            report = _stratum(tree, config)
            if _done(tree, report, config.mode):
                tree.final_word = report.word
                tree.status = "resolved"
                break
            if tree.year >= config.max_years:
                tree.final_word = report.word
                tree.status = "budget_exceeded"
                break
            year_step(tree, config, report)
    except (BudgetExceeded, WitnessNotFound) as exc:
        tree.status = "budget_exceeded"
        tree.final_word = None
        tree.error = str(exc)
    except (MaxLocusNotSmooth, InadmissibleCenter) as exc:
        tree.status = "certificate_failure"
        tree.final_word = None
        tree.error = str(exc)
    return tree


def _check_signature(vars, k, l):
    if k is None and l is None:
        return
    if (k or 0) + (l or 0) != len(vars):
        raise ValueError(f"k + l must equal the number of variables ({len(vars)})")


def resolve_hypersurface(g: Poly, k: Optional[int] = None, l: Optional[int] = None,
                         config: ResolverConfig = ResolverConfig()):
    """Resolve V(g) until smooth, normal crossings with the divisors, and s_1 = 0."""
    if g.is_zero() or g.is_constant():
        raise ValueError("input must be a nonzero nonunit polynomial")
    _check_signature(g.vars, k, l)
    if config.mode != "hypersurface":
        config = ResolverConfig(**{**config.__dict__, "mode": "hypersurface"})
    g = _normalize(squarefree_part(g))
    tree = _run(_root_tree("hypersurface", [g], g.vars), config)
    return tree, verify_tree(tree, config)


def resolve_ideal_to_nc(I, k: Optional[int] = None, l: Optional[int] = None,
                        config: ResolverConfig = ResolverConfig()):
    """Blow up until the weak transform is the unit ideal in every chart."""
    gens = [g for g in (I.generators if isinstance(I, Ideal) else I) if not g.is_zero()]
    if not gens:
        raise ValueError("zero ideal")
    vars = gens[0].vars
    _check_signature(vars, k, l)
    if _is_unit_on(gens, Chart("c0", 0, vars)):
        raise ValueError("unit ideal")
    if config.mode != "ideal":
        config = ResolverConfig(**{**config.__dict__, "mode": "ideal"})
    gens = [_normalize(g) for g in gens]
    tree = _run(_root_tree("ideal", gens, vars), config)
    return tree, verify_tree(tree, config)


# ---------------------------------------------------------------------------
# certificates


def _rationals(height):
    seen = set()
    out = []
    for h in range(0, height + 1):
        for q in range(1, h + 1 if h else 2):
            for p in range(-h, h + 1):
                x = Fraction(p, q)
                if max(abs(x.numerator), x.denominator) <= h or h == 0:
                    if x not in seen:
                        seen.add(x)
                        out.append(x)
    return out


def _rational_roots(p: Poly, i: int):
    """Rational roots of a polynomial depending on variable i only."""
    if p.is_zero():
        return None
    if p.is_constant():
        return []
    _, facs = factor_poly(p)
    out = []
    for f, _ in facs:
        if f.total_degree() == 1 and f.degree_in(i) == 1:
            co = f.coeffs_in(i)
            out.append(-co.get(0, Poly.zero(f.vars)).constant_term() / co[1].constant_term())
    return out


def fiber_samples(gens: Sequence[Poly], chart: Chart, c: int, height: int = 8, limit: int = 6,
                  prime=None, k=None):
    """Rational points of V(gens) with x_c = 0 on the chart, coordinates of height <= height."""
    vars = chart.vars
    n = len(vars)
    small = _rationals(2)
    free = [i for i in range(n) if i != c]
    out = []
    seen = set()
    for s in reversed(free):
        fixed = [i for i in free if i != s]
        for vals in itertools.product(small, repeat=len(fixed)):
            images = list(Poly.gens(vars))
            images[c] = Poly.zero(vars)
            for i, v in zip(fixed, vals):
                images[i] = Poly.const(vars, v)
            uni = [g.compose(images, vars) for g in gens]
            roots = None
            for u in uni:
                r = _rational_roots(u, s)
                if r is None:
                    continue
                roots = r if roots is None else [x for x in roots if x in r]
            if roots is None:
                roots = small
            for x in roots:
                pt = [Fraction(0)] * n
                for i, v in zip(fixed, vals):
                    pt[i] = v
                pt[s] = x
                pt = tuple(pt)
                if pt in seen or any(max(abs(t.numerator), t.denominator) > height for t in pt):
                    continue
                if any(o.evaluate(pt) == 0 for o in chart.opens):
                    continue
                if any(g.evaluate(pt) != 0 for g in gens):
                    continue
                seen.add(pt)
                out.append(pt)
                if len(out) >= limit:
                    return out
    return out


def _total_pullback(tree, f, cid):
    return tree.to_root(f, cid)


def _strictly_less(a: InvariantWord, b: InvariantWord, births):
    c = word_compare(a, b)
    if c != 0:
        return c < 0
    # equal words: the extended invariant J decides
    from .invariant import _J_key

    return _J_key(a.J, births) < _J_key(b.J, births)


def verify_tree(tree: ResolutionTree, config: ResolverConfig = ResolverConfig()) -> Certificate:
    """Re-derive every certificate of a finished tree."""
    cert = Certificate(status=tree.status)
    cert.years = tree.year
    cert.blowups = tree.blowup_count()
    if getattr(tree, "error", None):
        cert.fail(tree.error)
    if tree.status != "resolved":
        cert.fail(f"run ended with status {tree.status}")
    births = _births(tree)
    words = [y.word for y in tree.years]
    cert.year_words = [str(w) + ("" if not w.J else " J=" + ",".join(w.J)) for w in words]
    if tree.final_word is not None:
        cert.final_word = str(tree.final_word)

    # per-year strict decrease and integrality
    seq = list(words) + ([tree.final_word] if tree.final_word is not None else [])
    for a, b in zip(seq, seq[1:]):
        if not _strictly_less(b, a, births):
            cert.decreasing = False
            cert.fail(f"maximum word did not decrease: {a} then {b}")
    for w in seq:
        if not e_bounds_check(w):
            cert.e_bounds = False
            cert.fail(f"integrality fails for {w}")

    # centers and transform identities
    for y in tree.years:
        for spec in y.centers:
            ch = tree.charts[spec.chart]
            K = list(spec.ideal)
            q = len(ch.vars) - _dim(K)
            if q != spec.q or not jacobian_smooth(K, q, opens=ch.opens):
                cert.admissible = False
                cert.fail(f"center {[str(p) for p in K]} in {spec.chart} is not smooth of codimension {spec.q}")
        for parent, kids in y.children.items():
            pg = tree.transforms[parent]
            for kid in kids:
                ch = tree.charts[kid]
                theta = ch.divisor(y.new_divisor) if kid in y.origin else None
                if not _identity_holds(pg, tree.transforms[kid], ch, theta, tree.mode):
                    cert.transform_identity = False
                    cert.fail(f"transform identity fails in chart {kid}")

    # final charts
    for cid in tree.leaves:
        ch = tree.charts[cid]
        gens = tree.transforms[cid]
        info = {}
        unit = _is_unit_on(gens, ch)
        if tree.mode == "hypersurface":
            X = [] if unit else list(gens)
            info["smooth"] = True if unit else jacobian_smooth(X, 1, opens=ch.opens)
            info["snc"] = snc_check(X, ch)
            total = _total_pullback(tree, tree.input[0], cid)
            exps, resid = _extract(total, ch)
            info["nc_exponents"] = exps
            info["total_identity"] = _unit_multiple(resid, gens[0], ch)
        else:
            info["weak_unit"] = unit
            totals = [_total_pullback(tree, f, cid) for f in tree.input]
            exps, quots = _common_monomial(totals, ch)
            info["nc_exponents"] = exps
            info["total_identity"] = _is_unit_on(quots, ch)
            info["smooth"] = unit
            info["snc"] = snc_check([], ch)
        cert.charts[cid] = info
        for key in ("smooth", "snc", "total_identity"):
            if not info[key]:
                cert.fail(f"{key} fails in chart {cid}")
        if tree.mode == "ideal" and not info["weak_unit"]:
            cert.fail(f"weak transform is not the unit ideal in chart {cid}")
    if tree.mode == "hypersurface" and tree.status == "resolved":
        if tree.final_word is not None and word_compare(tree.final_word, SMOOTH_WORD) != 0:
            cert.terminal_ok = False
            cert.fail(f"final maximum word {tree.final_word} is not (1,0; inf)")
    if tree.status == "resolved":
        _semicontinuity(tree, config, cert)
    return cert


def _extract(total: Poly, ch: Chart):
    exps = {}
    resid = total
    for did, eq in ch.divisors:
        k, resid = resid.divisibility(eq)
        if k:
            exps[did] = k
    return exps, resid


def _unit_multiple(resid: Poly, strict: Poly, ch: Chart) -> bool:
    q = resid.divexact(strict)
    if q is None:
        return False
    return q.is_constant() or _is_unit_on([q], ch)


def _common_monomial(totals, ch):
    exps = {}
    quots = list(totals)
    for did, eq in ch.divisors:
        k = min(t.divisibility(eq)[0] for t in quots)
        if k:
            exps[did] = k
            new = []
            for t in quots:
                for _ in range(k):
                    t = t.divexact(eq)
                new.append(t)
            quots = new
    return exps, quots


def _identity_holds(parent_gens, kid_gens, ch, theta, mode) -> bool:
    pulled = [pullback(g, ch) for g in parent_gens]
    if theta is None:
        if mode == "hypersurface":
            return pulled[0] == kid_gens[0] or _proportional(pulled[0], kid_gens[0])
        return True
    if mode == "hypersurface":
        d, q = pulled[0].divisibility(theta)
        return _proportional(q, kid_gens[0]) and pulled[0] == q * theta ** d
    mu = min(p.divisibility(theta)[0] for p in pulled)
    return all(p == (p.divisibility(theta, mu)[1]) * theta ** mu for p in pulled)


def _proportional(a: Poly, b: Poly) -> bool:
    if a.is_zero() or b.is_zero():
        return a.is_zero() and b.is_zero()
    q = a.divexact(b)
    return q is not None and q.is_constant()


def _semicontinuity(tree, config, cert):
    births = _births(tree)
    samples = 0
    bad = []
    for y in tree.years:
        for parent, kids in sorted(y.children.items()):
            pch = tree.charts[parent]
            phist = chart_history(tree, parent)
            for kid in kids:
                if kid not in y.origin:
                    continue
                spec = y.centers[y.origin[kid]]
                if spec.q < 2:
                    continue
                ch = tree.charts[kid]
                theta = ch.divisor(y.new_divisor)
                if theta is None:
                    continue
                c = next(i for i in range(len(ch.vars)) if theta == Poly.var(ch.vars, i))
                gens = tree.transforms[kid]
                if _is_unit_on(gens, ch):
                    continue
                pts = fiber_samples(gens, ch, c, config.sample_height, config.samples_per_chart)
                if config.prime is not None and config.k is not None:
                    pts = [p for p in pts if domain_member(p, config.k, config.l or 0, config.prime)]
                khist = chart_history(tree, kid)
                for pt in pts:
                    img = tree.map_point(kid, pt, upto=parent)
                    try:
                        w1 = invariant_at_point(gens, ch, khist, pt, births, config.bounds)
                        w0 = invariant_at_point(tree.transforms[parent], pch, phist, img, births, config.bounds)
                    except NotOnVariety:
                        bad.append({"chart": kid, "point": [str(x) for x in pt], "reason": "off variety"})
                        continue
                    samples += 1
                    c01 = word_compare(w1, w0)
                    if c01 > 0 or (w0.terminal is INF and c01 == 0):
                        bad.append({"chart": kid, "point": [str(x) for x in pt], "word": str(w1), "image": str(w0)})
    cert.semicontinuity = {"samples": samples, "violations": bad}
    if bad:
        cert.fail(f"{len(bad)} semicontinuity violations")
