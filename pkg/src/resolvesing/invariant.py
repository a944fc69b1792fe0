"""The resolution invariant and its maximum locus.

Values are computed on *pieces*: locally closed subsets of a chart given by
closed equations and nonvanishing conditions, or a single rational point.
Every step of the invariant (orders, maximal contact, divisor splitting,
companion subtraction) may split a piece; each branch carries its own
partial word, and only branches attaining the lexicographic maximum are
kept.  Working with one point is the same computation with emptiness
decided by evaluation.

A presentation lives on a maximal contact subvariety N which is always a
graph over a subset of the chart coordinates (the *level variables*).
``psi`` expresses each level variable as a chart polynomial, so conditions
on level functions pull back to chart conditions by composition.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .geometry import Chart
from .ideals import (
    derivative_generators,
    derivative_ideal,
    dim_ideal,
    groebner,
    is_empty,
    jacobian_smooth,
    saturate,
)
from .polyring import INF, Poly, factor_poly, order_at_point, product
from .words import ZERO, InvariantWord, e_bounds_check, word_compare

__all__ = [
    "Bounds",
    "MarkedPair",
    "Presentation",
    "Piece",
    "StratumReport",
    "WitnessNotFound",
    "NotOnVariety",
    "MaxLocusNotSmooth",
    "InvariantWord",
    "word_compare",
    "e_bounds_check",
    "maximal_contact",
    "coefficient_pairs",
    "nu_next",
    "divisor_split",
    "history_index",
    "companion_subtract",
    "monomial_divide",
    "scale_pairs",
    "recurse_presentation",
    "invariant_at_point",
    "stratify",
    "max_stratum",
    "prime_components",
]


class WitnessNotFound(RuntimeError):
    pass


class NotOnVariety(ValueError):
    """The point is off the zero locus (order 0)."""


class MaxLocusNotSmooth(RuntimeError):
    pass


class _ContactInDivisor(ValueError):
    """The candidate contact subvariety lies inside a divisor still to be subtracted."""


class _ContactNotGraph(WitnessNotFound):
    """The candidate contact hypersurface is not a polynomial graph."""


@dataclass(frozen=True)
class Bounds:
    coef_bound: int = 3
    kmax: int = 64
    witness_skip: int = 0


class MarkedPair(NamedTuple):
    h: Poly
    mu: Fraction


# ---------------------------------------------------------------------------
# pieces


@dataclass(frozen=True)
class Piece:
    chart: Chart
    closed: Tuple[Poly, ...] = ()
    opens: Tuple[Poly, ...] = ()
    point: Optional[Tuple[Fraction, ...]] = None

    @property
    def vars(self):
        return self.chart.vars

    def all_opens(self):
        return tuple(self.chart.opens) + tuple(self.opens)

    def is_empty(self):
        if self.point is not None:
            return any(c.evaluate(self.point) != 0 for c in self.closed) or any(
                o.evaluate(self.point) == 0 for o in self.all_opens()
            )
        return is_empty(list(self.closed), list(self.all_opens()), vars=self.vars)

    def meet(self, polys):
        new = [p for p in polys if not p.is_zero() and p not in self.closed]
        if not new:
            return self
        if self.point is not None:
            if any(p.evaluate(self.point) != 0 for p in new):
                return replace(self, closed=self.closed + (Poly.const(self.vars, 1),))
            return self
        return replace(self, closed=self.closed + tuple(new))

    def avoid(self, polys):
        new = [p for p in polys if not p.is_constant() or p.is_zero()]
        new = [p for p in new if p not in self.opens]
        if not new:
            return self
        if self.point is not None:
            if any(p.evaluate(self.point) == 0 for p in new):
                return replace(self, closed=self.closed + (Poly.const(self.vars, 1),))
            return self
        return replace(self, opens=self.opens + tuple(new))

    def inside(self, f: Poly) -> bool:
        """Does f vanish on the whole piece?"""
        if self.point is not None:
            return f.evaluate(self.point) == 0
        return is_empty(list(self.closed), list(self.all_opens()) + [f], vars=self.vars)

    def nowhere_zero(self, f: Poly) -> bool:
        if self.point is not None:
            return f.evaluate(self.point) != 0
        return is_empty(list(self.closed) + [f], list(self.all_opens()), vars=self.vars)

    def split(self, f: Poly):
        """Nonempty parts of the piece on and off V(f)."""
        return [p for p in (self.meet([f]), self.avoid([f])) if not p.is_empty()]

    def outside(self, polys):
        """Disjoint pieces covering the piece minus V(polys)."""
        out = []
        cur = self
        for p in polys:
            if p.is_zero():
                continue
            off = cur.avoid([p])
            if not off.is_empty():
                out.append(off)
            cur = cur.meet([p])
            if cur.is_empty():
                break
        return out


# ---------------------------------------------------------------------------
# presentations


@dataclass(frozen=True)
class Presentation:
    """Marked pairs on a maximal contact graph N.

    ``vars`` are the level variables, ``psi[i]`` the chart polynomial giving
    level variable i, ``pairs`` the marked pairs over the level variables,
    ``thetas`` the restricted equations of the divisors still to be
    subtracted, and ``N`` the chart equations cutting out N.
    """

    vars: Tuple[str, ...]
    psi: Tuple[Poly, ...]
    pairs: Tuple[MarkedPair, ...]
    thetas: Tuple[Tuple[str, Poly], ...] = ()
    N: Tuple[Poly, ...] = ()

    def pull(self, h: Poly) -> Poly:
        return h.compose(self.psi, self.psi[0].vars) if self.psi else h

    def level_point(self, point):
        return tuple(p.evaluate(point) for p in self.psi)

    def theta(self, did):
        for d, t in self.thetas:
            if d == did:
                return t
        raise KeyError(did)


def _chart_presentation(chart: Chart, pairs, thetas=()):
    return Presentation(chart.vars, tuple(Poly.gens(chart.vars)), tuple(pairs), tuple(thetas))


def _pull(P: Presentation, chart: Chart, h: Poly) -> Poly:
    if not P.vars:
        return Poly.const(chart.vars, h.constant_term())
    return h.compose(P.psi, chart.vars)


# ---------------------------------------------------------------------------
# orders and ratios


def _candidate_ratios(pairs):
    vals = set()
    for h, mu in pairs:
        for k in range(h.total_degree() + 1):
            vals.add(Fraction(k) / Fraction(mu))
    return sorted(vals)


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _locus_at_least(piece: Piece, P: Presentation, t: Fraction) -> Piece:
    polys = []
    for h, mu in P.pairs:
        s = _ceil(t * mu)
        if s >= 1:
            polys.extend(_pull(P, piece.chart, d) for d in derivative_ideal(h, s).nonzero())
    return piece.meet(polys)


def _max_ratio(piece: Piece, P: Presentation):
    """Largest value of ``min ord(h)/mu`` on the piece and the piece where it is attained."""
    pairs = [(h, mu) for h, mu in P.pairs if not h.is_zero()]
    if not pairs:
        return INF, piece
    if piece.point is not None:
        lp = P.level_point(piece.point)
        return min(Fraction(order_at_point(h, lp)) / mu for h, mu in pairs), piece
    cands = _candidate_ratios(pairs)
    lo, hi = 0, len(cands) - 1
    best = piece
    # nonemptiness is monotone in t
    while lo < hi:
        mid = (lo + hi + 1) // 2
        loc = _locus_at_least(piece, replace(P, pairs=tuple(pairs)), cands[mid])
        if loc.is_empty():
            hi = mid - 1
        else:
            lo = mid
            best = loc
    t = cands[lo]
    if best is piece:
        best = _locus_at_least(piece, replace(P, pairs=tuple(pairs)), t)
    return t, best


def nu_next(pairs: Sequence[MarkedPair], at=None, N=None) -> object:
    """``min ord(h)/mu`` at a point (coordinates of the level variables).

    ``N`` is accepted for symmetry with the stratum form and ignored: pairs
    are already functions on N.  INF for an empty or identically zero
    collection.
    """
    pairs = [(h, Fraction(mu)) for h, mu in pairs if not h.is_zero()]
    if not pairs:
        return INF
    if at is None:
        at = (0,) * pairs[0][0].nvars
    return min(Fraction(order_at_point(h, at)) / mu for h, mu in pairs)


# ---------------------------------------------------------------------------
# scaling and monomial parts


def scale_pairs(pairs: Sequence[MarkedPair], nu) -> List[MarkedPair]:
    if nu is INF or Fraction(nu) <= 0:
        raise ValueError("scaling factor must be finite and positive")
    nu = Fraction(nu)
    return [MarkedPair(h, Fraction(mu) * nu) for h, mu in pairs]


def _common_multiple(mus):
    nums = 1
    dens = 0
    for m in mus:
        m = Fraction(m)
        nums = nums * m.numerator // gcd(nums, m.numerator)
        dens = gcd(dens, m.denominator)
    return Fraction(nums, dens)


def _divide_monomial(pairs, factors: Dict[str, Poly], exps: Dict[str, Dict[int, int]]):
    """Scale pairs to a common mu and divide out the common divisor monomial."""
    M = _common_multiple([mu for _, mu in pairs])
    lift = []
    for i, (h, mu) in enumerate(pairs):
        e = M / Fraction(mu)
        assert e.denominator == 1
        lift.append((h ** int(e), int(e)))
    out = []
    emin = {}
    for H in factors:
        emin[H] = min(lift[i][1] * exps[H][i] for i in range(len(pairs)))
    for h, _ in lift:
        q = h
        for H, phi in factors.items():
            for _ in range(emin[H]):
                q = q.divexact(phi)
                if q is None:
                    raise ArithmeticError("monomial part does not divide")
        out.append(MarkedPair(q, M))
    return out


def monomial_divide(pairs: Sequence[MarkedPair], divisor_eqs: Sequence[Poly]) -> List[MarkedPair]:
    """Scale to a common mu and remove the largest common monomial in ``divisor_eqs``."""
    pairs = [MarkedPair(h, Fraction(mu)) for h, mu in pairs if not h.is_zero()]
    eqs = [e for e in divisor_eqs if not e.is_constant()]
    if not eqs or not pairs:
        return list(pairs)
    factors = {str(k): e for k, e in enumerate(eqs)}
    exps = {str(k): {i: h.divisibility(e)[0] for i, (h, _) in enumerate(pairs)} for k, e in enumerate(eqs)}
    if all(min(v.values()) == 0 for v in exps.values()):
        return list(pairs)
    return _divide_monomial(pairs, factors, exps)


def companion_subtract(pairs: Sequence[MarkedPair], thetas: Dict[str, Poly], at=None):
    """``(mu, nu, {H: mu_H})`` with ``nu = mu - sum mu_H`` at a point of N.

    ``thetas`` maps divisor ids to their restricted equations; only
    divisors through the point contribute.
    """
    pairs = [MarkedPair(h, Fraction(mu)) for h, mu in pairs if not h.is_zero()]
    mu = nu_next(pairs, at)
    if mu is INF:
        return INF, INF, {}
    if at is None:
        at = (0,) * pairs[0].h.nvars
    muH = {}
    for H, th in sorted(thetas.items()):
        phi = _factor_through(th, lambda f: f.evaluate(at) == 0)
        if phi is None:
            continue
        muH[H] = min(Fraction(h.divisibility(phi)[0]) / m for h, m in pairs)
    nu = mu - sum(muH.values(), Fraction(0))
    if nu < 0:
        raise ArithmeticError(f"negative companion difference {nu}")
    return mu, nu, muH


def _factor_through(theta: Poly, vanishes):
    """The irreducible factor of theta selected by ``vanishes`` (None if theta misses)."""
    if theta.is_zero():
        raise ValueError("divisor contains the maximal contact subvariety")
    if theta.is_constant():
        return None
    _, facs = factor_poly(theta)
    hits = [f for f, _ in facs if vanishes(f)]
    if not hits:
        return None
    if len(hits) > 1:
        raise ValueError("divisor is singular at the point")
    return hits[0]


# ---------------------------------------------------------------------------
# history and divisor splitting


def history_index(prefix, history, at_center) -> int:
    """Smallest year whose image point shares ``prefix``.

    ``history`` lists ``(k, word_k, center_k)`` for k descending;
    ``at_center(center_k)`` says whether the image point of year k lies
    in that year's center (``center_k`` None means the center missed).
    """
    prefix = tuple(prefix)
    for k, w, C in history:
        if w is not None and w.prefix(len(prefix)) == prefix:
            continue
        if C is not None and at_center(C):
            return k + 1
    return 0


def divisor_split(incident: Sequence[str], births: Dict[str, int], i: int, year: Optional[int] = None):
    """``(E^r, s_r, rest)``: divisors through the point born no later than year i."""
    for H in incident:
        if H not in births:
            raise ValueError(f"unknown divisor {H}")
        if year is not None and births[H] > year:
            raise ValueError(f"divisor {H} born after the current year")
    E = sorted(H for H in incident if births[H] <= i)
    rest = sorted(H for H in incident if births[H] > i)
    return E, len(E), rest


# ---------------------------------------------------------------------------
# maximal contact


def _spiral(bound):
    yield 0
    for c in range(1, bound + 1):
        yield c
        yield -c


def _witnesses(k, bound):
    """(contact index, shear) candidates: plain directions, last variable first, then shears."""
    for c in reversed(range(k)):
        yield c, {}
    for c in reversed(range(k)):
        others = [w for w in range(k) if w != c]
        for vec in itertools.product(list(_spiral(bound)), repeat=len(others)):
            u = {w: x for w, x in zip(others, vec) if x}
            if u:
                yield c, u


def _apply_change(P: Presentation, c: int, u: Dict[int, int]) -> Presentation:
    """New level coordinates y_w = x_w - u_w x_c, so that d/dy_c is the u-direction."""
    if not u:
        return P
    gens = Poly.gens(P.vars)
    images = [gens[w] + gens[c].scale(u[w]) if w in u else gens[w] for w in range(len(P.vars))]
    psi = list(P.psi)
    for w, x in u.items():
        psi[w] = P.psi[w] - P.psi[c].scale(x)
    return Presentation(
        P.vars,
        tuple(psi),
        tuple(MarkedPair(h.compose(images, P.vars), mu) for h, mu in P.pairs),
        tuple((d, t.compose(images, P.vars)) for d, t in P.thetas),
        P.N,
    )


def _solve(phi: Poly, c: int, piece: Piece, P: Presentation):
    """A variable v with ``phi = a v + rest`` and a nowhere zero on the piece."""
    order = [c] + [w for w in reversed(range(len(P.vars))) if w != c]
    fallback = None
    for v in order:
        if phi.degree_in(v) != 1:
            continue
        co = phi.coeffs_in(v)
        a = co[1]
        rest = co.get(0, Poly.zero(P.vars))
        if a.is_constant():
            return v, a, rest
        if fallback is None and piece.nowhere_zero(_pull(P, piece.chart, a)):
            fallback = (v, a, rest)
    return fallback


def _restrictor(P: Presentation, v: int, a: Poly, rest: Poly):
    vars = P.vars
    keep = tuple(x for i, x in enumerate(vars) if i != v)
    if a.is_constant():
        images = list(Poly.gens(vars))
        images[v] = rest.scale(-1 / a.constant_term())

        def R(p):
            return p.compose(images, vars).drop(keep)
    else:
        def R(p):
            D = p.degree_in(v)
            if D <= 0:
                return p.drop(keep)
            co = p.coeffs_in(v)
            num = Poly.zero(vars)
            for k, ck in co.items():
                num = num + ck * (-rest) ** k * a ** (D - k)
            while not num.is_zero():
                q = num.divexact(a)
                if q is None:
                    break
                num = q
            return num.drop(keep)

    return keep, R


def _cut(piece: Piece, P: Presentation, idx: int, c: int, m: int) -> List[Tuple[Piece, Presentation]]:
    chart = piece.chart
    h = P.pairs[idx].h
    z = h.diff(c, m - 1)
    _, facs = factor_poly(z)
    out = []
    for j, (phi, _) in enumerate(facs):
        others = [_pull(P, chart, f) for k, (f, _) in enumerate(facs) if k != j]
        sub = piece.meet([_pull(P, chart, phi)]).avoid(others)
        if sub.is_empty():
            continue
        sol = _solve(phi, c, sub, P)
        if sol is None:
            # without a graph we can still conclude when every pair vanishes on N
            rest = [h.diff(c, q) for q in range(m)] + [g for k, (g, _) in enumerate(P.pairs) if k != idx]
            if any(t.divexact(phi) is not None for _, t in P.thetas):
                raise _ContactInDivisor(phi)
            if all(r.is_zero() or r.divexact(phi) is not None for r in rest):
                out.append((sub, Presentation(P.vars, P.psi, (), (), P.N + (_pull(P, chart, phi),))))
                continue
            raise _ContactNotGraph(f"contact hypersurface {phi} is not a graph over the remaining coordinates")
        v, a, rest = sol
        keep, R = _restrictor(P, v, a, rest)
        pairs = []
        for q in range(m):
            r = R(h.diff(c, q))
            if not r.is_zero():
                pairs.append(MarkedPair(r, Fraction(m - q)))
        for k, (g, mu) in enumerate(P.pairs):
            if k == idx:
                continue
            r = R(g)
            if not r.is_zero():
                pairs.append(MarkedPair(r, mu))
        thetas = []
        for d, t in P.thetas:
            r = R(t)
            if r.is_zero():
                raise _ContactInDivisor(d)
            thetas.append((d, r))
        psi = tuple(p for i, p in enumerate(P.psi) if i != v)
        out.append((sub, Presentation(keep, psi, tuple(pairs), tuple(thetas),
                                      P.N + (_pull(P, chart, phi),))))
    return out


def _tangent(piece: Piece, Q: Presentation, c: int) -> bool:
    """Is d/dx_c tangent to every divisor where the divisor meets the piece?"""
    for _, t in Q.thetas:
        dt = t.diff(c)
        if dt.is_zero():
            continue
        if not piece.meet([_pull(Q, piece.chart, t)]).avoid([_pull(Q, piece.chart, dt)]).is_empty():
            return False
    return True


def _witness_order(piece: Piece, P: Presentation, idx: int, m: int, bounds: Bounds):
    """Witnesses tangent to the divisors first, the others as a fallback."""
    cands = list(_witnesses(len(P.vars), bounds.coef_bound))
    if bounds.witness_skip <= 0:
        rest = []
        for c, u in cands:
            if _tangent(piece, _apply_change(P, c, u), c):
                yield c, u
            else:
                rest.append((c, u))
        yield from rest
        return
    valid = []
    for c, u in cands:
        Q = _apply_change(P, c, u)
        D = Q.pairs[idx].h.diff(c, m)
        if D.is_zero() or not piece.nowhere_zero(_pull(Q, piece.chart, D)):
            continue
        if not _tangent(piece, Q, c):
            continue
        try:
            _cut(piece, Q, idx, c, m)
        except (_ContactInDivisor, _ContactNotGraph):
            continue
        valid.append((c, u))
        if len(valid) > bounds.witness_skip:
            break
    if len(valid) <= bounds.witness_skip:
        yield from _witness_order(piece, P, idx, m, Bounds(bounds.coef_bound, bounds.kmax, 0))
        return
    pick = valid[bounds.witness_skip]
    yield pick
    yield from (w for w in _witness_order(piece, P, idx, m, Bounds(bounds.coef_bound, bounds.kmax, 0))
                if w != pick)


def _contact(piece: Piece, P: Presentation, bounds: Bounds):
    """Cut by a maximal contact hypersurface; returns (subpiece, presentation on N) branches."""
    chart = piece.chart
    out = []
    rem = [piece]
    why = None
    for idx, (h, mu) in enumerate(P.pairs):
        if not rem:
            break
        if h.is_zero() or Fraction(mu).denominator != 1 or mu < 1:
            continue
        m = int(mu)
        nxt = []
        for p in rem:
            cur = p
            for c, u in _witness_order(p, P, idx, m, bounds):
                Q = _apply_change(P, c, u)
                D = Q.pairs[idx].h.diff(c, m)
                if D.is_zero():
                    continue
                Dc = _pull(Q, chart, D)
                good = cur.avoid([Dc])
                if not good.is_empty():
                    try:
                        branches = _cut(good, Q, idx, c, m)
                    except _ContactInDivisor:
                        if m == 1:
                            # the cut V(h) does not depend on the witness
                            break
                        continue
                    except _ContactNotGraph as exc:
                        why = exc
                        continue
                    out.extend(branches)
                cur = cur.meet([Dc])
                if cur.is_empty():
                    break
            if not cur.is_empty():
                # left for the next pair
                nxt.append(cur)
        rem = nxt
    if rem:
        raise WitnessNotFound(str(why) if why else "no marked pair has order equal to its weight on the locus")
    return out


# ---------------------------------------------------------------------------
# the staged computation


class _Branch(NamedTuple):
    word: InvariantWord
    piece: Piece
    incident: Tuple[str, ...]


@dataclass
class _Ctx:
    births: Dict[str, int]
    history: List[Tuple[int, Optional[InvariantWord], Optional[List[Poly]]]]
    bounds: Bounds


def _history_split(ctx: _Ctx, piece: Piece, prefix):
    prefix = tuple(prefix)
    out = []
    cur = [piece]
    for k, w, C in ctx.history:
        if w is not None and w.prefix(len(prefix)) == prefix:
            continue
        if C is None:
            continue
        nxt = []
        for p in cur:
            pin = p.meet(C)
            if not pin.is_empty():
                out.append((pin, k + 1))
            nxt.extend(p.outside(C))
        cur = nxt
        if not cur:
            break
    out.extend((p, 0) for p in cur)
    return out


def _local_factor_split(piece: Piece, P: Presentation, ids):
    """Split so that each divisor's restricted equation has one factor through the piece."""
    branches = [(piece, {})]
    for H in ids:
        th = P.theta(H)
        if th.is_zero():
            raise ValueError(f"divisor {H} contains the maximal contact subvariety")
        _, facs = factor_poly(th) if not th.is_constant() else (None, [])
        nb = []
        for p, chosen in branches:
            hits = [f for f, _ in facs if p.inside(_pull(P, p.chart, f))]
            if len(hits) == 1:
                nb.append((p, {**chosen, H: hits[0]}))
                continue
            if len(hits) > 1:
                raise ValueError(f"divisor {H} is singular along the locus")
            for f, _ in facs:
                q = p.meet([_pull(P, p.chart, f)])
                if not q.is_empty():
                    nb.append((q, {**chosen, H: f}))
        branches = nb
    return branches


def _stage(ctx: _Ctx, piece: Piece, P: Presentation, entries, ecal, incident, r) -> List[_Branch]:
    mu, argp = _max_ratio(piece, P)
    if argp.is_empty():
        return []
    if mu is INF:
        return [_Branch(InvariantWord(tuple(entries), INF), argp, incident)]
    if r == 1:
        if mu == 0:
            return []
        nexts = [(argp, mu, scale_pairs(P.pairs, mu))]
    else:
        nexts = []
        pairs = [MarkedPair(h, Fraction(m)) for h, m in P.pairs if not h.is_zero()]
        for sp, factors in _local_factor_split(argp, P, ecal):
            exps = {H: {i: h.divisibility(phi)[0] for i, (h, _) in enumerate(pairs)}
                    for H, phi in factors.items()}
            muH = {H: min(Fraction(exps[H][i]) / pairs[i].mu for i in range(len(pairs))) for H in factors}
            nu = mu - sum(muH.values(), Fraction(0))
            if nu < 0:
                raise ArithmeticError(f"negative companion difference at level {r}")
            if nu == 0:
                comp = min(sum((Fraction(exps[H][i]) for H in factors), Fraction(0)) / pairs[i].mu
                           for i in range(len(pairs)))
                w = InvariantWord(tuple(entries), ZERO, comp)
                nexts.append((sp, None, w))
                continue
            if any(v > 0 for v in muH.values()):
                divided = _divide_monomial(pairs, factors, exps)
            else:
                divided = pairs
            nexts.append((sp, nu, scale_pairs(divided, nu)))
    out = []
    for sp, nu, payload in nexts:
        if nu is None:
            out.append(_Branch(payload, sp, incident))
            continue
        prefix = tuple(entries) + (nu,)
        for hp, i in _history_split(ctx, sp, prefix):
            Er, s, rest = divisor_split(ecal, ctx.births, i)
            F = tuple(payload) + tuple(MarkedPair(P.theta(H), Fraction(1)) for H in Er)
            Q = Presentation(P.vars, P.psi, F, tuple((H, P.theta(H)) for H in rest), P.N)
            for cp, P2 in _contact(hp, Q, ctx.bounds):
                out.extend(_stage(ctx, cp, P2, prefix + (s,), rest, incident, r + 1))
    return _keep_max(out)


def _keep_max(branches: List[_Branch]) -> List[_Branch]:
    if not branches:
        return []
    best = branches[0].word
    for b in branches[1:]:
        if word_compare(b.word, best) > 0:
            best = b.word
    # strata are equimultiple loci of the word; the companion only breaks ties between years
    return [b for b in branches if word_compare(b.word, best, companion=False) == 0]


def _incidence_split(piece: Piece):
    branches = [(piece, ())]
    for did, eq in piece.chart.divisors:
        nb = []
        for p, inc in branches:
            pin = p.meet([eq])
            if not pin.is_empty():
                nb.append((pin, inc + (did,)))
            pout = p.avoid([eq])
            if not pout.is_empty():
                nb.append((pout, inc))
        branches = nb
    return branches


def stratify(gens: Sequence[Poly], chart: Chart, history=(), births=None, bounds: Bounds = Bounds(),
             piece: Optional[Piece] = None) -> List[_Branch]:
    """Branches of ``piece`` (default: the zero set of ``gens``) carrying the maximal word."""
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        raise ValueError("zero transform")
    births = dict(births or {})
    ctx = _Ctx(births, list(history), bounds)
    if piece is None:
        piece = Piece(chart).meet(list(gens))
    if piece.is_empty():
        return []
    out = []
    for p, inc in _incidence_split(piece):
        P = _chart_presentation(chart, [MarkedPair(g, Fraction(1)) for g in gens],
                                [(d, chart.divisor(d)) for d in inc])
        out.extend(_stage(ctx, p, P, (), list(inc), inc, 1))
    return _keep_max(out)


def invariant_at_point(gens, chart: Chart, history=(), a=None, births=None, bounds: Bounds = Bounds()) -> InvariantWord:
    """The invariant word at a rational point of the chart."""
    if isinstance(gens, Poly):
        gens = [gens]
    a = tuple(Fraction(x) for x in a)
    if len(a) != len(chart.vars):
        raise ValueError("point has the wrong number of coordinates")
    if any(o.evaluate(a) == 0 for o in chart.opens):
        raise ValueError("point is outside the chart")
    if any(g.evaluate(a) != 0 for g in gens):
        raise NotOnVariety(f"order 0 at {a}")
    bs = stratify(gens, chart, history, births, bounds, piece=Piece(chart, point=a))
    if not bs:
        raise NotOnVariety(f"order 0 at {a}")
    best = bs[0].word
    for b in bs[1:]:
        if word_compare(b.word, best) > 0:
            best = b.word
    return best


# ---------------------------------------------------------------------------
# wrappers around single steps


def maximal_contact(g: Poly, d: int, stratum: Sequence[Poly] = (), bound: int = 3, skip: int = 0):
    """``(images, N1, c)``: a linear change (images of the old variables), the
    contact equation ``d^{d-1} g / dx_c^{d-1}`` after the change, and the
    index c, such that ``d^d g/dx_c^d`` has no zero on V(stratum)."""
    if d < 1:
        raise ValueError("order must be positive")
    chart = Chart("_", 0, g.vars)
    piece = Piece(chart).meet(list(stratum))
    P = _chart_presentation(chart, [MarkedPair(g, Fraction(d))])
    found = 0
    for c, u in _witnesses(len(g.vars), bound):
        Q = _apply_change(P, c, u)
        D = Q.pairs[0].h.diff(c, d)
        if D.is_zero() or not piece.nowhere_zero(D):
            continue
        if found < skip:
            found += 1
            continue
        gens = Poly.gens(g.vars)
        images = [gens[w] + gens[c].scale(u[w]) if w in u else gens[w] for w in range(len(g.vars))]
        return images, Q.pairs[0].h.diff(c, d - 1), c
    raise WitnessNotFound(f"no maximal contact witness with coefficients <= {bound}")


def coefficient_pairs(g: Poly, d: int, N1: Poly, c: int) -> List[MarkedPair]:
    """``(d^q g/dx_c^q restricted to V(N1), d - q)`` for q < d - 1, zero pairs dropped."""
    chart = Chart("_", 0, g.vars)
    P = _chart_presentation(chart, [MarkedPair(g, Fraction(d))])
    _, facs = factor_poly(N1)
    if len(facs) != 1:
        raise ValueError("contact equation must be irreducible")
    sol = _solve(facs[0][0], c, Piece(chart), P)
    if sol is None:
        raise WitnessNotFound("contact equation is not a graph")
    v, a, rest = sol
    _, R = _restrictor(P, v, a, rest)
    out = []
    for q in range(d - 1):
        r = R(g.diff(c, q))
        if not r.is_zero():
            out.append(MarkedPair(r, Fraction(d - q)))
    return out


def recurse_presentation(P: Presentation, stratum: Piece, bounds: Bounds = Bounds()) -> Presentation:
    """One maximal contact cut on a single-branch stratum."""
    res = _contact(stratum, P, bounds)
    if len(res) != 1:
        raise ValueError(f"stratum splits into {len(res)} branches; pass a smaller stratum")
    return res[0][1]


# ---------------------------------------------------------------------------
# maximum locus


@dataclass
class StratumReport:
    word: Optional[InvariantWord]
    loci: Dict[str, List[Tuple[Poly, ...]]] = field(default_factory=dict)
    J: Tuple[str, ...] = ()
    smooth: bool = True
    components: Dict[str, List[Tuple[Poly, ...]]] = field(default_factory=dict)

    def to_json(self):
        return {
            "word": None if self.word is None else self.word.to_json(),
            "J": list(self.J),
            "smooth": self.smooth,
            "loci": {k: [[str(p) for p in c] for c in v] for k, v in sorted(self.loci.items())},
        }


def prime_components(gens: Sequence[Poly], opens: Sequence[Poly] = (), vars=None) -> List[Tuple[Poly, ...]]:
    """Reduced Groebner bases of the components of V(gens) off V(opens).

    Splits along factors of basis elements until every basis element is
    irreducible and square-free; components inside another are dropped.
    """
    gens = [g for g in gens if not g.is_zero()]
    if vars is None:
        vars = gens[0].vars
    if not gens:
        return [()]
    stack = [gens]
    found = []
    seen = set()
    while stack:
        I = stack.pop()
        if is_empty(I, opens, vars=vars):
            continue
        G = tuple(groebner(I).basis)
        if G in seen:
            continue
        seen.add(G)
        split = None
        for b in G:
            _, facs = factor_poly(b)
            if len(facs) > 1 or facs[0][1] > 1:
                split = (b, facs)
                break
        if split is None:
            found.append(G)
            continue
        b, facs = split
        rest = [x for x in G if x != b]
        for f, _ in reversed(facs):
            stack.append(rest + [f])
    found = sorted(set(found), key=lambda G: (len(G), [str(p) for p in G]))
    out = []
    for i, A in enumerate(found):
        # drop A if it lies inside another component B
        if any(j != i and _subset(A, B, opens, vars) and not (_subset(B, A, opens, vars) and j > i)
               for j, B in enumerate(found)):
            continue
        out.append(A)
    return out


def _subset(A, B, opens, vars):
    """V(A) inside V(B) (off V(opens))."""
    return all(is_empty(list(A), list(opens) + [b], vars=vars) for b in B)


def closure(piece: Piece) -> List[Poly]:
    opens = [o for o in piece.all_opens()]
    closed = list(piece.closed) or [Poly.zero(piece.vars)]
    if not opens:
        return list(groebner(closed).basis)
    return saturate(closed, product(opens, piece.vars))


def _J_key(J, births):
    return (tuple(-births[H] for H in sorted(J, key=lambda h: births[h])), tuple(sorted(J)))


def max_stratum(transforms: Dict[str, Sequence[Poly]], charts: Dict[str, Chart],
                histories: Dict[str, list] = None, births: Dict[str, int] = None,
                bounds: Bounds = Bounds()) -> StratumReport:
    """Maximal word over all charts and its locus, refined by J when the word ends in 0."""
    histories = histories or {}
    births = births or {}
    per = {}
    best = None
    for cid in sorted(charts):
        gens = [g for g in transforms[cid] if not g.is_zero()]
        if not gens or any(g.is_constant() for g in gens):
            continue
        bs = stratify(gens, charts[cid], histories.get(cid, ()), births, bounds)
        if not bs:
            continue
        per[cid] = bs
        for b in bs:
            if best is None or word_compare(b.word, best) > 0:
                best = b.word
    if best is None:
        return StratumReport(None)
    comps = {}
    for cid, bs in per.items():
        if word_compare(bs[0].word, best, companion=False) != 0:
            continue
        ch = charts[cid]
        cand = []
        for b in bs:
            cand.extend(prime_components(closure(b.piece), ch.opens, ch.vars))
        cand = _maximal(cand, ch)
        if cand:
            comps[cid] = cand
    J = ()
    loci = comps
    if best.terminal == 0:
        labelled = []
        for cid, cs in comps.items():
            ch = charts[cid]
            for K in cs:
                JZ = tuple(sorted(d for d, eq in ch.divisors if _subset(K, [eq], ch.opens, ch.vars)))
                labelled.append((cid, K, JZ))
        J = max((JZ for _, _, JZ in labelled), key=lambda x: _J_key(x, births))
        loci = {}
        for cid, K, JZ in labelled:
            if JZ == J:
                loci.setdefault(cid, []).append(K)
        best = best.with_J(J)
    smooth = True
    for cid, cs in loci.items():
        ch = charts[cid]
        n = len(ch.vars)
        for K in cs:
            q = n - dim_ideal(list(K))
            if not jacobian_smooth(list(K), q, opens=ch.opens):
                smooth = False
        for A, B in itertools.combinations(cs, 2):
            if not is_empty(list(A) + list(B), ch.opens, vars=ch.vars):
                smooth = False
    return StratumReport(best, loci, J, smooth, comps)


def _maximal(cands, chart):
    out = []
    uniq = []
    for K in cands:
        if not any(_subset(K, L, chart.opens, chart.vars) and _subset(L, K, chart.opens, chart.vars) for L in uniq):
            uniq.append(K)
    for i, K in enumerate(uniq):
        if any(j != i and _subset(K, L, chart.opens, chart.vars) for j, L in enumerate(uniq)):
            continue
        out.append(K)
    return out
