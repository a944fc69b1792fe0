"""Groebner bases and ideal-theoretic order computations.

Buchberger completion with the product and chain criteria, normal
selection strategy and a pair budget.  Everything downstream (emptiness of
varieties over the algebraic closure, saturations, orders along
subvarieties, Jacobian smoothness certificates) goes through
:func:`groebner`.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .polyring import INF, Poly, VariableMismatch, grevlex_key, lex_key

__all__ = [
    "BudgetExceeded",
    "GroebnerBasis",
    "Ideal",
    "groebner",
    "normal_form",
    "is_unit_ideal",
    "contains",
    "in_radical",
    "is_empty",
    "derivative_ideal",
    "derivative_generators",
    "max_order_on_variety",
    "order_along",
    "jacobian_smooth",
    "jacobian_minors",
    "dim_ideal",
    "saturate",
    "intersect",
    "eliminate",
    "s_polynomial",
]

DEFAULT_PAIR_BUDGET = 40000


class BudgetExceeded(RuntimeError):
    """A resource cap was hit before a mathematical answer was reached."""


@dataclass(frozen=True)
class Ideal:
    generators: Tuple[Poly, ...]

    def __init__(self, generators: Sequence[Poly], vars: Sequence[str] | None = None):
        gens = tuple(generators)
        if not gens:
            if vars is None:
                raise ValueError("an empty generator list needs explicit variables")
            gens = (Poly.zero(vars),)
        v0 = gens[0].vars
        for g in gens:
            if g.vars != v0:
                raise VariableMismatch(f"generators over {g.vars} and {v0}")
        object.__setattr__(self, "generators", gens)

    @property
    def vars(self):
        return self.generators[0].vars

    def __add__(self, other: "Ideal"):
        return Ideal(self.generators + tuple(other.generators))

    def nonzero(self):
        return tuple(g for g in self.generators if not g.is_zero())

    def to_json(self):
        return [g.to_json() for g in self.generators]

    @classmethod
    def from_json(cls, obj):
        return cls([Poly.from_json(p) for p in obj])


def _order_key(order, nvars):
    if order == "grevlex":
        return grevlex_key
    if order == "lex":
        return lex_key
    if isinstance(order, tuple) and order[0] == "elim":
        k = order[1]

        def key(e):
            return (grevlex_key(e[:k]), grevlex_key(e[k:]))

        return key
    raise ValueError(f"unknown monomial order {order!r}")


@dataclass(frozen=True)
class GroebnerBasis:
    basis: Tuple[Poly, ...]
    vars: Tuple[str, ...]
    order: object = "grevlex"
    reduced: bool = True

    def is_unit(self):
        return len(self.basis) == 1 and self.basis[0].is_constant() and not self.basis[0].is_zero()

    def is_zero_ideal(self):
        return not self.basis

    def leading_monomials(self):
        key = _order_key(self.order, len(self.vars))
        return [max(g.terms, key=key) for g in self.basis]

    def staircase_report(self):
        lms = self.leading_monomials()
        return {
            "basis": [str(g) for g in self.basis],
            "leading_monomials": [list(e) for e in lms],
        }


# ---------------------------------------------------------------------------
# Buchberger


class _Elem:
    __slots__ = ("terms", "lm", "lc", "deg")

    def __init__(self, terms, key):
        self.terms = terms
        self.lm = max(terms, key=key)
        self.lc = terms[self.lm]
        self.deg = sum(self.lm)


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _reduce(h: Dict, G: List[_Elem], key) -> Dict:
    """Full reduction of h modulo G; returns the remainder dict."""
    h = dict(h)
    rem = {}
    while h:
        e = max(h, key=key)
        c = h[e]
        for g in G:
            if _divides(g.lm, e):
                d = tuple(x - y for x, y in zip(e, g.lm))
                f = c / g.lc
                for ge, gc in g.terms.items():
                    k = tuple(x + y for x, y in zip(ge, d))
                    v = h.get(k, 0) - f * gc
                    if v:
                        h[k] = v
                    else:
                        h.pop(k, None)
                break
        else:
            rem[e] = c
            del h[e]
    return rem


def _spoly(a: _Elem, b: _Elem):
    l = _lcm(a.lm, b.lm)
    da = tuple(x - y for x, y in zip(l, a.lm))
    db = tuple(x - y for x, y in zip(l, b.lm))
    out = {}
    for e, c in a.terms.items():
        k = tuple(x + y for x, y in zip(e, da))
        out[k] = out.get(k, 0) + c / a.lc
    for e, c in b.terms.items():
        k = tuple(x + y for x, y in zip(e, db))
        v = out.get(k, 0) - c / b.lc
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return {k: v for k, v in out.items() if v}


def _buchberger(polys: List[Dict], nvars, key, budget):
    G: List[_Elem] = []
    pairs = set()
    done = set()

    def add(h):
        t = len(G)
        G.append(_Elem(h, key))
        for i in range(t):
            if G[i] is None:
                continue
            pairs.add((i, t))

    for p in polys:
        if not p:
            continue
        r = _reduce(p, [g for g in G if g is not None], key)
        if r:
            if not any(r):
                pass
            add(r)
            if len(r) == 1 and not any(next(iter(r))):
                return [G[-1]]

    steps = 0
    while pairs:
        steps += 1
        if steps > budget:
            raise BudgetExceeded(f"Buchberger pair budget {budget} exhausted")
        i, j = min(
            pairs,
            key=lambda ij: (sum(_lcm(G[ij[0]].lm, G[ij[1]].lm)), key(_lcm(G[ij[0]].lm, G[ij[1]].lm)), ij),
        )
        pairs.discard((i, j))
        done.add((i, j))
        a, b = G[i], G[j]
        l = _lcm(a.lm, b.lm)
        # product criterion
        if all(x == 0 or y == 0 for x, y in zip(a.lm, b.lm)):
            continue
        # chain criterion
        skip = False
        for k, g in enumerate(G):
            if k in (i, j) or g is None:
                continue
            if _divides(g.lm, l):
                p1 = (min(i, k), max(i, k))
                p2 = (min(j, k), max(j, k))
                if p1 not in pairs and p2 not in pairs:
                    skip = True
                    break
        if skip:
            continue
        s = _spoly(a, b)
        if not s:
            continue
        r = _reduce(s, [g for g in G if g is not None], key)
        if r:
            add(r)
            if len(r) == 1 and not any(next(iter(r))):
                return [G[-1]]
    return [g for g in G if g is not None]


def _interreduce(G: List[_Elem], key) -> List[Dict]:
    # minimal basis
    elems = sorted(G, key=lambda g: key(g.lm))
    minimal: List[_Elem] = []
    for g in elems:
        if not any(_divides(h.lm, g.lm) for h in minimal):
            minimal.append(g)
    out = []
    for idx, g in enumerate(minimal):
        others = [h for k, h in enumerate(minimal) if k != idx]
        tail = {e: c for e, c in g.terms.items() if e != g.lm}
        r = _reduce(tail, others, key)
        r[g.lm] = g.lc
        lc = g.lc
        out.append({e: c / lc for e, c in r.items()})
    out.sort(key=lambda t: key(max(t, key=key)), reverse=True)
    return out


@functools.lru_cache(maxsize=4096)
def _groebner_cached(gens: Tuple[Poly, ...], order, budget):
    vars = gens[0].vars
    key = _order_key(order, len(vars))
    polys = [dict(g.terms) for g in gens if not g.is_zero()]
    if not polys:
        return GroebnerBasis((), vars, order)
    G = _buchberger(polys, len(vars), key, budget)
    red = _interreduce(G, key)
    return GroebnerBasis(tuple(Poly._raw(vars, t) for t in red), vars, order)


def _as_gens(I) -> Tuple[Poly, ...]:
    if isinstance(I, Ideal):
        return I.generators
    if isinstance(I, Poly):
        return (I,)
    if isinstance(I, GroebnerBasis):
        return I.basis if I.basis else (Poly.zero(I.vars),)
    gens = tuple(I)
    if not gens:
        raise ValueError("empty generator list")
    return gens


def groebner(I, order="grevlex", budget: int = DEFAULT_PAIR_BUDGET) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``I``."""
    gens = _as_gens(I)
    v0 = gens[0].vars
    for g in gens:
        if g.vars != v0:
            raise VariableMismatch(f"generators over {g.vars} and {v0}")
    # canonical generator order keeps the cache and the pair selection deterministic
    uniq = tuple(sorted(set(g.monic() for g in gens if not g.is_zero()), key=_poly_sort_key))
    if not uniq:
        return GroebnerBasis((), v0, order)
    return _groebner_cached(uniq, order, budget)


def _poly_sort_key(p: Poly):
    return tuple((grevlex_key(e), c.numerator, c.denominator) for e, c in p.sorted_terms())


def normal_form(p: Poly, G: GroebnerBasis) -> Poly:
    if p.vars != G.vars:
        raise VariableMismatch(f"{p.vars} vs {G.vars}")
    if not G.basis:
        return p
    key = _order_key(G.order, len(G.vars))
    elems = [_Elem(dict(g.terms), key) for g in G.basis]
    return Poly._raw(p.vars, _reduce(p.terms, elems, key))


def s_polynomial(f: Poly, g: Poly, order="grevlex") -> Poly:
    key = _order_key(order, f.nvars)
    return Poly._raw(f.vars, _spoly(_Elem(dict(f.terms), key), _Elem(dict(g.terms), key)))


def is_unit_ideal(I) -> bool:
    return groebner(I).is_unit()


def contains(I, p: Poly) -> bool:
    return normal_form(p, groebner(I)).is_zero()


# ---------------------------------------------------------------------------
# auxiliary-variable constructions


def _fresh(vars, base="_t"):
    name = base
    k = 0
    while name in vars:
        k += 1
        name = f"{base}{k}"
    return name


def is_empty(closed: Sequence[Poly], opens: Sequence[Poly] = (), vars=None) -> bool:
    """Is ``V(closed) minus V(prod opens)`` empty over the algebraic closure?"""
    closed = [c for c in closed if not c.is_zero()]
    opens = [o for o in opens]
    if vars is None:
        vars = (closed or opens)[0].vars
    vars = tuple(vars)
    if any(c.is_constant() for c in closed):
        return True
    if any(o.is_zero() for o in opens):
        return True
    opens = [o for o in opens if not o.is_constant()]
    if not opens:
        if not closed:
            return False
        return is_unit_ideal(closed)
    t = _fresh(vars)
    nv = (t,) + vars
    f = Poly.const(nv, 1)
    for o in opens:
        f = f * o.embed(nv)
    gens = [c.embed(nv) for c in closed] + [Poly.var(nv, t) * f - 1]
    return is_unit_ideal(gens)


def in_radical(I, f: Poly) -> bool:
    """``f`` vanishes on V(I) (over the algebraic closure)."""
    return is_empty(_as_gens(I), [f])


def eliminate(I, elim_vars: Sequence[str]) -> List[Poly]:
    """Generators of ``I`` intersected with the ring without ``elim_vars``."""
    gens = _as_gens(I)
    vars = gens[0].vars
    elim = [v for v in vars if v in elim_vars]
    rest = [v for v in vars if v not in elim_vars]
    nv = tuple(elim + rest)
    G = groebner([g.embed(nv) for g in gens], order=("elim", len(elim)))
    out = []
    for g in G.basis:
        if not any(g.depends_on(v) for v in elim):
            out.append(g.drop(tuple(rest)))
    return out


def saturate(I, f: Poly) -> List[Poly]:
    """Generators of ``I : f^infinity``."""
    gens = _as_gens(I)
    vars = gens[0].vars
    if f.is_constant():
        return list(groebner(gens).basis) or [Poly.zero(vars)]
    t = _fresh(vars)
    nv = (t,) + vars
    aux = [g.embed(nv) for g in gens] + [Poly.var(nv, t) * f.embed(nv) - 1]
    out = eliminate(aux, [t])
    return out or [Poly.zero(vars)]


def intersect(I, J) -> List[Poly]:
    gi, gj = _as_gens(I), _as_gens(J)
    vars = gi[0].vars
    t = _fresh(vars)
    nv = (t,) + vars
    T = Poly.var(nv, t)
    aux = [T * g.embed(nv) for g in gi] + [(1 - T) * g.embed(nv) for g in gj]
    out = eliminate(aux, [t])
    return out or [Poly.zero(vars)]


# ---------------------------------------------------------------------------
# orders


def derivative_generators(g: Poly, order: int, over: Sequence[int] | None = None) -> List[Poly]:
    """All partial derivatives of g of total order exactly ``order``."""
    idx = list(range(g.nvars)) if over is None else list(over)
    out = []
    for combo in itertools.combinations_with_replacement(idx, order):
        d = g
        for i in combo:
            d = d.diff(i)
            if d.is_zero():
                break
        if not d.is_zero():
            out.append(d)
    return out


def derivative_ideal(g: Poly, s: int) -> Ideal:
    """Partial derivatives of g of total order at most ``s - 1``."""
    if s < 1:
        raise ValueError("s must be >= 1")
    gens = []
    seen = set()
    for k in range(s):
        for d in derivative_generators(g, k):
            if d not in seen:
                seen.add(d)
                gens.append(d)
    return Ideal(gens, vars=g.vars)


def max_order_on_variety(g: Poly, D=None, opens: Sequence[Poly] = ()) -> int:
    """Largest d such that g has order >= d somewhere on V(D)."""
    if g.is_zero():
        raise ValueError("the zero polynomial has infinite order everywhere")
    base = [] if D is None else [p for p in _as_gens(D) if not p.is_zero()]
    d = 0
    while True:
        cand = derivative_ideal(g, d + 1).nonzero()
        if is_empty(base + list(cand), opens, vars=g.vars):
            return d
        d += 1


def order_along(h: Poly, N, a: Sequence, kmax: int = 64):
    """Largest k <= kmax with h in N + m_a^k; INF when h lies in N."""
    gens = [p for p in _as_gens(N)] if N is not None else [Poly.zero(h.vars)]
    vars = h.vars
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    for p in gens:
        if p.evaluate(a) != 0:
            raise ValueError(f"point {tuple(map(str, a))} is not on V(N)")
    if contains(gens, h):
        return INF
    lin = [Poly.var(vars, i) - Fraction(x) for i, x in enumerate(a)]
    k = 0
    while k < kmax:
        mono = []
        for combo in itertools.combinations_with_replacement(range(len(vars)), k + 1):
            m = Poly.const(vars, 1)
            for i in combo:
                m = m * lin[i]
            mono.append(m)
        if not contains(gens + mono, h):
            return k
        k += 1
    raise BudgetExceeded(f"order along N exceeds kmax={kmax} without h lying in N")


def jacobian_minors(gens: Sequence[Poly], size: int) -> List[Poly]:
    n = gens[0].nvars
    J = [[g.diff(i) for i in range(n)] for g in gens]
    out = []
    for rows in itertools.combinations(range(len(gens)), size):
        for cols in itertools.combinations(range(n), size):
            m = _poly_det([[J[r][c] for c in cols] for r in rows], gens[0].vars)
            if not m.is_zero():
                out.append(m)
    return out


def _poly_det(M, vars):
    n = len(M)
    if n == 0:
        return Poly.const(vars, 1)
    if n == 1:
        return M[0][0]
    total = Poly.zero(vars)
    for c in range(n):
        if M[0][c].is_zero():
            continue
        minor = [row[:c] + row[c + 1:] for row in M[1:]]
        term = M[0][c] * _poly_det(minor, vars)
        total = total + term if c % 2 == 0 else total - term
    return total


def jacobian_smooth(I, codim: int, D=None, opens: Sequence[Poly] = ()) -> bool:
    """Jacobian certificate: V(I) is smooth of codimension ``codim`` along V(D).

    True iff no point of V(I + D) (off V(opens)) has all codim x codim
    Jacobian minors of the generators vanishing.  Nonreduced generators fail.
    """
    gens = [g for g in _as_gens(I) if not g.is_zero()]
    vars = _as_gens(I)[0].vars
    extra = [] if D is None else [g for g in _as_gens(D) if not g.is_zero()]
    if codim == 0:
        return not gens
    if len(gens) < codim:
        return is_empty(gens + extra, opens, vars=vars)
    minors = jacobian_minors(gens, codim)
    return is_empty(gens + extra + minors, opens, vars=vars)


def dim_ideal(I) -> int:
    """Krull dimension via a maximal independent set of the leading-term staircase."""
    G = groebner(I)
    vars = G.vars
    if G.is_unit():
        raise ValueError("the unit ideal has no dimension")
    lms = G.leading_monomials()
    n = len(vars)
    for size in range(n, -1, -1):
        for U in itertools.combinations(range(n), size):
            Us = set(U)
            if all(any(e[i] for i in range(n) if i not in Us) for e in lms):
                return size
    return 0
