"""Affine charts, blowups along straightened centers, transforms and crossing checks.

A chart is affine space over its variables minus the zero sets of its
``opens``.  A child chart records its transition: one polynomial per parent
variable, written in the child's variables, optionally divided by a power of
a denominator that is one of the chart's opens.  Blowups are only ever
performed along coordinate subspaces; general smooth centers are first
straightened by a substitution that is invertible on the chart.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .ideals import (
    Ideal,
    contains,
    dim_ideal,
    groebner,
    is_empty,
    is_unit_ideal,
    jacobian_smooth,
)
from .polyring import Poly, VariableMismatch
from .words import InvariantWord

__all__ = [
    "Chart",
    "DivisorRecord",
    "Straightening",
    "CenterSpec",
    "YearRecord",
    "ResolutionTree",
    "StraighteningFailed",
    "InadmissibleCenter",
    "blowup",
    "straighten_center",
    "blow_up_component",
    "component_covers",
    "pullback",
    "strict_transform",
    "weak_transform_ideal",
    "update_divisors",
    "clean_opens",
    "nc_check",
    "snc_check",
]


class StraighteningFailed(ValueError):
    """No straightening substitution was found within the coefficient bound."""


class InadmissibleCenter(ValueError):
    """A center or divisor failed a smoothness or crossing certificate."""


@dataclass(frozen=True)
class Chart:
    id: str
    year: int
    vars: Tuple[str, ...]
    parent: Optional[str] = None
    transition: Tuple[Poly, ...] = ()
    divisors: Tuple[Tuple[str, Poly], ...] = ()
    opens: Tuple[Poly, ...] = ()
    den: Optional[Poly] = None
    den_exps: Tuple[int, ...] = ()

    def divisor(self, did):
        for d, eq in self.divisors:
            if d == did:
                return eq
        return None

    def divisor_ids(self):
        return [d for d, _ in self.divisors]

    def to_json(self):
        return {
            "id": self.id,
            "year": self.year,
            "vars": list(self.vars),
            "parent": self.parent,
            "transition": [p.to_json()["terms"] for p in self.transition],
            "divisors": [{"id": d, "eq": eq.to_json()["terms"]} for d, eq in self.divisors],
            "opens": [p.to_json()["terms"] for p in self.opens],
            "den": None if self.den is None else self.den.to_json()["terms"],
            "den_exps": list(self.den_exps),
        }

    @classmethod
    def from_json(cls, obj, parent_vars=None):
        vars = tuple(obj["vars"])

        def P(terms):
            return Poly.from_json({"vars": list(vars), "terms": terms})

        return cls(
            id=obj["id"],
            year=obj["year"],
            vars=vars,
            parent=obj.get("parent"),
            transition=tuple(P(t) for t in obj.get("transition", [])),
            divisors=tuple((d["id"], P(d["eq"])) for d in obj.get("divisors", [])),
            opens=tuple(P(t) for t in obj.get("opens", [])),
            den=None if obj.get("den") is None else P(obj["den"]),
            den_exps=tuple(obj.get("den_exps", ())),
        )


@dataclass
class DivisorRecord:
    id: str
    birth: int
    equations: Dict[str, Poly] = field(default_factory=dict)

    def to_json(self):
        return {
            "id": self.id,
            "birth": self.birth,
            "equations": {k: v.to_json() for k, v in sorted(self.equations.items())},
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["id"], obj["birth"], {k: Poly.from_json(v) for k, v in obj["equations"].items()})


@dataclass(frozen=True)
class Straightening:
    """``forward[i]`` is old variable i written in new coordinates; ``inverse`` the reverse.

    After the change the center is cut out by the new variables at ``indices``.
    With a denominator, old variable i is ``forward[i] / den**den_exps[i]``
    and the change is only valid where ``den`` does not vanish.
    """

    forward: Tuple[Poly, ...]
    inverse: Tuple[Poly, ...]
    indices: Tuple[int, ...]
    den: Optional[Poly] = None
    den_exps: Tuple[int, ...] = ()

    @classmethod
    def identity(cls, vars, indices):
        g = tuple(Poly.gens(vars))
        return cls(g, g, tuple(indices))

    def is_identity(self):
        vars = self.forward[0].vars
        return self.den is None and all(p == Poly.var(vars, i) for i, p in enumerate(self.forward))

    def apply(self, f: Poly) -> Poly:
        """``f`` in the new coordinates, up to a power of the denominator."""
        return compose_frac(f, self.forward, self.den, self.den_exps, self.forward[0].vars)

    def to_json(self):
        return {
            "forward": [p.to_json()["terms"] for p in self.forward],
            "inverse": [p.to_json()["terms"] for p in self.inverse],
            "indices": list(self.indices),
            "den": None if self.den is None else self.den.to_json()["terms"],
            "den_exps": list(self.den_exps),
        }


@dataclass(frozen=True)
class CenterSpec:
    """One chart's share of a year's center: a smooth component and its straightening."""

    chart: str
    ideal: Tuple[Poly, ...]
    straightening: Straightening
    separator: Optional[Poly] = None

    @property
    def q(self):
        return len(self.straightening.indices)

    def to_json(self):
        return {
            "chart": self.chart,
            "ideal": [p.to_json()["terms"] for p in self.ideal],
            "straightening": self.straightening.to_json(),
            "separator": None if self.separator is None else self.separator.to_json()["terms"],
        }


# ---------------------------------------------------------------------------
# transforms


def compose_frac(f: Poly, nums, den, exps, vars) -> Poly:
    """``den**E * f(nums_i / den**exps_i)`` with the least E making it a polynomial."""
    if den is None:
        return f.compose(nums, vars)
    groups: Dict[int, dict] = {}
    for e, c in f.terms.items():
        w = sum(a * k for a, k in zip(e, exps))
        groups.setdefault(w, {})[e] = c
    if not groups:
        return Poly.zero(vars)
    top = max(groups)
    out = Poly.zero(vars)
    for w, terms in groups.items():
        out = out + Poly(f.vars, terms).compose(nums, vars) * den ** (top - w)
    return out


def pullback(f: Poly, chart: Chart) -> Poly:
    """Express a parent-chart polynomial in this chart's coordinates.

    With a transition denominator the result is correct up to a power of
    it, which is a unit on the chart.
    """
    if chart.parent is None or not chart.transition:
        return f
    if f.nvars != len(chart.transition):
        raise VariableMismatch("polynomial does not live on the parent chart")
    return compose_frac(f, chart.transition, chart.den, chart.den_exps, chart.vars)


def strict_transform(f: Poly, chart: Chart, theta: Poly):
    """Pull ``f`` back into ``chart`` and divide out the largest power of ``theta``."""
    if f.is_zero():
        raise ValueError("strict transform of the zero polynomial")
    g = pullback(f, chart)
    if theta.is_constant():
        return g, 0
    d, q = g.divisibility(theta)
    return q, d


def weak_transform_ideal(I, chart: Chart, theta: Poly):
    """Pull back every generator and remove the common power of ``theta``."""
    gens = [g for g in (I.generators if isinstance(I, Ideal) else I) if not g.is_zero()]
    if not gens:
        raise ValueError("weak transform of the zero ideal")
    pulled = [pullback(g, chart) for g in gens]
    if theta.is_constant():
        return Ideal(pulled), 0
    mu = min(p.divisibility(theta)[0] for p in pulled)
    out = []
    for p in pulled:
        q = p
        for _ in range(mu):
            q = q.divexact(theta)
        out.append(q)
    return Ideal(out), mu


def clean_opens(opens: Sequence[Poly]) -> Tuple[Poly, ...]:
    out = []
    seen = set()
    for o in opens:
        if o.is_zero():
            raise ValueError("zero polynomial cannot be an open condition")
        if o.is_constant():
            continue
        o = o.primitive()
        if o not in seen:
            seen.add(o)
            out.append(o)
    return tuple(out)


# ---------------------------------------------------------------------------
# blowups


def _check_indices(chart: Chart, idx):
    n = len(chart.vars)
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate center coordinates {idx}")
    if not idx or any(not (0 <= i < n) for i in idx):
        raise ValueError(f"center coordinates {idx} out of range for {n} variables")


def blowup(chart: Chart, center_coords: Sequence[int], year: Optional[int] = None,
           new_divisor: Optional[str] = None, ids: Optional[Sequence[str]] = None) -> List[Chart]:
    """Blow up the coordinate subspace ``x_c = 0 (c in center_coords)``.

    Returns one chart per center coordinate.  In chart i the transition
    sends ``x_ci -> x_ci`` and ``x_cj -> x_ci * x_cj``; the exceptional
    divisor is ``x_ci`` (registered under ``new_divisor`` when given) and
    the old divisor equations are pulled back with the exceptional factor
    removed.  A single coordinate gives the identity.
    """
    idx = tuple(center_coords)
    _check_indices(chart, idx)
    vars = chart.vars
    year = chart.year + 1 if year is None else year
    ids = list(ids) if ids is not None else [f"{chart.id}/{k + 1}" for k in range(len(idx))]
    gens = Poly.gens(vars)
    out = []
    for k, ci in enumerate(idx):
        images = list(gens)
        for cj in idx:
            if cj != ci:
                images[cj] = gens[ci] * gens[cj]
        theta = gens[ci]
        child = Chart(ids[k], year, vars, chart.id, tuple(images))
        # the blowup maps are polynomial; a denominator of ``chart`` is not touched here
        divs = []
        for did, eq in chart.divisors:
            e = pullback(eq, child)
            if len(idx) > 1:
                e = e.divisibility(theta)[1]
            divs.append((did, e))
        opens = [pullback(o, child) for o in chart.opens]
        if len(idx) > 1:
            opens = [o.divisibility(theta)[1] for o in opens]
        if new_divisor is not None:
            divs.append((new_divisor, theta))
        out.append(Chart(child.id, year, vars, chart.id, tuple(images),
                         _live_divisors(divs, opens), clean_opens(opens)))
    return out


def _live_divisors(divs, opens):
    """Drop divisor equations that do not vanish anywhere on the chart."""
    out = []
    for did, eq in divs:
        if eq.is_constant() or is_empty([eq], opens, vars=eq.vars):
            continue
        out.append((did, eq))
    return tuple(out)


def blow_up_component(chart: Chart, spec: CenterSpec, year: int, new_divisor: str,
                      first_index: int = 1) -> List[Chart]:
    """Blow up along a straightened smooth component (restricted to ``spec.separator != 0``)."""
    st = spec.straightening
    opens = list(chart.opens)
    if spec.separator is not None:
        opens.append(spec.separator)
    mid = Chart(chart.id, chart.year, chart.vars, None, (), chart.divisors, clean_opens(opens))
    if not st.is_identity():
        new_opens = [st.apply(o) for o in opens]
        if st.den is not None:
            new_opens.append(st.den)
        mid = Chart(
            chart.id, chart.year, chart.vars, None, (),
            tuple((d, st.apply(e)) for d, e in chart.divisors),
            clean_opens(new_opens),
        )
    ids = [f"{chart.id}/{first_index + k}" for k in range(len(st.indices))]
    kids = blowup(mid, st.indices, year=year, new_divisor=new_divisor, ids=ids)
    out = []
    for kid in kids:
        trans = tuple(f.compose(kid.transition, kid.vars) for f in st.forward)
        den = None if st.den is None else st.den.compose(kid.transition, kid.vars)
        out.append(Chart(kid.id, year, kid.vars, chart.id, trans, kid.divisors, kid.opens,
                         den, st.den_exps if den is not None else ()))
    return out


def update_divisors(divisors: Dict[str, DivisorRecord], charts: Sequence[Chart],
                    new_id: Optional[str] = None, year: Optional[int] = None,
                    check: bool = True) -> Dict[str, DivisorRecord]:
    """Register per-chart equations of every divisor present in ``charts``.

    Creates the record for ``new_id`` (born in ``year``) if needed.  With
    ``check``, every equation must define a smooth hypersurface on its chart.
    """
    out = {k: DivisorRecord(v.id, v.birth, dict(v.equations)) for k, v in divisors.items()}
    if new_id is not None and new_id not in out:
        out[new_id] = DivisorRecord(new_id, year, {})
    for ch in charts:
        for did, eq in ch.divisors:
            if did not in out:
                raise ValueError(f"unknown divisor {did} in chart {ch.id}")
            if check and not jacobian_smooth([eq], 1, opens=ch.opens):
                raise InadmissibleCenter(f"divisor {did} is not smooth on chart {ch.id}: {eq}")
            out[did].equations[ch.id] = eq
    return out


# ---------------------------------------------------------------------------
# straightening


def _spiral(bound):
    yield 0
    for c in range(1, bound + 1):
        yield c
        yield -c


def _shears(n, bound):
    """Identity, then single elementary shears x_i -> x_i + c x_j in a fixed order."""
    yield ()
    for c in _spiral(bound):
        if c == 0:
            continue
        for i in range(n):
            for j in range(n):
                if i != j:
                    yield ((i, j, c),)


def _apply_shear(vars, shear):
    g = list(Poly.gens(vars))
    fwd = list(g)
    inv = list(g)
    for i, j, c in shear:
        fwd[i] = fwd[i] + fwd[j].scale(c)
        inv[i] = inv[i] - inv[j].scale(c)
    return tuple(fwd), tuple(inv)


def _same_ideal(A, B):
    return all(contains(B, a) for a in A) and all(contains(A, b) for b in B)


def straighten_center(chart: Chart, C, bound: int = 3) -> Straightening:
    """Find a substitution taking ``V(C)`` to a coordinate subspace.

    Tries an optional integer shear, then the reduced lex basis in every
    variable order; a basis of q elements each of the form
    ``u_i x_i + r_i`` with ``u_i, r_i`` free of the leading variables gives
    the triangular change ``y_i = u_i x_i + r_i``.  Constant ``u_i`` are
    preferred; otherwise the product of the ``u_i`` becomes a denominator
    and must not vanish on the center.  The result is verified by
    membership on the chart where the denominator is invertible.
    """
    gens = [g for g in (C.generators if isinstance(C, Ideal) else C) if not g.is_zero()]
    vars = chart.vars
    n = len(vars)
    if not gens or is_unit_ideal(gens):
        raise ValueError("empty or whole-space center")
    q = n - dim_ideal(gens)
    if not jacobian_smooth(gens, q, opens=chart.opens):
        raise InadmissibleCenter(f"center {[str(g) for g in gens]} is not smooth of codimension {q}")
    best = None
    for allow_den in (False, True):
        for shear in _shears(n, bound):
            sf, si = _apply_shear(vars, shear)
            sg = [g.compose(sf, vars) for g in gens]
            for perm in itertools.permutations(range(n)):
                basis = _lex_basis(sg, perm)
                found = _graph_form(basis, vars, allow_den)
                if found is None:
                    if best is None or len(basis) < len(best):
                        best = basis
                    continue
                if len(found[0]) != q:
                    continue
                st = _build_straightening(found, sf, si, vars)
                if st.den is not None and not is_empty(gens + [st.den], chart.opens, vars=vars):
                    continue
                if _verify_straightening(st, gens, chart.opens):
                    return st
    raise StraighteningFailed(
        f"no straightening of {[str(g) for g in gens]} with coefficients <= {bound}; "
        f"best lex basis {[str(b) for b in (best or [])]}"
    )


def _build_straightening(found, sf, si, vars):
    lead, units, tails = found
    g = Poly.gens(vars)
    n = len(vars)
    inner_i = list(g)
    for i, u, r in zip(lead, units, tails):
        inner_i[i] = g[i] * u + r
    inv = tuple(ii.compose(si, vars) for ii in inner_i)
    if all(u.is_constant() for u in units):
        inner_f = list(g)
        for i, u, r in zip(lead, units, tails):
            inner_f[i] = (g[i] - r).scale(1 / u.constant_term())
        fwd = tuple(s.compose(inner_f, vars) for s in sf)
        return Straightening(fwd, inv, tuple(sorted(lead)))
    den = Poly.const(vars, 1)
    for u in units:
        if not u.is_constant():
            den = den * u
    nums = list(g)
    exps = [0] * n
    for k, (i, u, r) in enumerate(zip(lead, units, tails)):
        if u.is_constant():
            nums[i] = (g[i] - r).scale(1 / u.constant_term())
            continue
        rest = Poly.const(vars, 1)
        for j, v in enumerate(units):
            if j != k and not v.is_constant():
                rest = rest * v
        nums[i] = (g[i] - r) * rest
        exps[i] = 1
    # the shear is linear and homogeneous, so it passes through the denominator
    fwd, fexps = [], []
    for s in sf:
        used = [m for m in range(n) if s.depends_on(m)]
        e = max((exps[m] for m in used), default=0)
        images = [nums[m] * den ** (e - exps[m]) if m in used else nums[m] for m in range(n)]
        fwd.append(s.compose(images, vars))
        fexps.append(e)
    return Straightening(tuple(fwd), inv, tuple(sorted(lead)), den, tuple(fexps))


def _verify_straightening(st, gens, opens):
    vars = st.forward[0].vars
    moved = [st.apply(h) for h in gens]
    target = [Poly.var(vars, i) for i in st.indices]
    if st.den is None:
        return _same_ideal(moved, target)
    from .ideals import saturate

    sat = saturate(moved, st.den)
    return all(contains(target, m) for m in moved) and all(contains(sat, t) for t in target)


def _lex_basis(gens, perm):
    vars = gens[0].vars
    pv = tuple(vars[i] for i in perm)
    G = groebner([g.embed(pv) for g in gens], order="lex")
    return [b.embed(vars) for b in G.basis]


def _graph_form(basis, vars, allow_den=False):
    """Match a reduced basis against ``u_i x_i + r_i`` with u_i, r_i free of all leading variables."""
    lead, units, tails = [], [], []
    for b in basis:
        cand = None
        for i in range(len(vars)):
            if b.degree_in(i) != 1:
                continue
            u = b.coeffs_in(i)[1]
            if not u.is_constant() and not allow_den:
                continue
            rest = b - Poly.var(vars, i) * u
            if not rest.depends_on(i):
                cand = (i, u, rest)
                if u.is_constant():
                    break
        if cand is None:
            return None
        lead.append(cand[0])
        units.append(cand[1])
        tails.append(cand[2])
    if len(set(lead)) != len(lead):
        return None
    for p in tails + units:
        if any(p.depends_on(i) for i in lead):
            return None
    return lead, units, tails


def component_covers(chart: Chart, components: Sequence[Sequence[Poly]]):
    """Principal opens on which exactly one component survives.

    For component i the opens are ``g != 0`` for g in generators of the
    intersection of the other components; together they cover the chart.
    """
    from .ideals import intersect

    if len(components) == 1:
        return [[(0, None)]]
    out = []
    for i in range(len(components)):
        others = [c for j, c in enumerate(components) if j != i]
        K = list(others[0])
        for c in others[1:]:
            K = intersect(K, list(c))
        seps = []
        for g in groebner(K).basis:
            if is_empty(list(components[i]), list(chart.opens) + [g], vars=chart.vars):
                continue
            seps.append((i, g))
        out.append(seps)
    return out


# ---------------------------------------------------------------------------
# crossing checks


def nc_check(f: Poly, chart: Chart, at=None) -> Optional[Dict[str, int]]:
    """Exponents k_H with ``f = u * prod theta_H^k_H`` and u nonvanishing on V(at).

    ``at`` is a list of polynomials (or an Ideal); ``None`` means the whole
    chart.  Returns ``None`` when f is not such a monomial times unit.
    """
    if f.is_zero():
        return None
    locus = [] if at is None else [g for g in (at.generators if isinstance(at, Ideal) else at) if not g.is_zero()]
    u = f
    exps = {}
    for did, eq in chart.divisors:
        if eq.is_constant():
            continue
        k, u = u.divisibility(eq)
        if k:
            exps[did] = k
    if not is_empty(locus + [u], chart.opens, vars=chart.vars):
        return None
    return exps


def snc_check(X, chart: Chart, divisors: Optional[Sequence[Tuple[str, Poly]]] = None) -> bool:
    """Jacobian certificate that X and all divisor subsets cross normally.

    ``X`` is a list with at most one generator (empty or unit means no
    hypersurface).  Every subset S of divisors must have ``X + S`` smooth of
    the expected codimension along its common zero locus on the chart.
    """
    xs = [g for g in (X.generators if isinstance(X, Ideal) else X) if not g.is_zero()]
    if any(g.is_constant() for g in xs):
        xs = []
    if len(xs) > 1:
        raise ValueError("snc_check expects a hypersurface")
    divs = [eq for _, eq in (chart.divisors if divisors is None else divisors) if not eq.is_constant()]
    for r in range(len(divs) + 1):
        for S in itertools.combinations(divs, r):
            gens = xs + list(S)
            if not gens:
                continue
            if not jacobian_smooth(gens, len(gens), opens=chart.opens):
                return False
    return True


# ---------------------------------------------------------------------------
# the tree


@dataclass
class YearRecord:
    year: int
    word: Optional[InvariantWord]
    centers: List[CenterSpec] = field(default_factory=list)
    children: Dict[str, List[str]] = field(default_factory=dict)
    new_divisor: Optional[str] = None
    origin: Dict[str, int] = field(default_factory=dict)

    @property
    def blowups(self):
        """Number of center components blown up with codimension >= 2."""
        return sum(1 for c in self.centers if c.q >= 2)

    def to_json(self):
        return {
            "year": self.year,
            "word": None if self.word is None else self.word.to_json(),
            "centers": [c.to_json() for c in self.centers],
            "children": {k: list(v) for k, v in sorted(self.children.items())},
            "new_divisor": self.new_divisor,
            "origin": dict(sorted(self.origin.items())),
        }


@dataclass
class ResolutionTree:
    mode: str
    vars: Tuple[str, ...]
    charts: Dict[str, Chart] = field(default_factory=dict)
    divisors: Dict[str, DivisorRecord] = field(default_factory=dict)
    years: List[YearRecord] = field(default_factory=list)
    transforms: Dict[str, List[Poly]] = field(default_factory=dict)
    leaves: List[str] = field(default_factory=list)
    input: List[Poly] = field(default_factory=list)
    final_word: Optional[InvariantWord] = None
    status: str = "running"
    error: Optional[str] = None
    # derived data (chart histories); never serialized
    memo: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def year(self):
        return len(self.years)

    def ancestors(self, cid):
        """Chart ids from ``cid`` back to its root (inclusive)."""
        out = [cid]
        while self.charts[out[-1]].parent is not None:
            out.append(self.charts[out[-1]].parent)
        return out

    def to_root(self, p: Poly, cid: str, upto: Optional[str] = None) -> Poly:
        """Pull a polynomial on ancestor ``upto`` (default the root) back to chart ``cid``."""
        chain = self.ancestors(cid)
        stop = chain[-1] if upto is None else upto
        path = chain[: chain.index(stop)]
        for c in reversed(path):
            p = pullback(p, self.charts[c])
        return p

    def map_point(self, cid: str, point, upto: Optional[str] = None):
        """Image of a point of ``cid`` in an ancestor chart."""
        pt = tuple(point)
        c = cid
        while c != upto and self.charts[c].parent is not None:
            ch = self.charts[c]
            if ch.den is None:
                pt = tuple(t.evaluate(pt) for t in ch.transition)
            else:
                d = ch.den.evaluate(pt)
                pt = tuple(t.evaluate(pt) / d ** k for t, k in zip(ch.transition, ch.den_exps))
            c = ch.parent
        return pt

    def blowup_count(self):
        """Years whose center has codimension >= 2 somewhere (one blowup per year)."""
        return sum(1 for y in self.years if y.blowups)

    def to_json(self):
        return {
            "mode": self.mode,
            "vars": list(self.vars),
            "input": [p.to_json() for p in self.input],
            "charts": [self.charts[k].to_json() for k in self.charts],
            "divisors": [self.divisors[k].to_json() for k in sorted(self.divisors)],
            "years": [y.to_json() for y in self.years],
            "transforms": {k: [p.to_json()["terms"] for p in v] for k, v in sorted(self.transforms.items())},
            "leaves": list(self.leaves),
            "final_word": None if self.final_word is None else self.final_word.to_json(),
            "status": self.status,
            "error": self.error,
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, obj):
        t = cls(obj["mode"], tuple(obj["vars"]))
        t.input = [Poly.from_json(p) for p in obj.get("input", [])]
        for c in obj["charts"]:
            ch = Chart.from_json(c)
            t.charts[ch.id] = ch
        for d in obj["divisors"]:
            r = DivisorRecord.from_json(d)
            t.divisors[r.id] = r
        for y in obj["years"]:
            specs = []
            for c in y["centers"]:
                ch = t.charts[c["chart"]]
                P = lambda terms, v=ch.vars: Poly.from_json({"vars": list(v), "terms": terms})
                st = c["straightening"]
                specs.append(CenterSpec(
                    c["chart"],
                    tuple(P(x) for x in c["ideal"]),
                    Straightening(tuple(P(x) for x in st["forward"]),
                                  tuple(P(x) for x in st["inverse"]), tuple(st["indices"]),
                                  None if st.get("den") is None else P(st["den"]),
                                  tuple(st.get("den_exps", ()))),
                    None if c["separator"] is None else P(c["separator"]),
                ))
            w = y.get("word")
            t.years.append(YearRecord(
                y["year"], None if w is None else InvariantWord.from_json(w), specs,
                {k: list(v) for k, v in y["children"].items()}, y.get("new_divisor"),
                dict(y.get("origin", {})),
            ))
        for k, v in obj["transforms"].items():
            vars = t.charts[k].vars
            t.transforms[k] = [Poly.from_json({"vars": list(vars), "terms": p}) for p in v]
        t.leaves = list(obj["leaves"])
        fw = obj.get("final_word")
        t.final_word = None if fw is None else InvariantWord.from_json(fw)
        t.status = obj.get("status", "running")
        t.error = obj.get("error")
        return t

    def to_dot(self, width: int = 40) -> str:
        def cut(s):
            s = str(s)
            return s if len(s) <= width else s[: width - 3] + "..."

        def q(s):
            return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'

        lines = ["digraph resolution {", "  rankdir=TB;", "  node [shape=box];"]
        for cid, ch in self.charts.items():
            tr = self.transforms.get(cid)
            label = f"{cid} (year {ch.year})"
            if tr:
                label += "\n" + cut(", ".join(str(p) for p in tr))
            if ch.divisors:
                label += "\n" + cut(" ".join(f"{d}:{e}" for d, e in ch.divisors))
            lines.append(f"  {q(cid)} [label={q(label)}];")
        for y in self.years:
            for parent, kids in sorted(y.children.items()):
                for k in kids:
                    ch = self.charts[k]
                    c = y.centers[y.origin[k]] if k in y.origin else None
                    if c is None:
                        lab = "id"
                    else:
                        lab = cut("C=(" + ", ".join(str(p) for p in c.ideal) + ")")
                        eq = ch.divisor(y.new_divisor) if y.new_divisor else None
                        if eq is not None:
                            lab += f"\n{y.new_divisor}={eq}"
                    lines.append(f"  {q(parent)} -> {q(k)} [label={q(lab)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"
