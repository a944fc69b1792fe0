"""Exact multivariate polynomials over the rationals.

A :class:`Poly` carries its own ordered variable list; arithmetic between
polynomials over different variable lists is an error.  Coefficients are
:class:`fractions.Fraction` and nothing in here touches floating point.
"""

from __future__ import annotations

import functools
import math
import re
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Sequence, Tuple

Exp = Tuple[int, ...]

__all__ = [
    "INF",
    "Poly",
    "VariableMismatch",
    "grevlex_key",
    "lex_key",
    "parse_poly",
    "parse_rational",
    "format_rational",
    "taylor_shift",
    "order_at_point",
    "linear_change",
    "partial_derivative",
    "vp",
    "domain_member",
    "factor_poly",
    "squarefree_part",
    "product",
]


class _Infinity:
    """Order-theoretic infinity: strictly above every rational number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    __str__ = __repr__

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("resolvesing.INF")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


class VariableMismatch(ValueError):
    pass


def grevlex_key(e: Exp):
    return (sum(e), tuple(-x for x in reversed(e)))


def lex_key(e: Exp):
    return e


def parse_rational(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(str(s).strip())


def format_rational(r: Fraction) -> str:
    r = Fraction(r)
    return f"{r.numerator}/{r.denominator}"


def _coerce(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class Poly:
    """Immutable polynomial with exact rational coefficients."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Mapping[Exp, Fraction] | None = None):
        self.vars = tuple(vars)
        n = len(self.vars)
        clean: Dict[Exp, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} has wrong length for {self.vars}")
                c = _coerce(c)
                if c:
                    clean[tuple(e)] = c
        self.terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def _raw(cls, vars, terms):
        p = object.__new__(cls)
        p.vars = vars
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, vars):
        return cls(vars)

    @classmethod
    def const(cls, vars, c):
        vars = tuple(vars)
        return cls(vars, {(0,) * len(vars): _coerce(c)})

    @classmethod
    def var(cls, vars, name_or_index):
        vars = tuple(vars)
        i = vars.index(name_or_index) if isinstance(name_or_index, str) else name_or_index
        e = [0] * len(vars)
        e[i] = 1
        return cls(vars, {tuple(e): Fraction(1)})

    @classmethod
    def gens(cls, vars):
        return [cls.var(vars, i) for i in range(len(tuple(vars)))]

    # -- basic predicates -------------------------------------------------
    @property
    def nvars(self):
        return len(self.vars)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def total_degree(self):
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def low_degree(self):
        """Least total degree of a term; INF for the zero polynomial."""
        if not self.terms:
            return INF
        return min(sum(e) for e in self.terms)

    def degree_in(self, i):
        if isinstance(i, str):
            i = self.vars.index(i)
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def depends_on(self, i):
        if isinstance(i, str):
            i = self.vars.index(i)
        return any(e[i] for e in self.terms)

    def sorted_terms(self, key=grevlex_key):
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def leading_term(self, key=grevlex_key):
        e = max(self.terms, key=key)
        return e, self.terms[e]

    # -- equality / hashing ----------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_term() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # -- arithmetic --------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Poly):
            if other.vars != self.vars:
                raise VariableMismatch(f"{self.vars} vs {other.vars}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.vars, other)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly._raw(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other - self

    def scale(self, c):
        c = _coerce(c)
        if not c:
            return Poly._raw(self.vars, {})
        return Poly._raw(self.vars, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._lift(other)
        if other is None:
            return NotImplemented
        out: Dict[Exp, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return Poly._raw(self.vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("power must be a natural number")
        result = Poly.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def mul_term(self, e: Exp, c: Fraction):
        return Poly._raw(
            self.vars, {tuple(a + b for a, b in zip(k, e)): v * c for k, v in self.terms.items()}
        )

    def monic(self, key=grevlex_key):
        if not self.terms:
            return self
        _, c = self.leading_term(key)
        return self.scale(1 / c)

    def primitive(self):
        """Scale to integer coefficients with positive leading term and content 1."""
        if not self.terms:
            return self
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        nums = [int(c * den) for c in self.terms.values()]
        g = 0
        for v in nums:
            g = math.gcd(g, v)
        _, lc = self.leading_term()
        s = 1 if lc > 0 else -1
        return self.scale(Fraction(den * s, g))

    # -- calculus / substitution ---------------------------------------
    def diff(self, i, k: int = 1):
        if isinstance(i, str):
            i = self.vars.index(i)
        if i < 0 or i >= self.nvars:
            raise IndexError(f"variable index {i} out of range")
        if k < 0:
            raise ValueError("derivative order must be >= 0")
        if k == 0:
            return self
        out = {}
        for e, c in self.terms.items():
            a = e[i]
            if a < k:
                continue
            f = 1
            for j in range(k):
                f *= a - j
            ne = e[:i] + (a - k,) + e[i + 1:]
            out[ne] = out.get(ne, 0) + c * f
        return Poly(self.vars, out)

    def __call__(self, *point):
        return self.evaluate(point)

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError(f"point of dimension {len(point)} for {self.nvars} variables")
        pt = [Fraction(x) for x in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, a in zip(pt, e):
                if a:
                    v *= x ** a
            total += v
        return total

    def subs(self, mapping: Mapping[str, "Poly"], new_vars: Sequence[str] | None = None):
        """Substitute polynomials (over ``new_vars``) for variables.

        Variables absent from ``mapping`` are sent to the same-named variable
        of ``new_vars``, which must then contain it.
        """
        new_vars = tuple(new_vars) if new_vars is not None else self.vars
        images = []
        for v in self.vars:
            if v in mapping:
                img = mapping[v]
                if isinstance(img, (int, Fraction)):
                    img = Poly.const(new_vars, img)
                if img.vars != new_vars:
                    raise VariableMismatch(f"image of {v} over {img.vars}, expected {new_vars}")
                images.append(img)
            else:
                images.append(Poly.var(new_vars, v))
        return self.compose(images, new_vars)

    def compose(self, images: Sequence["Poly"], new_vars: Sequence[str]):
        new_vars = tuple(new_vars)
        if len(images) != self.nvars:
            raise ValueError("one image per variable required")
        cache = [dict() for _ in images]

        def power(i, a):
            c = cache[i]
            if a not in c:
                if a == 0:
                    c[a] = Poly.const(new_vars, 1)
                elif a == 1:
                    c[a] = images[i]
                else:
                    h = a // 2
                    c[a] = power(i, h) * power(i, a - h)
            return c[a]

        out: Dict[Exp, Fraction] = {}
        for e, c in self.terms.items():
            t = Poly.const(new_vars, c)
            for i, a in enumerate(e):
                if a:
                    t = t * power(i, a)
            for k, v in t.terms.items():
                s = out.get(k, 0) + v
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return Poly._raw(new_vars, out)

    def rename(self, new_vars: Sequence[str]):
        new_vars = tuple(new_vars)
        if len(new_vars) != self.nvars:
            raise ValueError("rename needs one name per variable")
        return Poly._raw(new_vars, dict(self.terms))

    def embed(self, new_vars: Sequence[str]):
        """Re-express over a variable list that contains all of ours."""
        new_vars = tuple(new_vars)
        idx = [new_vars.index(v) for v in self.vars]
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(new_vars)
            for i, a in zip(idx, e):
                ne[i] = a
            out[tuple(ne)] = c
        return Poly._raw(new_vars, out)

    def drop(self, new_vars: Sequence[str]):
        """Re-express over a sub-list of variables (others must not occur)."""
        new_vars = tuple(new_vars)
        idx = [self.vars.index(v) for v in new_vars]
        keep = set(idx)
        out = {}
        for e, c in self.terms.items():
            if any(a for i, a in enumerate(e) if i not in keep):
                raise ValueError(f"polynomial depends on a dropped variable: {self}")
            out[tuple(e[i] for i in idx)] = c
        return Poly._raw(new_vars, out)

    def coeffs_in(self, i) -> Dict[int, "Poly"]:
        """Coefficients as a polynomial in variable ``i`` (other variables kept)."""
        if isinstance(i, str):
            i = self.vars.index(i)
        out: Dict[int, Dict[Exp, Fraction]] = {}
        for e, c in self.terms.items():
            ne = e[:i] + (0,) + e[i + 1:]
            out.setdefault(e[i], {})[ne] = c
        return {k: Poly._raw(self.vars, v) for k, v in out.items()}

    # -- division ---------------------------------------------------------
    def divexact(self, q: "Poly"):
        """Exact quotient ``self / q`` or ``None`` when ``q`` does not divide."""
        q = self._lift(q)
        if q.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero():
            return self
        le, lc = q.leading_term()
        rem = dict(self.terms)
        quot: Dict[Exp, Fraction] = {}
        qterms = list(q.terms.items())
        while rem:
            e = max(rem, key=grevlex_key)
            c = rem[e]
            d = tuple(a - b for a, b in zip(e, le))
            if any(x < 0 for x in d):
                return None
            f = c / lc
            quot[d] = f
            for qe, qc in qterms:
                k = tuple(a + b for a, b in zip(qe, d))
                v = rem.get(k, 0) - f * qc
                if v:
                    rem[k] = v
                else:
                    rem.pop(k, None)
        return Poly._raw(self.vars, quot)

    def divisibility(self, q: "Poly", limit: int | None = None):
        """Largest ``d`` with ``q**d`` dividing self, and the cofactor."""
        if self.is_zero():
            raise ValueError("divisibility order of the zero polynomial is infinite")
        if q.is_constant():
            raise ValueError("divisibility by a constant is unbounded")
        d, cur = 0, self
        while limit is None or d < limit:
            nxt = cur.divexact(q)
            if nxt is None:
                break
            cur, d = nxt, d + 1
        return d, cur

    # -- printing -------------------------------------------------------
    def __repr__(self):
        return f"Poly({str(self)!r}, vars={list(self.vars)})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                (v if a == 1 else f"{v}^{a}") for v, a in zip(self.vars, e) if a
            )
            ac = abs(c)
            cs = str(ac.numerator) if ac.denominator == 1 else f"{ac.numerator}/{ac.denominator}"
            if mono:
                body = mono if ac == 1 else f"{cs}*{mono}"
            else:
                body = cs
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    # -- serialization ------------------------------------------------
    def to_json(self):
        return {
            "vars": list(self.vars),
            "terms": [
                {"coef": format_rational(c), "exps": list(e)} for e, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, obj):
        vars = tuple(obj["vars"])
        if len(set(vars)) != len(vars):
            raise ValueError("duplicate variable names")
        terms = {}
        for t in obj["terms"]:
            e = tuple(int(a) for a in t["exps"])
            if len(e) != len(vars) or any(a < 0 for a in e):
                raise ValueError(f"bad exponent tuple {t['exps']}")
            if e in terms:
                raise ValueError(f"duplicate exponent tuple {list(e)}")
            c = parse_rational(t["coef"])
            if c == 0:
                raise ValueError("zero coefficient in serialized polynomial")
            terms[e] = c
        return cls(vars, terms)


# ---------------------------------------------------------------------------
# text parser

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def parse_poly(text: str, vars: Sequence[str]) -> Poly:
    """Parse ``"y^2 - x^3 + 1/2*x"`` over the given variables."""
    vars = tuple(vars)
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {text[pos:]!r}")
        pos = m.end()
        num, name, op = m.groups()
        if num is not None:
            toks.append(("num", int(num)))
        elif name is not None:
            if name not in vars:
                raise ValueError(f"unknown variable {name!r}; expected one of {vars}")
            toks.append(("var", name))
        else:
            toks.append(("op", "^" if op == "**" else op))
    toks.append(("end", None))
    i = 0

    def peek():
        return toks[i]

    def take():
        nonlocal i
        t = toks[i]
        i += 1
        return t

    def expr():
        neg = False
        if peek() == ("op", "-"):
            take()
            neg = True
        elif peek() == ("op", "+"):
            take()
        acc = term()
        if neg:
            acc = -acc
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            t = term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term():
        acc = power()
        while True:
            if peek() == ("op", "*"):
                take()
                acc = acc * power()
            elif peek() == ("op", "/"):
                take()
                d = power()
                if not d.is_constant() or d.is_zero():
                    raise ValueError("division only by nonzero constants")
                acc = acc.scale(1 / d.constant_term())
            elif peek()[0] in ("num", "var") or peek() == ("op", "("):
                acc = acc * power()
            else:
                return acc

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            t = take()
            if t[0] != "num":
                raise ValueError("exponent must be a natural number")
            base = base ** t[1]
        return base

    def atom():
        t = take()
        if t[0] == "num":
            return Poly.const(vars, t[1])
        if t[0] == "var":
            return Poly.var(vars, t[1])
        if t == ("op", "("):
            e = expr()
            if take() != ("op", ")"):
                raise ValueError("unbalanced parentheses")
            return e
        if t == ("op", "-"):
            return -power()
        raise ValueError(f"unexpected token {t[1]!r}")

    result = expr()
    if peek()[0] != "end":
        raise ValueError(f"trailing input at token {peek()[1]!r}")
    return result


# ---------------------------------------------------------------------------
# module-level operations


def partial_derivative(p: Poly, var_index: int, order: int = 1) -> Poly:
    return p.diff(var_index, order)


def taylor_shift(p: Poly, a: Sequence) -> Poly:
    """``q`` with ``q(x) = p(x + a)``."""
    if len(a) != p.nvars:
        raise ValueError(f"point of dimension {len(a)} for {p.nvars} variables")
    images = [Poly.var(p.vars, i) + Fraction(x) for i, x in enumerate(a)]
    return p.compose(images, p.vars)


def order_at_point(p: Poly, a: Sequence):
    if len(a) != p.nvars:
        raise ValueError(f"point of dimension {len(a)} for {p.nvars} variables")
    if p.is_zero():
        return INF
    if p.evaluate(a) != 0:
        return 0
    return taylor_shift(p, a).low_degree()


def _det(m):
    m = [list(map(Fraction, row)) for row in m]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return det


def linear_change(p: Poly, U) -> Poly:
    """Compose with the substitution ``x -> U x``."""
    n = p.nvars
    if len(U) != n or any(len(row) != n for row in U):
        raise ValueError("matrix must be square of the ambient dimension")
    if _det(U) == 0:
        raise ValueError("singular coordinate change")
    gens = Poly.gens(p.vars)
    images = []
    for row in U:
        img = Poly.zero(p.vars)
        for c, g in zip(row, gens):
            if c:
                img = img + g.scale(Fraction(c))
        images.append(img)
    return p.compose(images, p.vars)


@functools.lru_cache(maxsize=256)
def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def vp(r, prime: int):
    """p-adic valuation; INF for zero."""
    if not _is_prime(prime):
        raise ValueError(f"{prime} is not prime")
    r = Fraction(r)
    if r == 0:
        return INF
    v = 0
    n, d = r.numerator, r.denominator
    while n % prime == 0:
        n //= prime
        v += 1
    while d % prime == 0:
        d //= prime
        v -= 1
    return v


def domain_member(a: Sequence, k: int, l: int, prime: int) -> bool:
    """Membership in (closed unit ball)^k x (open unit ball)^l for the p-adic norm."""
    if len(a) != k + l:
        raise ValueError(f"point of dimension {len(a)} for signature ({k}, {l})")
    closed = all(vp(x, prime) >= 0 for x in a[:k])
    opened = all(vp(x, prime) >= 1 for x in a[k:])
    return closed and opened


def product(polys: Iterable[Poly], vars) -> Poly:
    out = Poly.const(vars, 1)
    for p in polys:
        out = out * p
    return out


# ---------------------------------------------------------------------------
# factorization (delegated to sympy's multivariate factoring over QQ)


def _to_sympy(p: Poly):
    import sympy

    gens = sympy.symbols(p.vars) if p.vars else ()
    dom = sympy.QQ
    rep = {e: dom.convert(sympy.Rational(c.numerator, c.denominator)) for e, c in p.terms.items()}
    return sympy.Poly.from_dict(rep, *gens, domain=dom) if p.vars else None


def _from_sympy(sp, vars) -> Poly:
    terms = {}
    for e, c in sp.terms():
        c = Fraction(int(c.numerator), int(c.denominator))
        terms[tuple(int(a) for a in e)] = c
    return Poly(vars, terms)


def factor_poly(p: Poly):
    """Irreducible factors over QQ: ``(constant, [(factor, multiplicity), ...])``.

    Factors are normalized with ``Poly.primitive`` and listed in a canonical order.
    """
    if p.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    if p.is_constant():
        return p.constant_term(), []
    const, facs = _to_sympy(p).factor_list()
    out = []
    for f, m in facs:
        q = _from_sympy(f, p.vars)
        qp = q.primitive()
        out.append((qp, int(m)))
    prod = Poly.const(p.vars, 1)
    for q, m in out:
        prod = prod * q ** m
    c = p.divexact(prod)
    out.sort(key=lambda t: (t[0].total_degree(), str(t[0])))
    return c.constant_term(), out


def squarefree_part(p: Poly) -> Poly:
    if p.is_constant():
        return p
    _, facs = factor_poly(p)
    return product((q for q, _ in facs), p.vars)
