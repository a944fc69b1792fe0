"""Invariant words ``(nu_1, s_1; nu_2, s_2; ...; nu_{t+1})`` and their order."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

from .polyring import INF, parse_rational

__all__ = ["ZERO", "InvariantWord", "word_compare", "e_bounds_check"]

ZERO = Fraction(0)


def _fmt(x):
    if x is INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class InvariantWord:
    """Alternating ``nu, s`` entries followed by a terminal 0 or INF.

    ``entries`` holds ``(nu_1, s_1, ..., nu_t, s_t)``; ``terminal`` is
    ``ZERO`` or ``INF``.  ``companion`` is recorded for a ZERO terminal and
    breaks ties between otherwise equal words.
    """

    entries: Tuple = ()
    terminal: object = INF
    companion: Optional[Fraction] = None
    J: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.terminal is not INF and self.terminal != 0:
            raise ValueError("terminal must be 0 or INF")
        if len(self.entries) % 2:
            raise ValueError("entries must alternate nu, s")

    @classmethod
    def build(cls, seq, companion=None):
        """From a flat sequence ending in its terminal, e.g. ``[2, 0, 3/2, 0, INF]``."""
        seq = list(seq)
        term = seq[-1]
        term = INF if term is INF else Fraction(term)
        body = tuple(Fraction(x) if i % 2 == 0 else int(x) for i, x in enumerate(seq[:-1]))
        return cls(body, term, None if companion is None else Fraction(companion))

    def sequence(self):
        return tuple(self.entries) + (self.terminal,)

    def nus(self):
        return [self.entries[i] for i in range(0, len(self.entries), 2)] + [self.terminal]

    def prefix(self, length):
        return self.sequence()[:length]

    @property
    def nu1(self):
        return self.sequence()[0]

    @property
    def s1(self):
        return self.entries[1] if len(self.entries) > 1 else None

    def key(self):
        return self.sequence()

    def with_J(self, J):
        return InvariantWord(self.entries, self.terminal, self.companion, tuple(J))

    def __str__(self):
        parts = []
        ent = list(self.entries)
        for i in range(0, len(ent), 2):
            parts.append(f"{_fmt(ent[i])},{ent[i + 1]}")
        parts.append(_fmt(self.terminal))
        return "(" + "; ".join(parts) + ")"

    def to_json(self):
        out = {
            "word": str(self),
            "sequence": [
                ("inf" if x is INF else (_fmt(x) if i % 2 == 0 else int(x)))
                for i, x in enumerate(self.sequence())
            ],
        }
        if self.companion is not None:
            out["companion_mu"] = _fmt(self.companion)
        if self.J:
            out["J"] = list(self.J)
        return out

    @classmethod
    def from_json(cls, obj):
        seq = []
        for i, x in enumerate(obj["sequence"]):
            if x == "inf":
                seq.append(INF)
            elif i % 2 == 0:
                seq.append(parse_rational(x))
            else:
                seq.append(int(x))
        comp = obj.get("companion_mu")
        w = cls.build(seq, None if comp is None else parse_rational(comp))
        return w.with_J(obj.get("J", ()))


def word_compare(w1: InvariantWord, w2: InvariantWord, companion: bool = True) -> int:
    """-1, 0 or 1.  Plain lexicographic order with 0 < rationals < INF.

    Equal words with ZERO terminals are ordered by their companion values
    when ``companion`` is set.
    """
    a, b = w1.sequence(), w2.sequence()
    for x, y in zip(a, b):
        if x == y:
            continue
        return -1 if x < y else 1
    if len(a) != len(b):
        # cannot happen for well-formed words (terminals differ from finite nus)
        return -1 if len(a) < len(b) else 1
    if companion and w1.terminal == 0 and w2.terminal == 0:
        c1, c2 = w1.companion, w2.companion
        if c1 is not None and c2 is not None and c1 != c2:
            return -1 if c1 < c2 else 1
    return 0


def _divides_factorial(d: int, e) -> bool:
    # e is None for "astronomically large": then d <= e certainly holds
    if e is None or d <= e:
        return True
    n, p = d, 2
    while p * p <= n:
        if n % p == 0:
            a = 0
            while n % p == 0:
                n //= p
                a += 1
            v, q = 0, p
            while q <= e:
                v += e // q
                q *= p
            if v < a:
                return False
        p += 1
    return n <= e


def e_bounds_check(w: InvariantWord) -> bool:
    """Denominator bounds: with e_2 = nu_1 and e_{r+1} = max(e_r!, e_r! nu_r),
    every e_r! nu_r and the terminal companion times e_{t+1}! are natural numbers."""
    nus = w.nus()
    nu1 = nus[0]
    if nu1 is INF:
        return True
    nu1 = Fraction(nu1)
    if nu1.denominator != 1 or nu1 < 0:
        return False
    e = int(nu1)
    for nu in nus[1:]:
        if nu is INF:
            return True
        nu = Fraction(nu)
        if nu < 0 or not _divides_factorial(nu.denominator, e):
            return False
        if e is not None and e <= 1000:
            f = math.factorial(e)
            e = max(f, int(f * nu))
            if e > 10**6:
                e = None
        else:
            e = None
    if w.terminal == 0 and w.companion is not None:
        c = Fraction(w.companion)
        if c < 0 or not _divides_factorial(c.denominator, e):
            return False
    return True
