"""Hypothesis strategies for small exact polynomials."""

from fractions import Fraction

from hypothesis import strategies as st

from resolvesing.polyring import Poly

small_q = st.builds(Fraction, st.integers(-5, 5), st.integers(1, 3))


def polys(vars=("x", "y"), max_deg=4, max_terms=5):
    n = len(vars)
    exps = st.tuples(*[st.integers(0, max_deg)] * n).filter(lambda e: sum(e) <= max_deg)
    return st.dictionaries(exps, small_q, max_size=max_terms).map(lambda t: Poly(vars, t))


def nonzero_polys(vars=("x", "y"), max_deg=4, max_terms=5):
    return polys(vars, max_deg, max_terms).filter(lambda p: not p.is_zero())


def points(n, lo=-3, hi=3):
    return st.tuples(*[st.integers(lo, hi).map(Fraction)] * n)
