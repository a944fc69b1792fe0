"""Embedded resolution of hypersurface singularities by invariant-driven blowups.

Exact rational arithmetic throughout.  The main entry points are
:func:`resolve_hypersurface` and :func:`resolve_ideal_to_nc`.
"""

__version__ = "0.1.0"

from .polyring import INF, Poly, parse_poly
from .ideals import Ideal, groebner, is_unit_ideal
from .words import InvariantWord, word_compare, e_bounds_check
from .resolver import ResolverConfig, resolve_hypersurface, resolve_ideal_to_nc, verify_tree

__all__ = [
    "INF",
    "Poly",
    "parse_poly",
    "Ideal",
    "groebner",
    "is_unit_ideal",
    "InvariantWord",
    "word_compare",
    "e_bounds_check",
    "ResolverConfig",
    "resolve_hypersurface",
    "resolve_ideal_to_nc",
    "verify_tree",
]
