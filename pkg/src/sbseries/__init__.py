"""Stochastic B-series order conditions for exponential SDE integrators.

Symbolic side: colored rooted trees (:mod:`sbseries.trees`), the exact
algebra of iterated stochastic integrals (:mod:`sbseries.stochalg`), the
B-series coefficient recursions and method specifications
(:mod:`sbseries.bseries`) and the mean-square order analysis
(:mod:`sbseries.orderanalysis`).

Numeric side: matrix exponential / phi functions, Brownian path engine and
the generic exponential integrator step (:mod:`sbseries.numint`), plus a
mean-square convergence harness (:mod:`sbseries.harness`).
"""

from .trees import (
    EMPTY,
    Tree,
    alpha,
    canonical_key,
    elementary_differential_text,
    enumerate_trees,
    format_tree,
    parse_tree,
    rho,
)
from .stochalg import (
    HPoly,
    Interp,
    WordPoly,
    append_letter,
    expectation,
    format_wordpoly,
    ms_leading_order,
    parse_wordpoly,
    product,
    second_moment,
    strat_to_ito,
    time_integrate,
)

__version__ = "0.1.0"
