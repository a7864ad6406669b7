"""James-space norm, a tent-function embedding into C[0,1], and the
piecewise-linear system g_n on the unit square built from it."""

from .counterexample import (
    CheckReport,
    CounterexampleSystem,
    Region,
    RegionKind,
    SquarePoint,
    eval_combination,
    eval_g,
    midline_coefficients,
    region_contains,
    stabilization_index,
    sup_norm_exact,
    verify_partial_sums,
    verify_sandwich,
)
from .embedding import (
    EmbeddingArtifact,
    EmbeddingMode,
    PeakInterval,
    build_embedding,
    eval_f,
    eval_functional,
    sup_on_line,
)
from .james import (
    DIFF,
    LEAD,
    FiniteSequence,
    IndexPattern,
    JamesNormResult,
    NormVariant,
    PatternFunctional,
    james_norm,
    james_norm_bruteforce,
    lemma1_gap,
    optimal_functional,
    pattern_value,
    star,
    sup_norm,
)

__version__ = "0.1.0"
