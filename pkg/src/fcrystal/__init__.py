"""Exact-arithmetic toolkit for F-crystals over the Witt vectors.

Computes Hodge and Newton invariants, level torsion, and isomorphism
numbers with certificates, entirely in exact truncated p-adic arithmetic.
"""

from .crystal import (
    AlphaBetaDelta,
    FCrystal,
    SlopeData,
    alpha_beta_delta,
    analysis_context,
    crystal_new,
    default_horizon,
    detect_period,
    direct_sum,
    dual_twisted,
    iterate_matrix,
    rescale,
    slope_data,
)
from .dvr_linalg import (
    WMatrix,
    char_poly,
    determinant_valuation,
    elementary_divisor_valuations,
    newton_polygon_slopes,
)
from .errors import (
    BadParameters,
    CheckFailed,
    ContextMismatch,
    DimensionMismatch,
    FCrystalError,
    NonIntegralRescale,
    NotACycle,
    NotIsoclinic,
    NotPrime,
    ParseError,
    PrecisionExhausted,
    RankTooSmall,
    SingularAtPrecision,
    SlopeOrderViolated,
)
from .families import (
    PermSpec,
    cyclic_window_oracle,
    full_cycle,
    make_k3_isoclinic,
    make_k3_nonisoclinic,
    make_permutational,
    make_rank2,
    make_supersingular_like,
    permutational_blocks,
    permutational_closed_bound,
    seeded_unit,
)
from .level_torsion import (
    Certificate,
    IsoReport,
    LevelTorsionResult,
    cross_level,
    direct_sum_estimate,
    isomorphism_number,
    level_torsion_isoclinic,
    level_torsion_sum,
    pdiv_bound,
    quasi_special_bound,
    theorem12_bound,
)
from .witt import (
    PrimeContext,
    Valuation,
    WittApprox,
    context_create,
    frobenius_power,
    is_prime,
    ring_arith,
    valuation,
)

__version__ = "0.1.0"
