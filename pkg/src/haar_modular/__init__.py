"""Haar random matrices over Z/mZ, finite fields and finite local rings.

Exact samplers for GL_N, exact corner laws and group orders, and the
statistics used to watch the law of the upper-left ``S x S`` corner approach
the uniform law on M_S as ``N`` grows.
"""

__version__ = "0.1.0"

from .counting import (
    BoundsReport,
    ExactDist,
    corner_counts,
    corner_fiber_bounds,
    corner_fiber_count_invertible,
    enumerate_gl,
    exact_corner_dist,
    order_gl,
    order_gl_field,
    order_gl_prime_power,
    order_gl_zm,
    tv_to_uniform,
    uniform_dist,
)
from .errors import (
    DomainError,
    FormatError,
    HaarModularError,
    InsufficientDataError,
    InvalidModulusError,
    InvalidReductionError,
    NotLocalRingError,
    PreconditionError,
    SamplingFailure,
    TooLargeError,
)
from .matrices import (
    Matrix,
    crt_combine_matrix,
    crt_split_matrix,
    determinant,
    is_invertible,
    mat_arith,
    rank_over_field,
    truncate,
)
from .rings import (
    Factorization,
    FqField,
    LocalRing,
    PrimePower,
    TruncatedPoly,
    ZmRing,
    crt_combine,
    crt_split,
    factorize,
    fq_arith,
    gf,
    is_unit,
    local_ring_make,
    parse_ring,
    reduce_mod,
    ring_from_dict,
    zm_arith,
)
from .sampling import (
    RngStream,
    SampleBatch,
    lift_to_prime_power,
    sample_gl,
    sample_gl_field_chain,
    sample_gl_field_reject,
    sample_gl_local,
    sample_gl_prime_power,
    sample_gl_zm,
    sample_truncated,
    sample_uniform_matrix,
)
from .stats import (
    EmpiricalDist,
    SweepResult,
    chi_squared_test,
    convergence_sweep,
    empirical_dist,
    tv_estimate,
)
