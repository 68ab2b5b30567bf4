"""Reversible embedding of finite stochastic matrices."""

from .chain import (
    GeneratorMatrix,
    ProbabilityDistribution,
    StochasticMatrix,
    invariant_distribution,
    is_irreducible,
    is_reversible,
    kolmogorov_triangle,
    validate_generator,
    validate_stochastic,
)
from .embedding import (
    EmbeddingReport,
    LogCoefficients,
    SpectralData,
    Verdict,
    candidate_polynomial,
    candidate_spectral,
    check_positive_spectrum,
    criterion_3x3,
    kendall_2x2,
    log_coefficients,
    reversible_embedding,
    spectral_decompose,
)
from .errors import *  # noqa: F401,F403
from .estimation import (
    TransitionCounts,
    Trajectory,
    count_transitions,
    estimate_generator,
    mle_transition,
)
from .numerics import expm, matrix_polynomial, solve_linear, symmetric_eigen
from .simulation import JumpPath, sample_skeleton, simulate_ctmc, simulate_dtmc

__version__ = "0.1.0"
