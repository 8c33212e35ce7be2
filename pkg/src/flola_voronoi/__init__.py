"""Sequential experimental design for expensive black-box functions with
normally distributed output noise.

The sampler combines Monte-Carlo Voronoi-volume exploration with
local-gradient nonlinearity exploitation, plus a folded-normal analysis of
how output noise perturbs the exploitation score.
"""

__version__ = "0.1.0"

from .benchmarks import (
    PEAKS_SPACE,
    Evaluator,
    Region,
    make_evaluator,
    nn_distance_stats,
    peaks,
    region_fraction,
)
from .design import (
    Design,
    DesignSpace,
    EvaluatedPoint,
    initial_design,
    min_distance,
    validate_and_append,
)
from .errors import (
    BudgetExhaustedError,
    ConfigError,
    DuplicatePointError,
    EvaluationError,
    FlolaError,
    LockHeldError,
    OutOfBoundsError,
    PendingProposalError,
    RunError,
)
from .exploitation import (
    GradientEstimate,
    Neighborhood,
    estimate_gradient,
    exploitation_scores,
    noise_bound_rhs,
    nonlinearity_score,
    select_neighborhood,
)
from .exploration import (
    MonteCarloPool,
    assign_owners,
    build_pool,
    estimate_volumes,
)
from .noise import (
    NoiseSumStats,
    add_noise,
    noise_sum_mean_formula,
    noise_sum_variance_formula,
    simulate_noise_sum,
    u_term,
    v_term,
    zeta_stats,
)
from .sampler import (
    RunResult,
    RunState,
    SamplerConfig,
    ScoreTable,
    aggregate_scores,
    append_observation,
    derive_seed,
    propose,
    propose_next,
    rank,
    run,
    step,
)

__all__ = [
    "__version__",
    "BudgetExhaustedError",
    "ConfigError",
    "Design",
    "DesignSpace",
    "DuplicatePointError",
    "EvaluatedPoint",
    "EvaluationError",
    "Evaluator",
    "FlolaError",
    "GradientEstimate",
    "LockHeldError",
    "MonteCarloPool",
    "Neighborhood",
    "NoiseSumStats",
    "OutOfBoundsError",
    "PEAKS_SPACE",
    "PendingProposalError",
    "Region",
    "RunError",
    "RunResult",
    "RunState",
    "SamplerConfig",
    "ScoreTable",
    "add_noise",
    "aggregate_scores",
    "append_observation",
    "assign_owners",
    "build_pool",
    "derive_seed",
    "estimate_gradient",
    "estimate_volumes",
    "exploitation_scores",
    "initial_design",
    "make_evaluator",
    "min_distance",
    "nn_distance_stats",
    "noise_bound_rhs",
    "noise_sum_mean_formula",
    "noise_sum_variance_formula",
    "nonlinearity_score",
    "peaks",
    "propose",
    "propose_next",
    "rank",
    "region_fraction",
    "run",
    "select_neighborhood",
    "simulate_noise_sum",
    "step",
    "u_term",
    "v_term",
    "validate_and_append",
    "zeta_stats",
]
