"""Privacy accounting for the subsampled Gaussian mechanism.

Two accountants share one ledger format: the worst-case track charges every
step the clip-bound cost, the estimated track charges a high-confidence
upper bound computed from sampled pairwise gradient distances, with the
estimator's failure probability folded into delta.  A seeded simulation
harness and a small noisy-SGD logistic regression reproduce the synthetic
studies, and a CLI ties everything together for batch use.
"""

from .accountant import (
    DEFAULT_LAMBDA_GRID,
    Ledger,
    PrivacyReport,
    attack_success_probability,
    compose_basic,
    group_privacy,
)
from .estimator import (
    EstimatorConfig,
    MomentSampleBatch,
    bernoulli_mean_upper,
    delta_budget,
    estimate_privacy_cost,
)
from .exceptions import (
    BayesdpError,
    BudgetExhaustedError,
    ConfigurationError,
    DataError,
    DivergenceUndefinedError,
    DomainError,
    NumericsError,
    ParseError,
    VacuousGuaranteeWarning,
)
from .mechanisms import (
    DirectionalMoment,
    MechanismConfig,
    log_moment_subsampled,
    ma_privacy_cost,
    renyi_gaussian_diag,
    renyi_gaussian_shared_var,
)
from .numerics import (
    DEFAULT_TOLERANCE,
    ToleranceConfig,
    beta_inv_cdf,
    gauss_mixture_renyi_numeric,
    log_binomial_coeff,
    log_sum_exp,
    reg_incomplete_beta,
    student_t_inv_cdf,
)
from .simulator import (
    ClipPolicy,
    GradientModel,
    NoisePolicy,
    PrivacyTrace,
    SimulationPlan,
    TrainingResult,
    bundled_dataset_path,
    preset_plans,
    quantile_of_norms,
    run_logreg_baseline,
    run_logreg_dpsgd,
    run_simulation,
    sample_pair_distances,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_LAMBDA_GRID",
    "DEFAULT_TOLERANCE",
    "BayesdpError",
    "BudgetExhaustedError",
    "ClipPolicy",
    "ConfigurationError",
    "DataError",
    "DirectionalMoment",
    "DivergenceUndefinedError",
    "DomainError",
    "EstimatorConfig",
    "GradientModel",
    "Ledger",
    "MechanismConfig",
    "MomentSampleBatch",
    "NoisePolicy",
    "NumericsError",
    "ParseError",
    "PrivacyReport",
    "PrivacyTrace",
    "SimulationPlan",
    "ToleranceConfig",
    "TrainingResult",
    "VacuousGuaranteeWarning",
    "attack_success_probability",
    "bernoulli_mean_upper",
    "beta_inv_cdf",
    "bundled_dataset_path",
    "compose_basic",
    "delta_budget",
    "estimate_privacy_cost",
    "gauss_mixture_renyi_numeric",
    "group_privacy",
    "log_binomial_coeff",
    "log_moment_subsampled",
    "log_sum_exp",
    "ma_privacy_cost",
    "preset_plans",
    "quantile_of_norms",
    "reg_incomplete_beta",
    "run_logreg_baseline",
    "run_logreg_dpsgd",
    "run_simulation",
    "sample_pair_distances",
    "student_t_inv_cdf",
]
