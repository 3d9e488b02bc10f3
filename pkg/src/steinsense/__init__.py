"""Recovery toolkit for single-index observations with non-gaussian sensing.

The package measures how far an i.i.d. sensing law sits from the standard
normal (via the zero-bias transform and Stein kernels), propagates those
discrepancies through epsilon-contamination and through the link function
into a population drift term, and runs the projection-based recovery
estimator whose error the drift and a gaussian-width term control. A CLI
(``stein-sense``) exposes the pieces plus a reproducible sweep harness.
"""

from ._util import ConfigError, PreconditionError, derive_seed
from .bench import (
    CSV_COLUMNS,
    BoundReport,
    ExperimentConfig,
    FitResult,
    TrialRow,
    bound_report,
    build_signal,
    fit_rate,
    parse_rows,
    psi_norm_from_samples,
    rows_to_csv,
    run_sweep,
)
from .contamination import (
    BoundSet,
    ContaminationModel,
    contaminated_alpha_bounds,
    contaminated_gamma,
    contaminated_gamma_bound,
    contaminated_law,
)
from .distributions import (
    MomentReport,
    PsiNormBoundaryWarning,
    StandardizedDistribution,
    abs_moment,
    from_spec,
    make_distribution,
    mixture,
    moment_report,
    psi_norm,
    sample,
)
from .estimator import SingleIndexRegressor
from .geometry import (
    WidthEstimate,
    min_samples,
    width_descent_cone_sparse_proxy,
    width_sparse_sphere,
)
from .link_model import (
    Channel,
    LambdaEstimate,
    LemmaCheck,
    LinkFunction,
    PopulationSummary,
    SensingModel,
    VxEstimate,
    alpha_bound_c2,
    alpha_bound_lipschitz,
    alpha_bound_sign,
    alpha_of,
    enumerate_population,
    lambda_of,
    link_from_dict,
    make_link,
    population_summary,
    second_deriv_bound_by_search,
    v_x_lemma_checks,
    v_x_of,
    validate_link,
)
from .recovery import (
    ConstraintSet,
    Dataset,
    RecoveryError,
    correlation_vector,
    empirical_loss,
    estimate,
    generate,
    load_dataset,
    model_fingerprint,
    normalize,
    project,
    recovery_error,
    save_dataset,
)
from .zero_bias import (
    DiscrepancyReport,
    ZeroBiasLaw,
    discrepancy_report,
    e_one_minus_t,
    gamma,
    quantile_coupling_sample,
    stein_coefficient,
    stein_solution_abs,
    tv_distance,
    zero_bias,
    zero_bias_of_weighted_sum,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "PreconditionError",
    "derive_seed",
    "CSV_COLUMNS",
    "BoundReport",
    "ExperimentConfig",
    "FitResult",
    "TrialRow",
    "bound_report",
    "build_signal",
    "fit_rate",
    "parse_rows",
    "psi_norm_from_samples",
    "rows_to_csv",
    "run_sweep",
    "BoundSet",
    "ContaminationModel",
    "contaminated_alpha_bounds",
    "contaminated_gamma",
    "contaminated_gamma_bound",
    "contaminated_law",
    "MomentReport",
    "PsiNormBoundaryWarning",
    "StandardizedDistribution",
    "abs_moment",
    "from_spec",
    "make_distribution",
    "mixture",
    "moment_report",
    "psi_norm",
    "sample",
    "SingleIndexRegressor",
    "WidthEstimate",
    "min_samples",
    "width_descent_cone_sparse_proxy",
    "width_sparse_sphere",
    "Channel",
    "LambdaEstimate",
    "LemmaCheck",
    "LinkFunction",
    "PopulationSummary",
    "SensingModel",
    "VxEstimate",
    "alpha_bound_c2",
    "alpha_bound_lipschitz",
    "alpha_bound_sign",
    "alpha_of",
    "enumerate_population",
    "lambda_of",
    "link_from_dict",
    "make_link",
    "population_summary",
    "second_deriv_bound_by_search",
    "v_x_lemma_checks",
    "v_x_of",
    "validate_link",
    "ConstraintSet",
    "Dataset",
    "RecoveryError",
    "correlation_vector",
    "empirical_loss",
    "estimate",
    "generate",
    "load_dataset",
    "model_fingerprint",
    "normalize",
    "project",
    "recovery_error",
    "save_dataset",
    "DiscrepancyReport",
    "ZeroBiasLaw",
    "discrepancy_report",
    "e_one_minus_t",
    "gamma",
    "quantile_coupling_sample",
    "stein_coefficient",
    "stein_solution_abs",
    "tv_distance",
    "zero_bias",
    "zero_bias_of_weighted_sum",
    "__version__",
]
