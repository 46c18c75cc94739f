"""Tail-aware concentration tools for heavy-tailed high-dimensional data.

Orlicz norm machinery for stretched-exponential tails, closed-form
deviation thresholds, covariance and restricted-isometry diagnostics,
penalised regression with theory-driven penalties, and Gaussian
approximation plus multiplier bootstrap for max statistics.
"""

__version__ = "0.1.0"

from .orlicz import (
    BoundConstants,
    Family,
    NormEstimate,
    OrliczSpec,
    empirical_norm,
    eval_function,
    eval_inverse,
    gbo_moment_norm,
    gbo_tail_threshold,
    maximal_threshold,
    moment_growth_norm,
)
from .tailbounds import (
    SumBoundReport,
    TailCurve,
    bernstein_subexp_tail,
    kernel_deviation_threshold,
    max_average_threshold,
    product_norm,
    variance_sum_bound,
    weighted_sum_bound,
)
from .samplers import (
    Constant,
    DataMatrix,
    Exponential,
    Gaussian,
    GaussianCopula,
    IdenticalCoordinates,
    IidCoordinates,
    LinearMap,
    Pareto,
    RegressionData,
    RngStream,
    StudentT,
    SymmetricWeibull,
    draw_matrix,
    draw_scalar,
    make_regression,
    population_beta0,
)
from .covariance import (
    QuarterNet,
    ReReport,
    RipResult,
    RsConvexityParams,
    centered_cov,
    cone_min_oracle,
    delta_bound,
    gram,
    hard_threshold,
    max_elementwise_error,
    quarter_net,
    re_check,
    rip_exact,
    rip_net,
    rsc_lower,
    upsilon_estimate,
    upsilon_iid,
    xi_bound,
)
from .lasso import (
    EmpiricalOracle,
    FixedLambda,
    LassoFit,
    LassoProblem,
    TheoryPoly,
    TheorySubWeibull,
    cone_membership,
    error_bound_subweibull,
    lambda_theory_poly,
    lambda_theory_subweibull,
    oracle_inequality_bound,
    solve,
)
from .hdclt import (
    BootstrapResult,
    MaxStatSample,
    SampleSource,
    bootstrap_error_bound,
    coverage_experiment,
    data_max_sample,
    gaussian_analog_sample,
    hdclt_bound,
    max_statistic,
    multiplier_bootstrap,
    multiplier_draws,
    rho_rectangle_proxy,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    InvariantViolation,
    RunManifest,
    fit_loglog,
    list_experiments,
    parse_config,
    run,
)
