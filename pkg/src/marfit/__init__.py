"""marfit: regularized estimation of bilinear matrix autoregressive models.

Fits ``Y_t = A Y_{t-1} B' + E_t`` in three ways: plain alternating least
squares, banded iterated least squares with BIC bandwidth selection, and
iterated Lasso with cross-validated or stability-based penalty selection.
Ships a simulation harness, Monte Carlo drivers, forecast evaluation, and a
small CLI (``marfit``).
"""

__version__ = "0.1.0"

from .alse import AlseConfig, FitTrace, fit_alse, ls_step_A, ls_step_B
from .banded import (
    BandedConfig,
    BandedFitResult,
    BicTrace,
    banded_ls_step_A,
    banded_ls_step_B,
    build_row_regression_A,
    build_row_regression_B,
    fit_banded,
    select_bandwidth,
    tau_count,
)
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateCoefficientsError,
    IllPosedRegressionError,
    MarError,
    StationarityError,
    TuningFailureError,
)
from .evalkit import (
    ErrorReport,
    ExperimentSpec,
    ForecastReport,
    MonteCarloResult,
    estimation_error,
    holdout_forecast_eval,
    one_step_forecast,
    rolling_forecast_eval,
    run_monte_carlo,
)
from .matcore import (
    BandSpec,
    MarCoefficients,
    MatrixSeries,
    is_stationary,
    kron,
    normalize_identification,
    spectral_radius,
    unvec,
    vec,
)
from .simgen import (
    BandedDesign,
    NoiseSpec,
    SparseDesign,
    gen_banded_coeffs,
    gen_sparse_coeffs,
    simulate,
)
from .seriesio import parse_experiment_config, read_model, read_series, write_model, write_series
from .sparse import (
    LambdaGrid,
    LassoProblem,
    LassoSolution,
    RecoveryScore,
    SparseConfig,
    SparseFitResult,
    TuningMethod,
    a_side_problem,
    b_side_problem,
    cohens_kappa,
    fit_sparse,
    lambda_max_value,
    lasso_cd,
    make_lambda_grid,
    recovery_score,
    select_lambda_cv,
    select_lambda_ksc,
    solve_path,
)
