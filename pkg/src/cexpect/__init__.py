"""cexpect: decompose an outcome mean into per-population-fraction components.

The mean of an outcome is split over a grid of population proportions:
each component is the average outcome among the slice of the population
between two proportions (ranked by outcome), and the widths-weighted sum
of components returns the overall mean. Components come either from the
empirical quantile function (exact) or from a linear quantile-regression
model evaluated at a covariate profile, with bootstrap inference for
both.
"""

# the cli module reads the version back from here, so define it before
# any submodule import
__version__ = "0.1.0"

from .cce import (
    ComponentCoefficients,
    cce_for_profile,
    component_coefficients,
    empirical_cce,
    empirical_quantile_integral,
    midpoint_mesh,
    profile_components,
)
from .core import (
    ContributionVector,
    CovariateProfile,
    Decomposition,
    ProportionGrid,
    Sample,
    aggregate_mean,
    contrast,
    contributions,
    validate_grid,
)
from .errors import (
    AllZeroComponents,
    CexpectError,
    DidNotConverge,
    DimensionMismatch,
    EmptyAfterFiltering,
    GridMismatch,
    InvalidInterval,
    InvalidLevel,
    LevelOutOfMeshRange,
    MeshGridIncompatible,
    NotCoveringUnit,
    NotStrictlyIncreasing,
    ParseError,
    RankDeficient,
    TooFewPoints,
    TooManyDegenerateReplicates,
)
from .inference import (
    BootstrapSpec,
    EmpiricalTarget,
    InferenceReport,
    RegressionTarget,
    bootstrap,
    contribution_inference,
)
from .oracle import (
    KnownDistribution,
    exponential,
    generate,
    lognormal,
    normal,
    true_component,
    true_quantile,
    two_point,
    uniform,
)
from .quantreg import (
    CoefficientProcess,
    CoefficientVector,
    QuantileLevel,
    fit_process,
    fit_quantile_regression,
    pinball_loss,
    predict_quantile,
)
from .cli import (
    RunConfig,
    ingest,
    parse_grid,
    run_empirical,
    run_fit,
)
