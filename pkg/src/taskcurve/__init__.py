"""taskcurve: accuracy-vs-complexity modeling for sequential tasks.

A two-parameter accuracy law (an incomplete-gamma curve in task complexity),
Monte Carlo validators for its derivation, Bayesian binomial statistics and
curve fitting, nine deterministic task generators with exact solvers and
graders, a trial datastore, a provider collector, and a CLI front end.
"""

from taskcurve._kernels import BACKEND
from taskcurve.error_model import (
    ErrorModelParams,
    MonteCarloConfig,
    ScalingDemoConfig,
    accuracy,
    accuracy_large_c,
    accuracy_small_c,
    mc_accuracy,
    naive_accuracy,
    rescale,
    scaling_demo,
)
from taskcurve.exceptions import ConvergenceError, DomainError, TaskcurveError
from taskcurve.inference import (
    AccuracyPoint,
    FitResult,
    chi_squared,
    credible_halfwidth,
    fit,
    posterior_cdf,
    posterior_density,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "ErrorModelParams",
    "MonteCarloConfig",
    "ScalingDemoConfig",
    "accuracy",
    "accuracy_large_c",
    "accuracy_small_c",
    "mc_accuracy",
    "naive_accuracy",
    "rescale",
    "scaling_demo",
    "AccuracyPoint",
    "FitResult",
    "chi_squared",
    "credible_halfwidth",
    "fit",
    "posterior_cdf",
    "posterior_density",
    "TaskcurveError",
    "DomainError",
    "ConvergenceError",
]
