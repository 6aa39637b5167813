"""Count distributions driven by Bernstein-type rate functions.

The core object is a distribution on the naturals with pmf proportional to
rho^n / (phi(1)...phi(n)) for a rate function phi drawn from a small catalog
of Bernstein functions and their compositional inverses.  The package covers
the probabilistic side (pmf, moments, sampling, dispersion classification),
the special-function side (running-product interpolation in the spirit of
the gamma function, with digamma analogues), a generalized three-parameter
family, and an exact birth-death queue simulator whose stationary law is the
base distribution.
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    EcompError,
    MismatchError,
    PreconditionError,
    ResourceError,
    UnsupportedOrderError,
)
from .phi import (
    CurvatureReport,
    PhiFunction,
    catalog_entries,
    check_eventual_log_convexity,
    check_exp_concavity,
    inverse_derivative,
    invert,
    make_numeric_inverse,
    parse_phi,
)
from .bernstein_gamma import (
    BernsteinGammaEvaluator,
    get_evaluator,
    psi,
    w_integer,
    w_real,
)
from .distribution import (
    EComPoisson,
    MarkovBound,
    NormalizerResult,
    normalizer,
)
from .extended import (
    ExtendedDist,
    PsiDispersionReport,
    TuranReport,
    factorial_moment_general,
    moment_dispersion_test,
    moment_general,
    pmf_general,
    psi_dispersion_test,
    turan_check,
    z_general,
)
from .dispersion import (
    DispersionReport,
    classify_by_d,
    classify_by_derivative,
    classify_by_flags,
    full_report,
    numeric_dispersion,
    weighted_log_convexity,
)
from .queueing import (
    KERNEL_KIND,
    QueueScenario,
    SimResult,
    TheoryComparison,
    compare_to_theory,
    detailed_balance_residual,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "BernsteinGammaEvaluator",
    "ConfigError",
    "ConvergenceError",
    "CurvatureReport",
    "DispersionReport",
    "DivergenceError",
    "DomainError",
    "EComPoisson",
    "EcompError",
    "ExtendedDist",
    "KERNEL_KIND",
    "MarkovBound",
    "MismatchError",
    "NormalizerResult",
    "PhiFunction",
    "PreconditionError",
    "PsiDispersionReport",
    "QueueScenario",
    "ResourceError",
    "SimResult",
    "TheoryComparison",
    "TuranReport",
    "UnsupportedOrderError",
    "catalog_entries",
    "check_eventual_log_convexity",
    "check_exp_concavity",
    "classify_by_d",
    "classify_by_derivative",
    "classify_by_flags",
    "compare_to_theory",
    "detailed_balance_residual",
    "factorial_moment_general",
    "full_report",
    "get_evaluator",
    "inverse_derivative",
    "invert",
    "make_numeric_inverse",
    "moment_dispersion_test",
    "moment_general",
    "normalizer",
    "numeric_dispersion",
    "parse_phi",
    "pmf_general",
    "psi",
    "psi_dispersion_test",
    "simulate",
    "turan_check",
    "w_integer",
    "w_real",
    "weighted_log_convexity",
    "z_general",
    "__version__",
]
