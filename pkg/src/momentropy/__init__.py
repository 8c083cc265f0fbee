"""Moment-based entropy and log-determinant estimation on [0, 1].

The package fits maximum-entropy densities to polynomial moment constraints
and applies them to two tasks: log-determinants of large positive-definite
matrices from stochastically estimated spectral moments, and entropies of
Gaussian mixtures from their analytic moments, the latter driving an
information-theoretic Bayesian-optimisation acquisition.
"""

from .bases import BASIS_KINDS, basis_eval, basis_matrix, power_to_basis
from .bo import (
    ACQUISITION_METHODS,
    BOConfig,
    BOStep,
    Objective,
    acquisition,
    acquisition_curve,
    bo_run,
    get_objective,
    list_objectives,
)
from .gp import (
    GPHyper,
    default_hyper_grid,
    gp_posterior,
    predictive_mixture,
)
from .logdet import (
    LogDetEstimate,
    chebyshev_logdet,
    cholesky_logdet,
    make_se_kernel,
    meme_logdet,
    taylor_logdet,
)
from .maxent import (
    MaxEntDensity,
    MaxEntError,
    MaxEntSolution,
    MomentVector,
    SolverConfig,
    analytic_entropy,
    density_eval,
    dual_gradient,
    dual_hessian,
    dual_objective,
    solve_maxent,
)
from .mixtures import (
    DomainMap,
    GaussianMixture1D,
    entropy_mc,
    entropy_meme,
    entropy_mm,
    entropy_quad,
    gmm_basis_moments,
    gmm_pdf,
    gmm_raw_moment,
    gmm_sample,
    load_mixture,
    map_support,
    save_mixture,
)
from .operators import (
    SymmetricOperator,
    gershgorin_upper,
    load_matrix_market,
    save_matrix_market,
)
from .trace import (
    MomentEstimate,
    ProbeConfig,
    estimate_spectral_moments,
)

__version__ = "0.1.0"

__all__ = [
    "ACQUISITION_METHODS",
    "BASIS_KINDS",
    "BOConfig",
    "BOStep",
    "DomainMap",
    "GaussianMixture1D",
    "GPHyper",
    "LogDetEstimate",
    "MaxEntDensity",
    "MaxEntError",
    "MaxEntSolution",
    "MomentEstimate",
    "MomentVector",
    "Objective",
    "ProbeConfig",
    "SolverConfig",
    "SymmetricOperator",
    "acquisition",
    "acquisition_curve",
    "analytic_entropy",
    "basis_eval",
    "basis_matrix",
    "bo_run",
    "chebyshev_logdet",
    "cholesky_logdet",
    "default_hyper_grid",
    "density_eval",
    "dual_gradient",
    "dual_hessian",
    "dual_objective",
    "entropy_mc",
    "entropy_meme",
    "entropy_mm",
    "entropy_quad",
    "estimate_spectral_moments",
    "gershgorin_upper",
    "get_objective",
    "gmm_basis_moments",
    "gmm_pdf",
    "gmm_raw_moment",
    "gmm_sample",
    "gp_posterior",
    "list_objectives",
    "load_matrix_market",
    "load_mixture",
    "make_se_kernel",
    "map_support",
    "meme_logdet",
    "power_to_basis",
    "predictive_mixture",
    "save_matrix_market",
    "save_mixture",
    "solve_maxent",
    "taylor_logdet",
]
