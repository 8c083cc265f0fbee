"""Gaussian-process regression with a squared-exponential kernel.

Small, dense-Cholesky GP machinery sized for desk-scale Bayesian
optimisation: exact posteriors per hyperparameter setting, and equal-weight
predictive mixtures over a deterministic hyperparameter grid standing in for
posterior hyperparameter samples.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .mixtures import GaussianMixture1D

__all__ = [
    "GPHyper",
    "default_hyper_grid",
    "gp_posterior",
    "predictive_mixture",
]

# Predictive variances are clamped here: they are mathematically positive but
# can round to zero or slightly below when a query coincides with training
# data at tiny noise levels.
_VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class GPHyper:
    """Squared-exponential hyperparameters (all strictly positive)."""

    lengthscale: float
    signal_var: float
    noise_var: float

    def __post_init__(self):
        for name in ("lengthscale", "signal_var", "noise_var"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite")


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x[:, None]
    elif x.ndim != 2:
        raise ValueError("inputs must be scalars, vectors or 2-d arrays")
    return x


def _se_cross(a, b, hyper):
    d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
    return hyper.signal_var * np.exp(-0.5 * d2 / hyper.lengthscale ** 2)


def gp_posterior(data, hyper, x):
    """Posterior mean and variance at query points ``x``.

    Parameters
    ----------
    data : (X, y) pair or None
        Observed inputs and targets.  ``None`` (or an empty X) yields the
        prior: mean 0, variance ``signal_var``.
    hyper : GPHyper
    x : array_like
        Query point(s); a scalar or 1-d vector of scalar inputs, or an
        (q, dim) array.

    Returns
    -------
    (mean, variance)
        Scalars for a scalar query, else aligned vectors.

    Raises
    ------
    np.linalg.LinAlgError
        "ill-conditioned GP" when the noise-jittered kernel matrix has no
        Cholesky factorization.
    """
    scalar = np.asarray(x, dtype=float).ndim == 0
    xq = _as_points(x)
    if data is None:
        mean = np.zeros(xq.shape[0])
        var = np.full(xq.shape[0], hyper.signal_var)
    else:
        X, y = data
        X = _as_points(X)
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] != y.size:
            raise ValueError("X and y must have matching lengths")
        if X.shape[0] == 0:
            return gp_posterior(None, hyper, x)
        if xq.shape[1] != X.shape[1]:
            raise ValueError("query dimension does not match training data")
        K = _se_cross(X, X, hyper) + hyper.noise_var * np.eye(X.shape[0])
        try:
            factor = cho_factor(K, lower=True)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("ill-conditioned GP") from exc
        ks = _se_cross(X, xq, hyper)
        mean = ks.T @ cho_solve(factor, y)
        var = hyper.signal_var - np.sum(ks * cho_solve(factor, ks), axis=0)
    var = np.maximum(var, _VAR_FLOOR)
    if scalar:
        return float(mean[0]), float(var[0])
    return mean, var


def predictive_mixture(data, hypers, x):
    """Equal-weight mixture of per-hyperparameter predictive Gaussians at x.

    ``x`` must be a single query point; the result is a
    :class:`GaussianMixture1D` with one component per hyperparameter.
    """
    if len(hypers) == 0:
        raise ValueError("need at least one hyperparameter setting")
    means = np.empty(len(hypers))
    stds = np.empty(len(hypers))
    for j, hyper in enumerate(hypers):
        m, v = gp_posterior(data, hyper, x)
        means[j] = m
        stds[j] = math.sqrt(v)
    weights = np.full(len(hypers), 1.0 / len(hypers))
    return GaussianMixture1D(weights, means, stds)


def default_hyper_grid(num=8, lengthscale_span=(0.18, 0.45),
                       signal_span=(0.8, 1.25), noise_var=1e-3):
    """Deterministic grid of ``num`` hyperparameter settings.

    The grid is the cartesian product of geometrically spaced lengthscales
    and signal variances, with the signal factor count chosen as the largest
    divisor of ``num`` not exceeding its square root (so e.g. num=8 gives
    4 lengthscales x 2 signal variances).  Noise variance is shared.

    The default spans are deliberately narrow -- the grid plays the role of
    draws from a hyperparameter posterior that has already seen data, not a
    broad prior.  Wide spans put badly mismatched components into every
    predictive mixture, which makes the mixture artificially multimodal and
    the entropy-based acquisitions erratic.
    """
    if num < 1:
        raise ValueError("num must be at least 1")
    ns = 1
    for cand in range(1, int(math.isqrt(num)) + 1):
        if num % cand == 0:
            ns = cand
    nl = num // ns
    lengthscales = np.geomspace(*lengthscale_span, nl)
    signals = np.geomspace(*signal_span, ns) if ns > 1 else \
        np.array([math.sqrt(signal_span[0] * signal_span[1])])
    return [GPHyper(float(l), float(s), noise_var)
            for s in signals for l in lengthscales]
