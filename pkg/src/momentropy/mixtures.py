"""Univariate Gaussian mixtures and their entropy approximations.

A mixture's raw moments are analytic (per-component recurrence), which makes
it a convenient test bed for moment-constrained density estimation: map the
mixture onto [0, 1] with an affine change of variables, hand the mapped
moments to the maximum-entropy solver, and undo the map's effect on the
entropy with an additive ``log scale`` term.  Reference approximations
(quadrature, moment matching, Monte Carlo) live alongside for comparison.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .bases import _recurrence_values, check_basis
from .maxent import (
    MaxEntError,
    MomentVector,
    SolverConfig,
    analytic_entropy,
    solve_maxent,
)
from .validation import as_float_vector

__all__ = [
    "GaussianMixture1D",
    "DomainMap",
    "gaussian_raw_moments",
    "gmm_raw_moment",
    "gmm_raw_moments",
    "map_support",
    "gmm_basis_moments",
    "gmm_pdf",
    "gmm_logpdf",
    "gmm_sample",
    "entropy_meme",
    "entropy_quad",
    "entropy_mm",
    "entropy_mc",
    "mixture_from_dict",
    "mixture_to_dict",
    "load_mixture",
    "save_mixture",
]

_WEIGHT_TOL = 1e-12

# Gauss-Hermite rule shared by all basis-moment computations.  40 nodes are
# exact for polynomial integrands up to degree 79, comfortably past the
# largest moment order in use, and keeping the rule fixed means a moment of
# given index evaluates to the identical float no matter how many higher
# moments are requested alongside it.
_GH_NODES = 40


@dataclass(frozen=True)
class GaussianMixture1D:
    """Finite mixture of 1-d Gaussians with strictly positive weights."""

    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        w = as_float_vector(self.weights, "weights")
        m = as_float_vector(self.means, "means")
        s = as_float_vector(self.stds, "stds")
        if not (w.size == m.size == s.size):
            raise ValueError("weights, means and stds must have equal length")
        if w.size == 0:
            raise ValueError("mixture needs at least one component")
        if np.any(w <= 0.0):
            raise ValueError("component weights must be positive")
        if abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError("component weights must sum to 1")
        if np.any(s <= 0.0):
            raise ValueError("component stddevs must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "stds", s)

    @property
    def num_components(self):
        return self.weights.size

    def mean(self):
        return float(self.weights @ self.means)

    def variance(self):
        second = self.weights @ (self.means ** 2 + self.stds ** 2)
        return float(second - self.mean() ** 2)


@dataclass(frozen=True)
class DomainMap:
    """Affine map x -> y = (x - offset) / scale onto the unit interval."""

    offset: float
    scale: float

    def __post_init__(self):
        if not (self.scale > 0.0 and np.isfinite(self.scale)):
            raise ValueError("scale must be positive and finite")
        if not np.isfinite(self.offset):
            raise ValueError("offset must be finite")

    def forward(self, x):
        return (np.asarray(x, dtype=float) - self.offset) / self.scale

    def inverse(self, y):
        return self.offset + self.scale * np.asarray(y, dtype=float)


def gaussian_raw_moments(mean, std, order):
    """Raw moments E[X^i], i = 0..order, of a single Gaussian.

    Uses the recurrence M_k = mean * M_{k-1} + (k-1) * var * M_{k-2}, which
    follows from integration by parts and is stable for all parameter values.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    out = np.empty(order + 1)
    out[0] = 1.0
    if order >= 1:
        out[1] = mean
    var = std * std
    for k in range(2, order + 1):
        out[k] = mean * out[k - 1] + (k - 1) * var * out[k - 2]
    return out


def gmm_raw_moments(gmm, order):
    """Raw moments E[X^i], i = 0..order, of the mixture."""
    rows = np.stack([gaussian_raw_moments(m, s, order)
                     for m, s in zip(gmm.means, gmm.stds)])
    return gmm.weights @ rows


def gmm_raw_moment(gmm, i):
    """Raw moment E[X^i] of the mixture."""
    return float(gmm_raw_moments(gmm, i)[i])


def _mapped_components(gmm, k_sigma):
    # Domain [a, a + s] covering every component out to k_sigma stddevs,
    # plus the component parameters expressed on the mapped y-scale.
    lo = float(np.min(gmm.means - k_sigma * gmm.stds))
    hi = float(np.max(gmm.means + k_sigma * gmm.stds))
    dm = DomainMap(offset=lo, scale=hi - lo)
    return dm, (gmm.means - lo) / dm.scale, gmm.stds / dm.scale


def map_support(gmm, order, k_sigma=8.0):
    """Affine-map the mixture into [0, 1] and return its power moments there.

    The mapped variable y = (x - a)/s is again a Gaussian mixture, with
    component parameters ((m_k - a)/s, sigma_k/s), so its moments come from
    the same per-component recurrence.  (Expanding ((x - a)/s)^i binomially
    over the raw moments of x gives the same numbers in exact arithmetic but
    cancels catastrophically once the mixture sits far from the origin.)

    Parameters
    ----------
    gmm : GaussianMixture1D
    order : int
        Highest moment index, at least 2.
    k_sigma : float
        Half-width of the support in per-component stddevs.  The mass left
        outside [a, a + s] is below ``erfc(k_sigma / sqrt(2))`` per component,
        about 1e-15 at the default 8.

    Returns
    -------
    (DomainMap, MomentVector)
        The map and the mapped power moments mu_0 = 1, mu_1, ..., mu_order.
    """
    if order < 2:
        raise ValueError("order must be at least 2")
    if k_sigma <= 0.0:
        raise ValueError("k_sigma must be positive")
    dm, mapped_means, mapped_stds = _mapped_components(gmm, k_sigma)
    rows = np.stack([gaussian_raw_moments(m, s, order)
                     for m, s in zip(mapped_means, mapped_stds)])
    values = gmm.weights @ rows
    values[0] = 1.0
    return dm, MomentVector(values, basis="power")


def gmm_basis_moments(gmm, order, basis="legendre", k_sigma=8.0):
    """Moments E[f_i(y)] of the mapped mixture in a polynomial basis.

    Each expectation is computed per component by Gauss-Hermite quadrature,
    which is exact for polynomial integrands, then mixed by weight.  Going
    through the power moments and a change-of-basis matrix would agree in
    exact arithmetic, but the transform magnifies the rounding already
    present in float moments beyond repair at the orders used here; the
    direct route has no such step.

    Returns the same ``(DomainMap, MomentVector)`` pair as
    :func:`map_support`, with ``MomentVector.basis`` set accordingly.
    """
    check_basis(basis)
    if order < 2:
        raise ValueError("order must be at least 2")
    if k_sigma <= 0.0:
        raise ValueError("k_sigma must be positive")
    if basis == "power":
        return map_support(gmm, order, k_sigma)
    dm, mapped_means, mapped_stds = _mapped_components(gmm, k_sigma)
    nodes, weights = np.polynomial.hermite.hermgauss(_GH_NODES)
    weights = weights / math.sqrt(math.pi)
    values = np.zeros(order + 1)
    for w, m, s in zip(gmm.weights, mapped_means, mapped_stds):
        y = m + math.sqrt(2.0) * s * nodes
        values += w * (_recurrence_values(basis, order, y) @ weights)
    values[0] = 1.0
    return dm, MomentVector(values, basis=basis)


def gmm_pdf(gmm, x):
    """Mixture density, vectorized over ``x``."""
    x = np.asarray(x, dtype=float)
    z = (x[..., None] - gmm.means) / gmm.stds
    comp = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * gmm.stds)
    out = comp @ gmm.weights
    return float(out) if x.ndim == 0 else out


def gmm_logpdf(gmm, x):
    """Log-density evaluated stably via logsumexp over components."""
    x = np.asarray(x, dtype=float)
    z = (x[..., None] - gmm.means) / gmm.stds
    logs = (np.log(gmm.weights)
            - np.log(gmm.stds)
            - 0.5 * math.log(2.0 * math.pi)
            - 0.5 * z * z)
    peak = logs.max(axis=-1, keepdims=True)
    out = np.squeeze(peak, -1) + np.log(
        np.exp(logs - peak).sum(axis=-1))
    return float(out) if x.ndim == 0 else out


def gmm_sample(gmm, n, seed=0):
    """Draw ``n`` ancestral samples (component by weight, then Gaussian)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    idx = rng.choice(gmm.num_components, size=n, p=gmm.weights)
    return gmm.means[idx] + gmm.stds[idx] * rng.standard_normal(n)


def entropy_meme(gmm, order=10, basis="legendre", config=None, k_sigma=8.0):
    """Maximum-entropy upper bound on the mixture's differential entropy.

    Fits the moment-constrained density to ``order`` mapped moments and
    returns its analytic entropy plus ``log scale`` (entropy is additive
    under affine rescaling).  Because the fitted density maximizes entropy
    among all densities sharing those moments -- the mixture, mapped and
    truncated to [0, 1], being one of them -- the value can undershoot the
    truth only by the solver tolerance and the (negligible) truncated mass.

    Raises
    ------
    MaxEntError
        If the solver fails to converge; the flagged solution travels on the
        exception's ``solution`` attribute.
    """
    dm, moments = gmm_basis_moments(gmm, order, basis, k_sigma)
    solution = solve_maxent(moments, config)
    if not solution.converged:
        raise MaxEntError(
            "entropy bound unavailable: solver did not converge "
            f"(grad norm {solution.grad_norm:.3e} after "
            f"{solution.iterations} iterations)",
            solution=solution)
    return analytic_entropy(solution) + math.log(dm.scale)


def entropy_quad(gmm, grid_points=20001):
    """Reference entropy by trapezoid quadrature of -p log p.

    The grid spans every component out to 10 stddevs; integrand values are
    masked where p underflows (the limit of p log p there is 0).
    """
    if grid_points < 101:
        raise ValueError("grid_points must be at least 101")
    lo = float(np.min(gmm.means - 10.0 * gmm.stds))
    hi = float(np.max(gmm.means + 10.0 * gmm.stds))
    x = np.linspace(lo, hi, grid_points)
    p = gmm_pdf(gmm, x)
    integrand = np.zeros_like(p)
    mask = p > 0.0
    integrand[mask] = -p[mask] * np.log(p[mask])
    return float(np.trapezoid(integrand, x))


def entropy_mm(gmm):
    """Moment-matching entropy: that of a Gaussian with the mixture's variance.

    Equals the two-moment maximum-entropy value on the full line, hence it
    never falls below the true entropy.
    """
    return 0.5 * math.log(2.0 * math.pi * math.e * gmm.variance())


def entropy_mc(gmm, n_samples, seed=0):
    """Monte Carlo entropy estimate -mean(log p) over mixture samples."""
    x = gmm_sample(gmm, n_samples, seed)
    return float(-np.mean(gmm_logpdf(gmm, x)))


def mixture_from_dict(doc):
    """Build a mixture from ``{"components": [{"w", "mean", "std"}, ...]}``."""
    if not isinstance(doc, dict) or "components" not in doc:
        raise ValueError("mixture document must have a 'components' list")
    comps = doc["components"]
    if not isinstance(comps, list) or not comps:
        raise ValueError("'components' must be a nonempty list")
    w, m, s = [], [], []
    for i, c in enumerate(comps):
        try:
            w.append(float(c["w"]))
            m.append(float(c["mean"]))
            s.append(float(c["std"]))
        except (TypeError, KeyError) as exc:
            raise ValueError(
                f"component {i} must map 'w', 'mean' and 'std' to numbers"
            ) from exc
        extra = set(c) - {"w", "mean", "std"}
        if extra:
            raise ValueError(
                f"component {i} has unknown keys {sorted(extra)}")
    return GaussianMixture1D(np.array(w), np.array(m), np.array(s))


def mixture_to_dict(gmm):
    return {"components": [
        {"w": float(w), "mean": float(m), "std": float(s)}
        for w, m, s in zip(gmm.weights, gmm.means, gmm.stds)]}


def load_mixture(path):
    """Read and validate a mixture from a JSON file."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid mixture JSON: {exc}") from exc
    return mixture_from_dict(doc)


def save_mixture(gmm, path):
    with open(path, "w") as fh:
        json.dump(mixture_to_dict(gmm), fh, indent=2)
        fh.write("\n")
