"""Maximum-entropy densities on [0, 1] from moment constraints.

Given moments mu_i = E[f_i(x)] of an unknown density p on the unit interval,
the maximum-entropy reconstruction has the form

    q_a(x) = exp(-(1 + sum_i a_i f_i(x)))

where the multipliers ``a`` minimise the convex dual

    S(a) = int_0^1 q_a(x) dx + sum_i a_i mu_i.

At the minimum every constraint int f_i q = mu_i holds and the differential
entropy of q is available in closed form as 1 + sum_i a_i mu_i.  The dual is
minimised by a damped Newton iteration with conjugate-gradient inner solves
and Armijo backtracking; all integrals use composite trapezoid quadrature on
a uniform grid.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator

from .bases import basis_matrix, check_basis, power_to_basis
from .validation import as_float_vector, check_positive

__all__ = [
    "SolverConfig",
    "MomentVector",
    "MaxEntSolution",
    "MaxEntError",
    "dual_objective",
    "dual_gradient",
    "dual_hessian",
    "solve_maxent",
    "density_eval",
    "analytic_entropy",
    "MaxEntDensity",
]


class MaxEntError(RuntimeError):
    """Raised when the dual solve diverges or its pieces overflow.

    Carries the best available :class:`MaxEntSolution` in ``solution`` when
    one exists (e.g. a non-converged iterate a caller may still inspect).
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


@dataclass
class SolverConfig:
    """Knobs of the dual Newton solve.

    tol            : sup-norm gradient threshold declaring convergence.
    max_iter       : Newton iteration cap; exceeding it is reported, not raised.
    jitter         : diagonal loading added to the Hessian before CG.
    grid_spacing   : trapezoid grid spacing on [0, 1].
    exponent_clip  : |exponent| bound inside exp() to keep evaluations finite.
    """

    tol: float = 1e-6
    max_iter: int = 200
    jitter: float = 1e-8
    grid_spacing: float = 1e-4
    exponent_clip: float = 500.0
    armijo_slope: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 30

    def __post_init__(self):
        check_positive(self.tol, "tol")
        check_positive(self.jitter, "jitter")
        check_positive(self.exponent_clip, "exponent_clip")
        if not 0 < self.grid_spacing <= 0.5:
            raise ValueError("grid_spacing must lie in (0, 0.5]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class MomentVector:
    """Moments E[f_i] of a measure on [0, 1] in a declared basis."""

    values: np.ndarray
    basis: str = "power"

    def __post_init__(self):
        self.values = as_float_vector(self.values, "moments")
        check_basis(self.basis)

    @property
    def order(self):
        return self.values.size - 1


@dataclass
class MaxEntSolution:
    """Result of a dual solve: multipliers plus convergence diagnostics."""

    alpha: np.ndarray
    moments: MomentVector
    converged: bool
    iterations: int
    grad_norm: float

    @property
    def basis(self):
        return self.moments.basis


@lru_cache(maxsize=8)
def _quadrature_grid(spacing):
    n = int(round(1.0 / spacing)) + 1
    x = np.linspace(0.0, 1.0, n)
    w = np.full(n, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return x, w


@lru_cache(maxsize=32)
def _design(kind, order, spacing):
    x, w = _quadrature_grid(spacing)
    return x, w, basis_matrix(kind, order, x)


def _clipped_density(alpha, design, clip):
    expo = -(1.0 + alpha @ design)
    return np.exp(np.clip(expo, -clip, clip))


def _check_inputs(alpha, moments):
    alpha = as_float_vector(alpha, "alpha")
    if not isinstance(moments, MomentVector):
        moments = MomentVector(np.asarray(moments, dtype=float))
    if alpha.size != moments.values.size:
        raise ValueError("alpha and moments must have equal length")
    return alpha, moments


def dual_objective(alpha, moments, config=None):
    """Dual objective S(a) = int q_a + a . mu (smaller is better)."""
    config = config or SolverConfig()
    alpha, moments = _check_inputs(alpha, moments)
    _, w, F = _design(moments.basis, moments.order, config.grid_spacing)
    q = _clipped_density(alpha, F, config.exponent_clip)
    value = float(w @ q + alpha @ moments.values)
    if not np.isfinite(value):
        raise MaxEntError("objective overflow: dual value is not finite")
    return value


def dual_gradient(alpha, moments, config=None):
    """Gradient of the dual: mu_j - int f_j q_a."""
    config = config or SolverConfig()
    alpha, moments = _check_inputs(alpha, moments)
    _, w, F = _design(moments.basis, moments.order, config.grid_spacing)
    q = _clipped_density(alpha, F, config.exponent_clip)
    return moments.values - F @ (w * q)


def dual_hessian(alpha, moments, config=None):
    """Hessian int f_j f_k q_a, symmetrised, with diagonal jitter added."""
    config = config or SolverConfig()
    alpha, moments = _check_inputs(alpha, moments)
    _, w, F = _design(moments.basis, moments.order, config.grid_spacing)
    q = _clipped_density(alpha, F, config.exponent_clip)
    H = (F * (w * q)) @ F.T
    H = 0.5 * (H + H.T)
    H[np.diag_indices_from(H)] += config.jitter
    return H


def _cg(H, g, max_iter):
    # Solve H d = -g approximately; forcing term keeps inner accuracy
    # proportional to the outer gradient so early iterations stay cheap.
    # Residuals are reorthogonalized against their predecessors: for these
    # small dense systems the cost is negligible, and it preserves the
    # finite-termination property (max_iter equals the system size, where
    # exact-arithmetic CG is a direct solve) at condition numbers near the
    # jitter floor, where plain float CG loses orthogonality and stalls.
    gnorm = np.linalg.norm(g)
    tol = min(0.1, gnorm) * gnorm
    d = np.zeros_like(g)
    r = -g.copy()
    p = r.copy()
    rs = r @ r
    basis = np.empty((0, g.size))
    if rs > 0.0:
        basis = (r / np.sqrt(rs))[None, :]
    for _ in range(max_iter):
        if np.sqrt(rs) <= tol:
            break
        Hp = H @ p
        curv = p @ Hp
        if curv <= 0:
            break
        step = rs / curv
        d += step * p
        r -= step * Hp
        for _pass in range(2):
            r -= basis.T @ (basis @ r)
        norm = np.linalg.norm(r)
        if norm > 0.0:
            basis = np.vstack([basis, r / norm])
        rs_next = r @ r
        p = r + (rs_next / rs) * p
        rs = rs_next
    return d


def solve_maxent(moments, config=None):
    """Fit the maximum-entropy density matching a moment vector.

    Parameters
    ----------
    moments : MomentVector or array_like
        Moment values with ``values[0] == 1`` (f_0 is the constant 1, so the
        zeroth moment is the total mass).  Plain arrays are interpreted as
        power moments.
    config : SolverConfig, optional

    Returns
    -------
    MaxEntSolution
        With ``converged=False`` (best iterate retained) when the gradient
        tolerance was not reached within the iteration budget; callers that
        need a certified solution must check the flag.
    """
    config = config or SolverConfig()
    if not isinstance(moments, MomentVector):
        moments = MomentVector(np.asarray(moments, dtype=float))
    if moments.values[0] != 1.0:
        raise ValueError("moments.values[0] must equal 1 (total mass)")

    mu = moments.values
    alpha = np.zeros_like(mu)
    obj = dual_objective(alpha, moments, config)
    best_alpha, best_norm, best_iter = alpha.copy(), np.inf, 0

    for it in range(config.max_iter + 1):
        g = dual_gradient(alpha, moments, config)
        gnorm = float(np.max(np.abs(g)))
        if not np.isfinite(gnorm):
            raise MaxEntError(
                "solver diverged: non-finite gradient at iteration %d" % it,
                MaxEntSolution(best_alpha, moments, False, it, best_norm))
        if gnorm < best_norm:
            best_alpha, best_norm, best_iter = alpha.copy(), gnorm, it
        if gnorm < config.tol:
            return MaxEntSolution(alpha, moments, True, it, gnorm)
        if it == config.max_iter:
            break

        H = dual_hessian(alpha, moments, config)
        d = _cg(H, g, max_iter=mu.size)
        if d @ g >= 0.0:  # CG returned a non-descent direction; fall back
            d = -g

        slope = float(g @ d)
        step = 1.0
        for _ in range(config.max_backtracks + 1):
            trial = alpha + step * d
            trial_obj = dual_objective(trial, moments, config)
            if np.isfinite(trial_obj) and \
                    trial_obj <= obj + config.armijo_slope * step * slope:
                alpha, obj = trial, trial_obj
                break
            step *= config.backtrack_factor
        else:
            # No acceptable step along a descent direction: the quadrature
            # floor has been hit; report the best iterate seen so far.
            return MaxEntSolution(best_alpha, moments, False, it, best_norm)

    return MaxEntSolution(best_alpha, moments, False, best_iter, best_norm)


def density_eval(solution, x, config=None):
    """Evaluate the fitted density q_a at points ``x`` inside [0, 1]."""
    config = config or SolverConfig()
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    F = basis_matrix(solution.basis, solution.alpha.size - 1, np.atleast_1d(x))
    q = _clipped_density(solution.alpha, F, config.exponent_clip)
    return float(q[0]) if scalar else q


def analytic_entropy(solution):
    """Differential entropy 1 + a . mu of the fitted density.

    Exact for the maximum-entropy form once the moment constraints hold, so
    it inherits only the solver's constraint residual, not quadrature error.
    """
    return float(1.0 + solution.alpha @ solution.moments.values)


class MaxEntDensity(BaseEstimator):
    """Estimator interface around the moment-constrained density solve.

    Fits on a moment vector rather than samples: ``fit(mu)`` with power
    moments (or a :class:`MomentVector`) stores the dual multipliers and the
    fitted density is then available through :meth:`pdf`,
    :meth:`score_samples` and :meth:`entropy`.

    Parameters
    ----------
    basis : str, default "legendre"
        Working basis of the solve.  Power-moment input is converted with the
        exact transform; the shifted families keep the dual Hessian far
        better conditioned than raw powers.
    tol, max_iter, jitter, grid_spacing, exponent_clip
        Forwarded to :class:`SolverConfig`.
    """

    def __init__(self, basis="legendre", tol=1e-6, max_iter=200, jitter=1e-8,
                 grid_spacing=1e-4, exponent_clip=500.0):
        self.basis = basis
        self.tol = tol
        self.max_iter = max_iter
        self.jitter = jitter
        self.grid_spacing = grid_spacing
        self.exponent_clip = exponent_clip

    def _config(self):
        return SolverConfig(tol=self.tol, max_iter=self.max_iter,
                            jitter=self.jitter, grid_spacing=self.grid_spacing,
                            exponent_clip=self.exponent_clip)

    def fit(self, moments, y=None):
        """Solve for the multipliers matching ``moments``.

        Array input is taken as power moments and converted to the working
        basis; MomentVector input must already be in either the power or the
        working basis.
        """
        check_basis(self.basis)
        if isinstance(moments, MomentVector):
            if moments.basis == self.basis:
                target = moments
            elif moments.basis == "power":
                target = MomentVector(
                    power_to_basis(moments.values, self.basis), self.basis)
            else:
                raise ValueError(
                    f"cannot fit {moments.basis!r} moments in a "
                    f"{self.basis!r}-basis estimator")
        else:
            values = as_float_vector(moments, "moments")
            target = MomentVector(power_to_basis(values, self.basis), self.basis)

        self.solution_ = solve_maxent(target, self._config())
        self.coefficients_ = self.solution_.alpha
        self.converged_ = self.solution_.converged
        self.n_iter_ = self.solution_.iterations
        return self

    def pdf(self, x):
        return density_eval(self.solution_, x, self._config())

    def score_samples(self, x):
        """Log-density at ``x`` (sklearn density-estimator convention)."""
        return np.log(self.pdf(x))

    def entropy(self):
        return analytic_entropy(self.solution_)
