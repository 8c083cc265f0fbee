"""Stochastic estimation of normalized spectral moments.

For a symmetric operator B with spectrum in [0, 1], the normalized moments
(1/n) Tr f_k(B) = E[f_k(lambda)] under the (normalized) eigenvalue
distribution are estimated with Hutchinson probes:

    (1/n) Tr f_k(B)  ~  (1/d) sum_j  z_j . f_k(B) z_j / n

with zero-mean unit-variance probe entries.  f_k may be plain powers B^k or
a shifted Chebyshev/Legendre family evaluated through its three-term
recurrence applied to the probe block; the recurrence form is what makes
high-order moments usable, since recovering them from power moments in
floating point is hopelessly ill-conditioned.

Determinism: probe j is drawn from its own counter-derived substream of the
master seed, and per-probe partial results are stored by index and reduced
in a fixed order, so results are bitwise reproducible no matter how or in
what order the probes are evaluated.
"""

from dataclasses import dataclass, field

import numpy as np

from .bases import check_basis
from .operators import SymmetricOperator

__all__ = ["ProbeConfig", "MomentEstimate", "probe_matrix",
           "estimate_spectral_moments"]

PROBE_DISTRIBUTIONS = ("gaussian", "rademacher")


@dataclass
class ProbeConfig:
    """Probe-count, order, distribution, and master seed of an estimate."""

    num_moments: int = 30
    num_probes: int = 50
    distribution: str = "gaussian"
    master_seed: int = 0

    def __post_init__(self):
        if self.num_moments < 1:
            raise ValueError("num_moments must be at least 1")
        if self.num_probes < 1:
            raise ValueError("num_probes must be at least 1")
        if self.distribution not in PROBE_DISTRIBUTIONS:
            raise ValueError(
                f"distribution must be one of {PROBE_DISTRIBUTIONS}")


@dataclass
class MomentEstimate:
    """Estimated normalized spectral moments values[k] ~ (1/n) Tr f_k(B).

    ``values[0]`` is pinned to 1 exactly (f_0 is the constant function and
    the spectral distribution is normalized by 1/n).  ``normalized_by``
    records the scale factor lambda_u the caller divided out of the original
    operator, purely as bookkeeping.
    """

    values: np.ndarray
    basis: str = "power"
    normalized_by: float = 1.0
    config: ProbeConfig = field(default_factory=ProbeConfig)


def _probe_stream(config, j):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=config.master_seed, spawn_key=(j,)))


def probe_matrix(config, n):
    """The (num_probes, n) block of probe vectors for a given master seed.

    Row j depends only on (master_seed, j, n, distribution), never on the
    other rows, so any subset or reordering of probes sees the same vectors.
    """
    probes = np.empty((config.num_probes, n))
    for j in range(config.num_probes):
        rng = _probe_stream(config, j)
        if config.distribution == "gaussian":
            probes[j] = rng.standard_normal(n)
        else:
            probes[j] = rng.integers(0, 2, size=n) * 2.0 - 1.0
    return probes


def shifted_recurrence_step(kind, k, op, w_k, w_prev):
    """One step of the three-term recurrence for f_{k+1} applied to a block."""
    t_w = 2.0 * op.matmat(w_k) - w_k  # (2B - I) w
    if kind == "chebyshev":
        return 2.0 * t_w - w_prev
    return ((2 * k + 1) * t_w - k * w_prev) / (k + 1)


def estimate_spectral_moments(op, config=None, basis="power",
                              normalized_by=1.0, probes=None):
    """Hutchinson estimate of normalized spectral moments of ``op``.

    Parameters
    ----------
    op : SymmetricOperator or matrix
        The (already normalized) operator; callers wanting moments of
        K / lambda_u scale first and pass lambda_u as ``normalized_by``.
    config : ProbeConfig, optional
    basis : str
        Moment family: ``"power"`` gives (1/n) Tr B^k; ``"chebyshev"`` /
        ``"legendre"`` give the shifted families on [0, 1], computed by
        running the recurrence on the probe block directly.
    normalized_by : float
        Recorded in the result; does not affect the computation.
    probes : ndarray (num_probes, n), optional
        Override the generated probe block (mainly for tests).

    Returns
    -------
    MomentEstimate
    """
    check_basis(basis)
    config = config or ProbeConfig()
    if not isinstance(op, SymmetricOperator):
        op = SymmetricOperator(op)
    n = op.n
    if probes is None:
        probes = probe_matrix(config, n)
    else:
        probes = np.asarray(probes, dtype=float)
        if probes.shape != (config.num_probes, n):
            raise ValueError(
                "dimension mismatch: probes must have shape "
                f"{(config.num_probes, n)}, got {probes.shape}")

    m = config.num_moments
    partials = np.empty((config.num_probes, m + 1))
    partials[:, 0] = 1.0

    block = probes.T  # (n, d); columns evolve through the recurrence
    if basis == "power":
        w = block
        for k in range(1, m + 1):
            w = op.matmat(w)
            partials[:, k] = np.einsum("ij,ji->i", probes, w) / n
    else:
        w_prev = block
        w = 2.0 * op.matmat(block) - block  # f_1 = 2x - 1 applied to B
        partials[:, 1] = np.einsum("ij,ji->i", probes, w) / n
        for k in range(1, m):
            w, w_prev = shifted_recurrence_step(basis, k, op, w, w_prev), w
            partials[:, k + 1] = np.einsum("ij,ji->i", probes, w) / n

    values = partials.mean(axis=0)
    values[0] = 1.0
    return MomentEstimate(values=values, basis=basis,
                          normalized_by=float(normalized_by), config=config)
