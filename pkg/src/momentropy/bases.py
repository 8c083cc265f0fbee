"""Polynomial moment bases on the unit interval.

Three families are supported, all indexed so that the zeroth member is the
constant function 1:

* ``power``     -- f_i(x) = x**i
* ``chebyshev`` -- f_i(x) = T_i(2x - 1), Chebyshev polynomials shifted to [0, 1]
* ``legendre``  -- f_i(x) = P_i(2x - 1), Legendre polynomials shifted to [0, 1]

The shifted families are evaluated with their three-term recurrences, which is
stable for the orders used here.  Moment vectors expressed in the power basis
can be converted exactly to either shifted family: the change of basis is a
triangular linear map whose coefficients are rational, so it is carried out in
exact rational arithmetic before a single final rounding.
"""

from fractions import Fraction
from functools import lru_cache

import numpy as np

BASIS_KINDS = ("power", "chebyshev", "legendre")

# Rational coefficient matrices become astronomically large with the order;
# beyond this the transform is refused rather than silently degraded.
MAX_TRANSFORM_ORDER = 60


def check_basis(kind):
    if kind not in BASIS_KINDS:
        raise ValueError(f"unknown basis {kind!r}; expected one of {BASIS_KINDS}")
    return kind


def basis_matrix(kind, order, x):
    """Evaluate the first ``order + 1`` basis functions on a grid.

    Parameters
    ----------
    kind : str
        One of ``"power"``, ``"chebyshev"``, ``"legendre"``.
    order : int
        Highest polynomial index; the result has ``order + 1`` rows.
    x : array_like
        Evaluation points, all inside [0, 1].

    Returns
    -------
    ndarray of shape (order + 1, len(x))
        Row ``i`` holds f_i evaluated on ``x``.
    """
    check_basis(kind)
    if order < 0:
        raise ValueError("order must be nonnegative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("x must be one-dimensional")
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError("basis functions are defined on [0, 1] only")
    return _recurrence_values(kind, order, x)


def _recurrence_values(kind, order, x):
    # Same evaluation without the domain guard.  The polynomials themselves
    # are defined on all of R; callers integrating against densities with
    # (negligible) tail mass outside [0, 1] need values slightly outside.
    out = np.empty((order + 1, x.size))
    out[0] = 1.0
    if order == 0:
        return out
    if kind == "power":
        out[1] = x
        for i in range(2, order + 1):
            out[i] = out[i - 1] * x
        return out

    t = 2.0 * x - 1.0
    out[1] = t
    if kind == "chebyshev":
        for i in range(2, order + 1):
            out[i] = 2.0 * t * out[i - 1] - out[i - 2]
    else:  # legendre
        for i in range(2, order + 1):
            k = i - 1
            out[i] = ((2 * k + 1) * t * out[k] - k * out[k - 1]) / (k + 1)
    return out


def basis_eval(kind, i, x):
    """Evaluate the single basis function f_i at points ``x`` in [0, 1]."""
    scalar = np.isscalar(x)
    vals = basis_matrix(kind, i, np.atleast_1d(x))[i]
    return float(vals[0]) if scalar else vals


def _poly_mul_affine(coeffs, c0, c1):
    # Multiply a polynomial (monomial coefficient list) by (c0 + c1 * x).
    out = [Fraction(0)] * (len(coeffs) + 1)
    for j, c in enumerate(coeffs):
        out[j] += c0 * c
        out[j + 1] += c1 * c
    return out


@lru_cache(maxsize=None)
def monomial_coefficients(kind, order):
    """Exact monomial coefficients of the first ``order + 1`` basis functions.

    Returns a tuple of tuples of :class:`fractions.Fraction`; row ``i`` has
    ``i + 1`` entries, the coefficients of 1, x, ..., x**i in f_i.
    """
    check_basis(kind)
    if order > MAX_TRANSFORM_ORDER:
        raise ValueError("basis transform overflow: order %d exceeds %d"
                         % (order, MAX_TRANSFORM_ORDER))
    rows = [[Fraction(1)]]
    if order >= 1:
        if kind == "power":
            for i in range(1, order + 1):
                rows.append([Fraction(0)] * i + [Fraction(1)])
        else:
            # shifted argument t = 2x - 1
            rows.append([Fraction(-1), Fraction(2)])
            for i in range(2, order + 1):
                prev, prev2 = rows[i - 1], rows[i - 2]
                if kind == "chebyshev":
                    t_prev = _poly_mul_affine(prev, Fraction(-2), Fraction(4))
                    new = [t_prev[j] - (prev2[j] if j < len(prev2) else 0)
                           for j in range(i + 1)]
                else:  # legendre
                    k = i - 1
                    t_prev = _poly_mul_affine(
                        prev, Fraction(-(2 * k + 1)), Fraction(2 * (2 * k + 1)))
                    new = [(t_prev[j] - (k * prev2[j] if j < len(prev2) else 0))
                           / (k + 1) for j in range(i + 1)]
                rows.append(new)
    return tuple(tuple(r) for r in rows)


def power_to_basis(values, kind):
    """Re-express power moments mu_i = E[x**i] in another basis.

    The map is linear with rational coefficients and is evaluated in exact
    rational arithmetic (the inputs, as binary floats, are exact rationals),
    so the only rounding is the final conversion of each output to float.
    This matters: the coefficients alternate in sign and grow combinatorially,
    and naive float accumulation loses the massive cancellation that keeps
    the transformed moments of any genuine measure bounded.

    Parameters
    ----------
    values : array_like
        Power moments mu_0, ..., mu_m of a measure on [0, 1].
    kind : str
        Target basis.

    Returns
    -------
    ndarray of shape (m + 1,)
        E[f_i] for the target family.  For ``kind="power"`` this is a copy of
        the input.
    """
    check_basis(kind)
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a nonempty 1-d array")
    if not np.all(np.isfinite(values)):
        raise ValueError("moments must be finite")
    order = values.size - 1
    if kind == "power":
        return values.copy()
    if order > MAX_TRANSFORM_ORDER:
        raise ValueError("basis transform overflow: order %d exceeds %d"
                         % (order, MAX_TRANSFORM_ORDER))
    mu = [Fraction(v) for v in values.tolist()]
    rows = monomial_coefficients(kind, order)
    out = np.empty(order + 1)
    for i, row in enumerate(rows):
        out[i] = float(sum(c * mu[j] for j, c in enumerate(row)))
    return out
