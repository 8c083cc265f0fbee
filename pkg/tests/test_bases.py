import numpy as np
import pytest
from fractions import Fraction

from momentropy.bases import (
    BASIS_KINDS,
    MAX_TRANSFORM_ORDER,
    basis_eval,
    basis_matrix,
    check_basis,
    monomial_coefficients,
    power_to_basis,
)


def test_zeroth_member_is_one():
    x = np.linspace(0.0, 1.0, 11)
    for kind in BASIS_KINDS:
        assert np.array_equal(basis_matrix(kind, 0, x)[0], np.ones(11))


@pytest.mark.parametrize("kind", BASIS_KINDS)
def test_matrix_matches_scalar_eval(kind):
    x = np.linspace(0.0, 1.0, 23)
    mat = basis_matrix(kind, 7, x)
    for i in (0, 1, 3, 7):
        np.testing.assert_allclose(mat[i], basis_eval(kind, i, x), rtol=0,
                                   atol=0)


def test_power_rows_are_monomials():
    x = np.linspace(0.0, 1.0, 17)
    mat = basis_matrix("power", 6, x)
    for i in range(7):
        np.testing.assert_allclose(mat[i], x ** i, atol=1e-15)


def test_chebyshev_matches_cosine_form():
    # T_k(2x-1) = cos(k arccos(2x-1)) on the interior
    x = np.linspace(0.01, 0.99, 50)
    t = 2.0 * x - 1.0
    mat = basis_matrix("chebyshev", 10, x)
    for k in range(11):
        np.testing.assert_allclose(mat[k], np.cos(k * np.arccos(t)),
                                   atol=1e-12)


def test_legendre_low_orders_explicit():
    x = np.linspace(0.0, 1.0, 31)
    t = 2.0 * x - 1.0
    mat = basis_matrix("legendre", 3, x)
    np.testing.assert_allclose(mat[1], t, atol=1e-15)
    np.testing.assert_allclose(mat[2], 0.5 * (3.0 * t ** 2 - 1.0), atol=1e-14)
    np.testing.assert_allclose(mat[3], 0.5 * (5.0 * t ** 3 - 3.0 * t),
                               atol=1e-14)


def test_shifted_legendre_orthogonality():
    # integrate P_i(2x-1) P_j(2x-1) over [0,1]: zero off-diagonal,
    # 1/(2i+1) on the diagonal
    x = np.linspace(0.0, 1.0, 20001)
    mat = basis_matrix("legendre", 8, x)
    gram = np.trapezoid(mat[:, None, :] * mat[None, :, :], x, axis=2)
    expected = np.diag(1.0 / (2.0 * np.arange(9) + 1.0))
    np.testing.assert_allclose(gram, expected, atol=1e-7)


def test_domain_guard():
    with pytest.raises(ValueError):
        basis_matrix("legendre", 3, [-0.1, 0.5])
    with pytest.raises(ValueError):
        basis_matrix("power", 3, [0.2, 1.3])
    with pytest.raises(ValueError):
        check_basis("hermite")
    with pytest.raises(ValueError):
        basis_matrix("legendre", -1, [0.5])


def test_monomial_coefficients_agree_with_recurrence():
    x = np.linspace(0.0, 1.0, 9)
    for kind in ("chebyshev", "legendre"):
        rows = monomial_coefficients(kind, 6)
        mat = basis_matrix(kind, 6, x)
        for i, row in enumerate(rows):
            direct = sum(float(c) * x ** j for j, c in enumerate(row))
            np.testing.assert_allclose(mat[i], direct, atol=1e-10)


def test_monomial_coefficients_are_exact_rationals():
    rows = monomial_coefficients("legendre", 4)
    assert all(isinstance(c, Fraction) for row in rows for c in row)
    # P_2(2x-1) = 6x^2 - 6x + 1
    assert rows[2] == (Fraction(1), Fraction(-6), Fraction(6))


def test_power_to_basis_identity_and_roundtrip():
    mu = np.array([1.0, 0.5, 1.0 / 3.0, 0.25, 0.2])
    assert np.array_equal(power_to_basis(mu, "power"), mu)
    # uniform moments: Legendre terms beyond order 0 vanish (orthogonality
    # to constants); Chebyshev gives int T_k = 1/(1-k^2) for even k
    np.testing.assert_allclose(power_to_basis(mu, "legendre"),
                               [1.0, 0.0, 0.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(power_to_basis(mu, "chebyshev"),
                               [1.0, 0.0, -1.0 / 3.0, 0.0, -1.0 / 15.0],
                               atol=1e-14)


def test_power_to_basis_matches_quadrature():
    # moments of Beta(2, 2) against a numerical integral of f_i * pdf
    x = np.linspace(0.0, 1.0, 40001)
    pdf = 6.0 * x * (1.0 - x)
    mu = np.array([np.trapezoid(x ** i * pdf, x) for i in range(9)])
    for kind in ("chebyshev", "legendre"):
        mat = basis_matrix(kind, 8, x)
        ref = np.trapezoid(mat * pdf, x, axis=1)
        np.testing.assert_allclose(power_to_basis(mu, kind), ref, atol=1e-7)


def test_power_to_basis_validation():
    with pytest.raises(ValueError):
        power_to_basis([], "legendre")
    with pytest.raises(ValueError):
        power_to_basis([1.0, np.nan], "legendre")
    with pytest.raises(ValueError, match="overflow"):
        power_to_basis(np.ones(MAX_TRANSFORM_ORDER + 2), "legendre")
    # order 60 itself is still allowed
    power_to_basis(1.0 / (np.arange(MAX_TRANSFORM_ORDER + 1) + 1.0),
                   "legendre")
