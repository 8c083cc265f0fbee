"""Symmetric linear operators, spectral bounds, and Matrix Market I/O."""

import numpy as np
import scipy.io
import scipy.sparse

from .validation import check_square_matrix

__all__ = [
    "SymmetricOperator",
    "gershgorin_upper",
    "load_matrix_market",
    "save_matrix_market",
]


class SymmetricOperator:
    """A real symmetric matrix held dense or CSR, with the few ops we need.

    Construction validates exact symmetry of the stored values; downstream
    spectral-moment machinery silently assumes it, so no tolerance is
    applied here.
    """

    def __init__(self, matrix):
        if scipy.sparse.issparse(matrix):
            matrix = scipy.sparse.csr_array(matrix)
            check_square_matrix(matrix, "operator")
            if (matrix != matrix.T).nnz != 0:
                raise ValueError("operator must be exactly symmetric")
        else:
            matrix = np.asarray(matrix, dtype=float)
            check_square_matrix(matrix, "operator")
            if not np.array_equal(matrix, matrix.T):
                raise ValueError("operator must be exactly symmetric")
        self.matrix = matrix

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def is_sparse(self):
        return scipy.sparse.issparse(self.matrix)

    def matmat(self, block):
        return self.matrix @ block

    def matvec(self, vec):
        return self.matrix @ vec

    def row_abs_sums(self):
        if self.is_sparse:
            absmat = scipy.sparse.csr_array(
                (np.abs(self.matrix.data), self.matrix.indices,
                 self.matrix.indptr), shape=self.matrix.shape)
            return np.asarray(absmat.sum(axis=1)).ravel()
        return np.abs(self.matrix).sum(axis=1)

    def scaled(self, factor):
        """A new operator with every entry multiplied by ``factor``."""
        return SymmetricOperator(self.matrix * factor)

    def to_dense(self):
        return self.matrix.toarray() if self.is_sparse else self.matrix


def _as_operator(op):
    return op if isinstance(op, SymmetricOperator) else SymmetricOperator(op)


def gershgorin_upper(op):
    """Gershgorin upper bound max_i sum_j |K_ij| on the largest eigenvalue.

    Cheap (one pass over the entries) and always >= lambda_max for symmetric
    K, which is what the spectral rescaling into [0, 1] requires.
    """
    op = _as_operator(op)
    bound = float(op.row_abs_sums().max())
    if bound == 0.0:
        raise ValueError("degenerate operator: all entries are zero")
    return bound


def load_matrix_market(path):
    """Read a Matrix Market file (coordinate or array) as a SymmetricOperator.

    Files with a ``symmetric`` header are trusted; ``general`` files are
    accepted only when the stored values are exactly symmetric, since a
    silently asymmetric operator would invalidate every estimate downstream.
    """
    mat = scipy.io.mmread(path)
    if scipy.sparse.issparse(mat):
        mat = scipy.sparse.csr_array(mat)
        check_square_matrix(mat, f"matrix from {path}")
        if (mat != mat.T).nnz != 0:
            raise ValueError(
                f"matrix from {path} is not symmetric; general-header input "
                "must match its transpose exactly")
    else:
        mat = np.asarray(mat, dtype=float)
        check_square_matrix(mat, f"matrix from {path}")
        if not np.array_equal(mat, mat.T):
            raise ValueError(
                f"matrix from {path} is not symmetric; general-header input "
                "must match its transpose exactly")
    return SymmetricOperator(mat)


def save_matrix_market(path, matrix):
    if isinstance(matrix, SymmetricOperator):
        matrix = matrix.matrix
    if scipy.sparse.issparse(matrix):
        matrix = scipy.sparse.coo_matrix(matrix)
    scipy.io.mmwrite(path, matrix)
