"""Small dense linear algebra on N x N real matrices.

Matrices are plain ``numpy`` float arrays; ``as_matrix`` and ``as_vector``
are the validating constructors used at every public entry point.
Entry ``(i, j)`` is row ``i``, column ``j``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionMismatch, NotSymmetricError

SYMMETRY_RTOL = 1e-12
_JACOBI_MAX_SWEEPS = 60


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite square float array, or raise."""
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def as_vector(v, name="vector", dim=None):
    x = np.array(v, dtype=float).reshape(-1)
    if x.size < 1:
        raise DimensionMismatch(f"{name} is empty")
    if dim is not None and x.size != dim:
        raise DimensionMismatch(f"{name} has dimension {x.size}, expected {dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite components")
    return x


def symmetric_part(M):
    A = as_matrix(M)
    return 0.5 * (A + A.T)


def trace(M):
    return float(np.trace(as_matrix(M)))


def frobenius_norm(M):
    """Euclidean norm ``sqrt(tr(M^T M))``."""
    return float(np.sqrt(np.sum(as_matrix(M) ** 2)))


def row_max_norm(M):
    """Largest Euclidean norm among the rows of ``M``.

    Equivalently ``max_i |M^T delta_i|`` over the standard basis, because
    ``(M^T a)_j = sum_i M[i, j] a_i`` picks out row ``i`` when ``a = delta_i``.
    """
    A = as_matrix(M)
    return float(np.max(np.sqrt(np.sum(A * A, axis=1))))


def tensor_product(a, b):
    """``a (x) b``, the matrix with ``(a (x) b) v = (b . v) a``."""
    x = as_vector(a, "a")
    y = as_vector(b, "b")
    if x.size != y.size:
        raise DimensionMismatch(f"tensor product of {x.size}- and {y.size}-vectors")
    return np.outer(x, y)


def positive_part(t):
    return 0.5 * (abs(t) + t)


def negative_part(t):
    return 0.5 * (abs(t) - t)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; ``eigenvectors[:, i]`` pairs with ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T


def _fix_signs(V):
    # first component of non-negligible size is made positive
    for j in range(V.shape[1]):
        col = V[:, j]
        big = np.abs(col) > 1e-12 * np.max(np.abs(col))
        if col[np.argmax(big)] < 0:
            V[:, j] = -col
    return V


def _check_symmetric(A):
    scale = np.sqrt(np.sum(A * A))
    skew = np.sqrt(np.sum((A - A.T) ** 2))
    if skew > SYMMETRY_RTOL * scale:
        raise NotSymmetricError(
            f"matrix is not symmetric: |S - S^T| = {skew:.3e} > {SYMMETRY_RTOL:g}*|S|"
        )
    return 0.5 * (A + A.T)


def symmetric_eigendecomposition(S):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Inputs asymmetric beyond ``1e-12 * |S|`` are rejected; smaller asymmetry
    is removed by symmetrizing. Eigenvectors follow the convention that the
    first component of non-negligible size is positive.
    """
    A = _check_symmetric(as_matrix(S)).copy()
    n = A.shape[0]
    V = np.eye(n)
    norm = np.sqrt(np.sum(A * A))
    if norm == 0.0 or n == 1:
        return EigenDecomposition(np.diag(A).copy(), V)

    eps = np.finfo(float).eps
    for sweep in range(_JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off <= eps * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-3 * eps * norm:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off > 1e3 * eps * norm:
            raise ConvergenceError(f"Jacobi did not converge: off-diagonal {off:.3e}")

    lam = np.diag(A).copy()
    order = np.argsort(-lam, kind="stable")
    return EigenDecomposition(lam[order], _fix_signs(V[:, order]))
