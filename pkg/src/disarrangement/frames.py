"""Isotropic frames of traceless symmetric matrices and minimizing rotations.

A unit vector ``v`` is isotropic for a symmetric ``A`` when ``A v . v = 0``.
A symmetric matrix admits an orthonormal basis of isotropic vectors exactly
when it is traceless. Such a basis for ``sym(M) - (tr M / N) I`` gives a
rotation ``R`` minimizing ``sum_i |sym(M) R e_i . R e_i|``, with minimum
``|tr M|`` and every term equal to ``tr M / N``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DisarrangementError, NoSignChangeError, TraceError
from .tensor import (
    _check_symmetric,
    as_matrix,
    as_vector,
    frobenius_norm,
    symmetric_eigendecomposition,
    symmetric_part,
    tensor_product,
)

KERNEL_RTOL = 1e-12
TRACE_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-10


@dataclass(frozen=True)
class IsotropicFrame:
    """Orthonormal isotropic vectors, stored as the columns of ``vectors``."""

    vectors: np.ndarray
    source: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.vectors.shape[0]

    @property
    def residuals(self):
        """``A v_i . v_i`` for each frame vector."""
        V = self.vectors
        return np.einsum("ji,jk,ki->i", V, self.source, V)

    def orthogonality_error(self):
        V = self.vectors
        return float(np.max(np.abs(V.T @ V - np.eye(self.dim))))


@dataclass(frozen=True)
class MinimizingRotation:
    R: np.ndarray
    objective: float
    per_term: np.ndarray


def _symmetric(A):
    return _check_symmetric(as_matrix(A))


def _zero_in_eigenbasis(lam, U):
    """Unit combination of the extreme eigenvectors with vanishing quadratic form.

    Returns the vector and the unit vector completing it inside the plane of
    the two eigenvectors, both in the coordinates of ``U``.
    """
    lp, lm = lam[0], lam[-1]
    c = np.sqrt(-lm / (lp - lm))
    s = np.sqrt(lp / (lp - lm))
    v = c * U[:, 0] + s * U[:, -1]
    w = -s * U[:, 0] + c * U[:, -1]
    return v, w


def zero_quadratic_unit_vector(A, subspace_basis=None):
    """Unit ``v`` in the span of ``subspace_basis`` (columns) with ``A v . v = 0``.

    With ``u+`` and ``u-`` the eigenvectors of the restricted form for its
    largest and smallest eigenvalues, ``v = cos(t) u+ + sin(t) u-`` where
    ``tan(t)**2 = lambda+ / -lambda-``.
    """
    S = _symmetric(A)
    n = S.shape[0]
    W = np.eye(n) if subspace_basis is None else np.array(subspace_basis, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    if W.shape[0] != n:
        raise DimensionMismatch("subspace basis does not match the matrix dimension")
    tol = KERNEL_RTOL * frobenius_norm(S)
    eig = symmetric_eigendecomposition(W.T @ S @ W)
    lam, U = eig.eigenvalues, eig.eigenvectors
    if np.max(np.abs(lam)) <= tol:
        return W[:, 0].copy()
    if not (lam[0] > tol and lam[-1] < -tol):
        raise NoSignChangeError(
            f"restricted quadratic form has no sign change (eigenvalues {lam[-1]:.3e}..{lam[0]:.3e})"
        )
    v, _ = _zero_in_eigenbasis(lam, U)
    return W @ v


def deflate(A, v1):
    """``A - v1 (x) A v1 - A v1 (x) v1``; traceless and symmetric when ``v1`` is isotropic."""
    S = as_matrix(A)
    v = as_vector(v1, "v1", dim=S.shape[0])
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise DisarrangementError(f"v1 must be a unit vector, |v1| = {np.linalg.norm(v)!r}")
    Av = S @ v
    return S - tensor_product(v, Av) - tensor_product(Av, v)


def isotropic_frame(A):
    """Orthonormal basis of isotropic vectors for a traceless symmetric ``A``.

    Kernel directions are adopted as they appear; otherwise one isotropic
    vector is split off and the search continues on the compression of ``A``
    to the orthogonal complement, which stays traceless.
    """
    S = _symmetric(A)
    n = S.shape[0]
    scale = frobenius_norm(S)
    if abs(np.trace(S)) > TRACE_TOL * (scale + 1.0):
        raise TraceError(f"isotropic frames need a traceless matrix, tr = {np.trace(S)!r}")
    tol = KERNEL_RTOL * scale

    found = []
    W = np.eye(n)
    while W.shape[1] > 0:
        eig = symmetric_eigendecomposition(W.T @ S @ W)
        lam, U = eig.eigenvalues, eig.eigenvectors
        kernel = np.abs(lam) <= tol
        if kernel.any():
            found.extend((W @ U[:, kernel]).T)
            W = W @ U[:, ~kernel]
            continue
        if not (lam[0] > 0.0 > lam[-1]):
            raise NoSignChangeError(
                f"compressed form lost its sign change (eigenvalues {lam[-1]:.3e}..{lam[0]:.3e})"
            )
        v, w = _zero_in_eigenbasis(lam, U)
        found.append(W @ v)
        W = W @ np.column_stack([U[:, 1:-1], w])
    return IsotropicFrame(np.column_stack(found), S)


def _orthogonality_error(R):
    n = R.shape[0]
    return max(np.max(np.abs(R @ R.T - np.eye(n))), np.max(np.abs(R.T @ R - np.eye(n))))


def rotation_objectives(M, Rs):
    """Vectorized ``sum_i |sym(M) R e_i . R e_i|`` over a stack of rotations."""
    Mh = symmetric_part(M)
    terms = np.einsum("kji,jl,kli->ki", Rs, Mh, Rs)
    return np.sum(np.abs(terms), axis=1)


def rotation_objective(M, R):
    """``sum_i |sym(M) R e_i . R e_i|`` with ``e_i`` the standard basis."""
    A = as_matrix(M)
    Rm = as_matrix(R, "R")
    if Rm.shape != A.shape:
        raise DimensionMismatch("R and M differ in dimension")
    err = _orthogonality_error(Rm)
    if err > ORTHOGONALITY_TOL:
        raise DisarrangementError(f"R is not orthogonal (error {err:.2e})")
    return float(rotation_objectives(A, Rm[None])[0])


def minimizing_rotation(M):
    """Rotation whose columns are isotropic for ``sym(M) - (tr M / N) I``.

    The columns are returned with ``det R = +1``; flipping one column keeps
    it isotropic.
    """
    A = as_matrix(M)
    n = A.shape[0]
    Mh = symmetric_part(A)
    shifted = Mh - (np.trace(Mh) / n) * np.eye(n)
    R = isotropic_frame(shifted).vectors.copy()
    if np.linalg.det(R) < 0:
        R[:, -1] = -R[:, -1]
    per_term = np.einsum("ji,jk,ki->i", R, Mh, R)
    return MinimizingRotation(R, float(np.sum(np.abs(per_term))), per_term)
