"""Brute-force checks of the rotation minimum and of the tilted-cube infimum.

Random rotations come from ``numpy.random.default_rng(seed)`` (PCG64, 64-bit
state). Gaussian matrices are drawn in fixed blocks of :data:`BLOCK` and
trial ``k`` is always entry ``k % BLOCK`` of block ``k // BLOCK``, so the
first ``t`` trials do not depend on how many trials were requested.
Ties are broken by the lowest trial index.
"""

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize, minimize_scalar
from scipy.spatial.transform import Rotation

from .errors import DisarrangementError, UnsupportedDimension
from .frames import minimizing_rotation, rotation_objectives
from .tensor import as_matrix
from .tilted import interfacial_energy

BLOCK = 4096
QUARTER_TURN = 0.5 * np.pi


@dataclass(frozen=True)
class SearchReport:
    best_value: float
    best_parameters: Any
    evaluations: int
    seed: Any = None

    def to_dict(self):
        return asdict(self)


def rotation_2d(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def rotation_parameters(R):
    """Angle in 2D, unit quaternion ``(x, y, z, w)`` with ``w >= 0`` in 3D, entries otherwise."""
    N = R.shape[0]
    if N == 2:
        return float(np.arctan2(R[1, 0], R[0, 0]))
    if N == 3:
        q = Rotation.from_matrix(R).as_quat()
        return (q if q[3] >= 0 else -q).tolist()
    return R.tolist()


def rotation_grid_search_2d(M, resolution, refine=True):
    """Exhaustive angle grid over a quarter turn, then bounded Brent refinement.

    The objective has period ``pi/2`` because a quarter turn permutes the frame
    vectors up to sign. Refinement searches one grid step either side of the
    best grid angle.
    """
    A = as_matrix(M)
    if A.shape != (2, 2):
        raise UnsupportedDimension("the grid search is for 2 x 2 matrices")
    resolution = int(resolution)
    if resolution < 2:
        raise DisarrangementError("resolution must be at least 2")
    step = QUARTER_TURN / resolution
    thetas = step * np.arange(resolution)
    vals = rotation_objectives(A, rotation_2d(thetas))
    k = int(np.argmin(vals))
    best, theta, evals = float(vals[k]), float(thetas[k]), resolution
    if refine:
        f = lambda t: float(rotation_objectives(A, rotation_2d(np.array([t])))[0])
        res = minimize_scalar(
            f, bounds=(theta - step, theta + step), method="bounded",
            options={"xatol": 1e-12 * (1.0 + abs(theta))},
        )
        evals += int(res.nfev)
        if res.fun < best:
            best, theta = float(res.fun), float(np.mod(res.x, QUARTER_TURN))
    return SearchReport(best, theta, evals)


def _rotation_blocks(N, trials, seed):
    rng = np.random.default_rng(seed)
    left = int(trials)
    while left > 0:
        Z = rng.standard_normal((BLOCK, N, N))[: min(left, BLOCK)]
        Q, Rr = np.linalg.qr(Z)
        Q = Q * np.sign(np.diagonal(Rr, axis1=1, axis2=2))[:, None, :]
        Q[np.linalg.det(Q) < 0, :, 0] *= -1.0
        left -= len(Q)
        yield Q


def random_rotations(N, trials, seed):
    """Haar-distributed rotations in ``SO(N)``, prefix-stable in ``trials``."""
    blocks = list(_rotation_blocks(N, trials, seed))
    return np.concatenate(blocks) if blocks else np.zeros((0, N, N))


def _skew(p, N):
    K = np.zeros((N, N))
    iu = np.triu_indices(N, 1)
    K[iu] = p
    return K - K.T


def rotation_random_search(M, trials, seed=0, refine=False):
    """Best of ``trials`` random rotations, optionally polished by Nelder-Mead on ``R0 expm(K)``."""
    A = as_matrix(M)
    N = A.shape[0]
    trials = int(trials)
    if trials < 1:
        raise DisarrangementError("trials must be at least 1")
    best, R_best, evals = np.inf, None, 0
    for Q in _rotation_blocks(N, trials, seed):
        vals = rotation_objectives(A, Q)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, R_best = float(vals[k]), Q[k]
        evals += len(Q)
    if refine and N > 1:
        dim = N * (N - 1) // 2
        f = lambda p: float(rotation_objectives(A, (R_best @ expm(_skew(p, N)))[None])[0])
        simplex = 0.05 * np.vstack([np.zeros(dim), np.eye(dim)])
        res = minimize(
            f, np.zeros(dim), method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-14, "initial_simplex": simplex, "maxfev": 4000},
        )
        evals += int(res.nfev)
        if res.fun < best:
            best, R_best = float(res.fun), R_best @ expm(_skew(res.x, N))
    return SearchReport(best, rotation_parameters(R_best), evals, seed)


def infimum_probe(M, n, m, offsets=None, rotations=None, C=1.0):
    """Smallest tilted-cube energy plus frame allowance over a family of competitors.

    Defaults to the minimizing rotation and a zero offset. Each candidate is
    scored by :meth:`~disarrangement.tilted.ConvergenceRow.upper_estimate`.
    """
    A = as_matrix(M)
    N = A.shape[0]
    if N not in (2, 3):
        raise UnsupportedDimension(f"tilted cubes need N in (2, 3), got {N}")
    if rotations is None:
        rotations = [minimizing_rotation(A).R]
    if offsets is None:
        offsets = [np.zeros(N)]
    best, params = np.inf, None
    evals = 0
    for i, R in enumerate(rotations):
        for j, off in enumerate(offsets):
            row = interfacial_energy(A, n, m, R=np.asarray(R, float), offset=np.asarray(off, float), C=C)
            val = row.upper_estimate()
            evals += 1
            if val < best:
                best, params = val, {"rotation": i, "offset": j}
    return SearchReport(float(best), params, evals)
