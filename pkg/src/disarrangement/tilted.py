"""Tilted-cube competitors for the bulk relaxation of |[u] . nu|.

The shrunken cube ``I = (1 - 2/(n+2)) Q`` with ``Q = (-1/2, 1/2)^N`` is
covered by cubes of edge ``1/m`` whose faces are normal to the columns of a
rotation ``R``. On each cell ``u(x) = M (x - c)``; outside ``I`` the
competitor is continued by a frame function that is never built, only its
analytic jump bound is reported.

The interfacial energy of ``u`` restricted to the closed inner cube is
evaluated face by face in closed form:

* interior faces carry the constant jump ``[u] . nu = -(1/m) M R e_i . R e_i``
  (oriented by ``+R e_i``, from the lower cell to its neighbour);
* faces cut by ``dI`` are clipped to it;
* on ``dI`` itself the jump against the zero outer trace is affine.

Dimensions 2 and 3 are supported.
"""

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import UnsupportedDimension
from .frames import minimizing_rotation
from .tensor import as_matrix, as_vector, frobenius_norm

INTERIOR_FULL = "interior_full"
INTERIOR_CLIPPED = "interior_clipped"
INNER_BOUNDARY = "inner_boundary"

_ALIGN_TOL = 1e-12


def inner_half_width(n):
    return 0.5 * (1.0 - 2.0 / (n + 2))


@dataclass(frozen=True)
class TiltedTiling:
    """Cells ``R (k + offset) / m + (1/m) R [-1/2, 1/2]^N`` meeting the open inner cube."""

    M: np.ndarray
    R: np.ndarray
    n: int
    m: int
    offset: np.ndarray
    keys: np.ndarray = field(repr=False)
    interior: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.M.shape[0]

    @property
    def inner_half_width(self):
        return inner_half_width(self.n)

    @property
    def centers(self):
        return (self.keys + self.offset) @ self.R.T / self.m

    @property
    def cell_volume(self):
        return float(self.m) ** -self.dim

    @property
    def interior_volume(self):
        return int(self.interior.sum()) * self.cell_volume

    @property
    def straddling_volume(self):
        return int((~self.interior).sum()) * self.cell_volume


@dataclass(frozen=True)
class JumpFacePiece:
    """A flat piece of the jump set with an affine scalar jump ``grad . x + const``."""

    vertices: np.ndarray
    normal: np.ndarray
    kind: str
    jump_grad: np.ndarray
    jump_const: float

    def jump_at(self, x):
        return np.asarray(x, dtype=float) @ self.jump_grad + self.jump_const


@dataclass
class ConvergenceRow:
    """One ``(n, m)`` evaluation of a tilted-cube competitor.

    ``density`` is ``|tr M|`` (normal mode) or ``|M^T a|`` (directional mode);
    ``flux`` is the signed face sum, which Gauss-Green forces to equal
    ``-tr M vol(I)`` or ``-M^T a vol(I)``.
    """

    n: int
    m: int
    energy: float
    target: float
    boundary_bound: float
    interior_excess_bound: float
    frame_bound: float
    frame_floor: float
    density: float
    interior_volume: float
    straddling_volume: float
    interior_face_sum: float
    flux: np.ndarray = field(repr=False)
    boundary_energy: float = 0.0

    @property
    def excess(self):
        """Energy above ``density * vol(interior cells)``."""
        return self.energy - self.density * self.interior_volume

    @property
    def total_bound(self):
        return self.boundary_bound + self.interior_excess_bound

    def sandwich_holds(self, atol=1e-12):
        return -atol <= self.excess <= self.total_bound + atol

    def upper_estimate(self):
        """Energy plus the frame contribution, never below the Gauss-Green floor."""
        return self.energy + max(self.frame_bound, self.frame_floor)


def _check_dim(M):
    if M.shape[0] not in (2, 3):
        raise UnsupportedDimension(f"tilted cubes need N in (2, 3), got N = {M.shape[0]}")


def directional_rotation(M, a):
    """A rotation with first column ``M^T a / |M^T a|``; identity when ``M^T a = 0``."""
    A = as_matrix(M)
    a = as_vector(a, "a", dim=A.shape[0])
    N = A.shape[0]
    w = A.T @ a
    nw = np.linalg.norm(w)
    if nw == 0.0:
        return np.eye(N)
    w = w / nw
    u = np.eye(N)[0] - w
    if np.linalg.norm(u) < 1e-14:
        return np.eye(N)
    H = np.eye(N) - 2.0 * np.outer(u, u) / (u @ u)
    H[:, -1] = -H[:, -1]
    return H


def build_tiling(M, n, m, R=None, offset=None):
    """Cells of edge ``1/m`` meeting the open cube ``(1 - 2/(n+2)) Q``.

    ``R`` defaults to the minimizing rotation of ``M``; ``offset`` (in cell
    units) to zero, which puts one cell center at the origin. Intersection
    with the open inner cube is decided exactly by separating axes.
    """
    M = as_matrix(M, "M")
    _check_dim(M)
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive integers")
    N = M.shape[0]
    R = minimizing_rotation(M).R if R is None else as_matrix(R, "R")
    offset = np.zeros(N) if offset is None else as_vector(offset, "offset", dim=N)
    h = inner_half_width(n)
    r = 0.5 / m
    ext = r * np.abs(R).sum(axis=1)

    keys = geo.lattice_keys(R, m, offset, h + ext)
    c = (keys + offset) @ R.T / m
    absc = np.abs(c)
    interior = np.all(absc + ext < h, axis=1)
    meets = np.all(absc < h + ext, axis=1)

    band = meets & ~interior
    cb = c[band]
    ok = np.ones(len(cb), dtype=bool)
    axes = [R[:, i] for i in range(N)]
    if N == 3:
        for j in range(3):
            for i in range(3):
                L = np.cross(np.eye(3)[j], R[:, i])
                if np.linalg.norm(L) > 1e-12:
                    axes.append(L)
    for L in axes:
        radius = h * np.abs(L).sum() + r * np.abs(R.T @ L).sum()
        ok &= np.abs(cb @ L) < radius
    meets[band] = ok
    return TiltedTiling(M, R, int(n), int(m), offset, keys[meets], interior[meets])


# --------------------------------------------------------------- face data


def _jump_constants(t, mode, a):
    R, M, m = t.R, t.M, t.m
    MR = M @ R
    if mode == "normal":
        return -np.einsum("ji,ji->i", MR, R) / m
    return -(MR.T @ a) / m


def _face_square(centers, R, i, r):
    """Vertices of faces normal to ``R e_i`` with the given centers, in cyclic order."""
    N = R.shape[0]
    others = [l for l in range(N) if l != i]
    if N == 2:
        t = R[:, others[0]] * r
        return np.stack([centers - t, centers + t], axis=1)
    u = R[:, others[0]] * r
    v = R[:, others[1]] * r
    return np.stack([centers - u - v, centers + u - v, centers + u + v, centers - u + v], axis=1)


@dataclass
class _Faces:
    """Intermediate face data of one tiling (counts for full faces, clipped polygons)."""

    full_keys: list
    full_counts: np.ndarray
    clipped: list  # per direction: (polygons, counts)
    boundary: list  # per (j, sign): (polygons, counts, cell indices)


def _collect_faces(t, keep_full_keys):
    N, R, m = t.dim, t.R, t.m
    h = t.inner_half_width
    r = 0.5 / m
    normals, offsets = geo.cube_planes(N, h)
    full_keys, full_counts, clipped = [], np.zeros(N, dtype=np.int64), []
    for i in range(N):
        off = t.offset + 0.5 * np.eye(N)[i]
        ext = r * (np.abs(R).sum(axis=1) - np.abs(R[:, i]))
        keys = geo.lattice_keys(R, m, off, h + ext)
        f = (keys + off) @ R.T / m
        absf = np.abs(f)
        outside = np.any(absf - ext >= h, axis=1)
        aligned = np.abs(np.abs(R[:, i]) - 1.0) <= _ALIGN_TOL
        for j in np.nonzero(aligned)[0]:
            outside |= np.abs(absf[:, j] - h) <= _ALIGN_TOL
        full = ~outside & np.all(absf + ext <= h, axis=1)
        cut = ~outside & ~full
        full_counts[i] = int(full.sum())
        full_keys.append(keys[full] if keep_full_keys else None)
        P = _face_square(f[cut], R, i, r)
        P, cnt = geo.clip_pieces(P, np.full(len(P), P.shape[1]), normals, offsets)
        meas = geo.piece_measures(P, cnt)
        pos = meas > 0
        clipped.append((P[pos], cnt[pos]))

    boundary = []
    c_all = t.centers
    idx_band = np.nonzero(~t.interior)[0]
    cb = c_all[idx_band]
    ext = r * np.abs(R).sum(axis=1)
    for j in range(N):
        for sign in (1.0, -1.0):
            near = np.abs(cb[:, j] - sign * h) <= ext[j]
            near &= np.all(np.abs(cb) - ext <= h, axis=1)
            cells = idx_band[near]
            square = _boundary_square(N, j, sign, h)
            P = np.broadcast_to(square, (len(cells),) + square.shape).copy()
            bn, bo = geo.box_planes(c_all[cells], R, r)
            bn = np.broadcast_to(bn, (len(cells),) + bn.shape)
            P, cnt = geo.clip_pieces(P, np.full(len(P), len(square)), bn, bo)
            meas = geo.piece_measures(P, cnt)
            pos = meas > 0
            boundary.append((j, sign, P[pos], cnt[pos], cells[pos]))
    return _Faces(full_keys, full_counts, clipped, boundary)


def _boundary_square(N, j, sign, h):
    others = [l for l in range(N) if l != j]
    if N == 2:
        a = np.zeros(2)
        b = np.zeros(2)
        a[j] = b[j] = sign * h
        a[others[0]], b[others[0]] = -h, h
        return np.stack([a, b])
    corners = [(-h, -h), (h, -h), (h, h), (-h, h)]
    out = np.zeros((4, 3))
    out[:, j] = sign * h
    for v, (p, q) in enumerate(corners):
        out[v, others[0]] = p
        out[v, others[1]] = q
    return out


def _boundary_affine(t, mode, a, j, sign, centers):
    """Jump ``[u] . nu`` (or ``[u] . a``) on an inner-boundary piece of each cell.

    The outer trace is zero, so ``[u] = -M (x - c)`` with ``nu = sign e_j``.
    """
    M = t.M
    Mc = centers @ M.T
    N = t.dim
    if mode == "normal":
        grad = np.broadcast_to(-sign * M[j], (len(centers), N))
        const = sign * Mc[:, j]
    else:
        grad = np.broadcast_to(-(M.T @ a), (len(centers), N))
        const = Mc @ a
    return grad, const


# ----------------------------------------------------------------- public


def clip_face_to_inner_cube(polygon, inner_half_width):
    """Part of a convex face inside the closed cube ``[-h, h]^N`` as a list of pieces."""
    V = np.asarray(polygon, dtype=float)
    normals, offsets = geo.cube_planes(V.shape[1], inner_half_width)
    out = geo.clip_polygon(V, normals, offsets)
    if len(out) == 0 or geo.piece_measures(out[None], np.array([len(out)]))[0] <= 0:
        return []
    return [out]


def face_normal_jump_integral(p):
    """Exact ``int_p |[u] . nu| dH^{N-1}`` for one piece."""
    if len(p.vertices) < 2:
        return 0.0
    return geo.integrate_abs_affine(p.vertices, p.jump_grad, p.jump_const)


def enumerate_jump_faces(t, mode="normal", a=None):
    """All jump pieces of the competitor inside the closed inner cube.

    Interior faces come first, by direction and lattice key, then the
    inner-boundary pieces by face of ``dI`` and cell. In directional mode
    the scalar jump is ``[u] . a`` instead of ``[u] . nu``.
    """
    a = _direction(t.M, mode, a)
    faces = _collect_faces(t, keep_full_keys=True)
    N, R, m = t.dim, t.R, t.m
    r = 0.5 / m
    s = _jump_constants(t, mode, a)
    zero = np.zeros(N)
    pieces = []
    for i in range(N):
        off = t.offset + 0.5 * np.eye(N)[i]
        f = (faces.full_keys[i] + off) @ R.T / m
        for V in _face_square(f, R, i, r):
            pieces.append(JumpFacePiece(V, R[:, i].copy(), INTERIOR_FULL, zero, float(s[i])))
        P, cnt = faces.clipped[i]
        for V, c in zip(P, cnt):
            pieces.append(JumpFacePiece(V[:c].copy(), R[:, i].copy(), INTERIOR_CLIPPED, zero, float(s[i])))
    centers = t.centers
    for j, sign, P, cnt, cells in faces.boundary:
        grad, const = _boundary_affine(t, mode, a, j, sign, centers[cells])
        nu = sign * np.eye(N)[j]
        for V, c, g, k in zip(P, cnt, grad, const):
            pieces.append(JumpFacePiece(V[:c].copy(), nu, INNER_BOUNDARY, g.copy(), float(k)))
    return pieces


def _direction(M, mode, a):
    if mode == "normal":
        return None
    if mode != "directional":
        raise ValueError(f"unknown mode {mode!r}")
    if a is None:
        raise ValueError("directional mode needs a direction a")
    return as_vector(a, "a", dim=M.shape[0])


def _interior_face_sum(t, mode, a):
    """Vertex-assigned face sum over fully interior cells, from the actual cell centers."""
    N, R, m, M = t.dim, t.R, t.m, t.M
    keys = t.keys[t.interior]
    c = (keys + t.offset) @ R.T / m
    area = float(m) ** -(N - 1)
    terms = []
    for i in range(N):
        cn = (keys + np.eye(N, dtype=np.int64)[i] + t.offset) @ R.T / m
        jump = (c - cn) @ M.T
        val = jump @ R[:, i] if mode == "normal" else jump @ a
        terms.append(np.abs(val) * area)
    return geo.stable_sum(np.concatenate(terms)) if terms else 0.0


def _row(t, mode, a, C):
    N, R, m, M = t.dim, t.R, t.m, t.M
    h = t.inner_half_width
    side = 2.0 * h
    faces = _collect_faces(t, keep_full_keys=False)
    s = _jump_constants(t, mode, a)
    area_full = float(m) ** -(N - 1)

    energy_terms, flux_terms = [], []
    for i in range(N):
        nu = R[:, i]
        count = faces.full_counts[i]
        energy_terms.append(np.array([count * area_full * abs(s[i])]))
        flux_terms.append(np.array([count * area_full * s[i]])[:, None] * (nu if mode != "normal" else 1.0))
        P, cnt = faces.clipped[i]
        meas = geo.piece_measures(P, cnt)
        energy_terms.append(meas * abs(s[i]))
        flux_terms.append((meas * s[i])[:, None] * (nu if mode != "normal" else 1.0))
    boundary_terms = []
    centers = t.centers
    for j, sign, P, cnt, cells in faces.boundary:
        grad, const = _boundary_affine(t, mode, a, j, sign, centers[cells])
        boundary_terms.append(geo.integrate_affine(P, cnt, grad, const))
        signed = geo.integrate_affine(P, cnt, grad, const, absolute=False)
        nu = sign * np.eye(N)[j]
        flux_terms.append(signed[:, None] * (nu if mode != "normal" else 1.0))

    bnd = geo.stable_sum(np.concatenate(boundary_terms)) if boundary_terms else 0.0
    energy = geo.stable_sum(np.concatenate(energy_terms + boundary_terms))
    width = 1 if mode == "normal" else N
    flux_stack = np.concatenate([np.reshape(f, (-1, width)) for f in flux_terms])
    flux = np.array([geo.stable_sum(flux_stack[:, k]) for k in range(flux_stack.shape[1])])

    normM = frobenius_norm(M)
    if mode == "normal":
        density = abs(np.trace(M))
        sizeM = normM
    else:
        density = float(np.linalg.norm(M.T @ a))
        sizeM = normM * float(np.linalg.norm(a))
    shrink = 1.0 - side**N
    return ConvergenceRow(
        n=t.n,
        m=t.m,
        energy=energy,
        target=density * side**N,
        boundary_bound=np.sqrt(N) / m * sizeM * 2 * N * side ** (N - 1),
        interior_excess_bound=2.0 * density * t.straddling_volume,
        frame_bound=C * sizeM * shrink,
        frame_floor=density * shrink,
        density=density,
        interior_volume=t.interior_volume,
        straddling_volume=t.straddling_volume,
        interior_face_sum=_interior_face_sum(t, mode, a),
        flux=flux if mode != "normal" else flux[:1],
        boundary_energy=bnd,
    )


def interfacial_energy(M, n, m, R=None, offset=None, C=1.0):
    """Exact ``int |[u] . nu|`` of the tilted-cube competitor over the closed inner cube.

    The frame term is not part of ``energy``; it is reported as
    ``frame_bound = C ||M|| (1 - (1 - 2/(n+2))^N)``.
    """
    M = as_matrix(M, "M")
    t = build_tiling(M, n, m, R=R, offset=offset)
    return _row(t, "normal", None, C)


def directional_energy(M, a, n, m, R=None, offset=None, C=1.0):
    """Same construction with the integrand ``|[u] . a|`` and ``R e_1 ∥ M^T a``."""
    M = as_matrix(M, "M")
    _check_dim(M)
    a = as_vector(a, "a", dim=M.shape[0])
    R = directional_rotation(M, a) if R is None else R
    t = build_tiling(M, n, m, R=R, offset=offset)
    return _row(t, "directional", a, C)


def convergence_study(M, n_list, m_list, mode="normal", a=None, C=1.0):
    """Rows for every ``(n, m)``, ``n`` outer and ``m`` inner."""
    if not len(n_list) or not len(m_list):
        raise ValueError("n_list and m_list must be nonempty")
    rows = []
    for n in n_list:
        for m in m_list:
            if mode == "normal":
                rows.append(interfacial_energy(M, n, m, C=C))
            else:
                rows.append(directional_energy(M, a, n, m, C=C))
    return rows
