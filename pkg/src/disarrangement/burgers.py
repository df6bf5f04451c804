"""Curl, line integrals and surface integrals for sampled 3x3 tensor fields.

Row ``i`` of ``curl M`` is the classical curl of row ``i`` of ``M``. With this
convention ``M dx`` means ``M`` applied to the tangent and Stokes' theorem
reads ``loop integral of M dx = surface integral of (curl M) nu dA``
componentwise. The transposed convention (curl of the columns) would pair
with ``M^T dx`` instead.

Fields are sampled on an axis-aligned lattice. Values between nodes come
from trilinear interpolation; line integrals use the composite midpoint
rule and surface integrals the centroid rule, both on pieces no longer
than the grid spacing, so every error term is second order in the spacing.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DisarrangementError, OutsideGridError

POINT_TOL = 1e-12


@dataclass(frozen=True)
class SampledTensorField:
    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray  # (nx, ny, nz, 3, 3)

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float).reshape(3)
        h = np.broadcast_to(np.asarray(self.spacing, dtype=float), (3,)).copy()
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 5 or v.shape[3:] != (3, 3):
            raise DimensionMismatch(f"values must have shape (nx, ny, nz, 3, 3), got {v.shape}")
        if np.any(h <= 0):
            raise DisarrangementError("grid spacing must be positive")
        if min(v.shape[:3]) < 3:
            raise DisarrangementError("each axis needs at least 3 nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite values")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "spacing", h)
        object.__setattr__(self, "values", v)

    @property
    def counts(self):
        return self.values.shape[:3]

    @property
    def upper(self):
        return self.origin + self.spacing * (np.array(self.counts) - 1)

    @classmethod
    def from_function(cls, fn, origin, spacing, counts):
        """Sample ``fn(x, y, z) -> (..., 3, 3)`` at the lattice nodes."""
        origin = np.asarray(origin, dtype=float)
        spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (3,))
        axes = [origin[k] + spacing[k] * np.arange(counts[k]) for k in range(3)]
        X, Y, Z = np.meshgrid(*axes, indexing="ij")
        return cls(origin, spacing, np.asarray(fn(X, Y, Z), dtype=float))

    def nodes(self):
        axes = [self.origin[k] + self.spacing[k] * np.arange(self.counts[k]) for k in range(3)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def interpolate(self, points):
        """Trilinear interpolation at ``points`` (..., 3)."""
        x = np.asarray(points, dtype=float)
        shape = x.shape[:-1]
        x = x.reshape(-1, 3)
        t = (x - self.origin) / self.spacing
        hi = np.array(self.counts) - 1
        slack = POINT_TOL * (1.0 + np.abs(self.upper - self.origin) / self.spacing)
        if np.any(t < -slack) or np.any(t > hi + slack):
            bad = x[np.any((t < -slack) | (t > hi + slack), axis=1)][0]
            raise OutsideGridError(f"point {bad.tolist()} lies outside the sampled grid")
        t = np.clip(t, 0, hi)
        i0 = np.minimum(np.floor(t).astype(int), hi - 1)
        f = t - i0
        out = np.zeros((len(x), 3, 3))
        for corner in np.ndindex(2, 2, 2):
            c = np.array(corner)
            w = np.prod(np.where(c == 1, f, 1.0 - f), axis=1)
            idx = i0 + c
            out += w[:, None, None] * self.values[idx[:, 0], idx[:, 1], idx[:, 2]]
        return out.reshape(shape + (3, 3))


def curl_matrix_field(field):
    """Row-wise curl by second-order differences (one-sided at the boundary)."""
    d = np.gradient(field.values, *field.spacing, axis=(0, 1, 2), edge_order=2)
    # d[k][..., i, j] = d M_ij / d x_k
    curl = np.empty_like(field.values)
    curl[..., 0] = d[1][..., :, 2] - d[2][..., :, 1]
    curl[..., 1] = d[2][..., :, 0] - d[0][..., :, 2]
    curl[..., 2] = d[0][..., :, 1] - d[1][..., :, 0]
    return SampledTensorField(field.origin, field.spacing, curl)


@dataclass(frozen=True)
class OrientedLoop:
    """Closed polyline; the first vertex is repeated at the end."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 3:
            raise DimensionMismatch("loop vertices must be points in R^3")
        if len(V) < 2 or np.max(np.abs(V[0] - V[-1])) > POINT_TOL * (1.0 + np.max(np.abs(V))):
            raise DisarrangementError("loop is not closed: first and last vertex differ")
        if len(np.unique(V[:-1], axis=0)) < 3:
            raise DisarrangementError("loop needs at least 3 distinct points")
        object.__setattr__(self, "vertices", V)

    @classmethod
    def closed(cls, points):
        P = np.asarray(points, dtype=float)
        return cls(np.vstack([P, P[:1]]))

    def reversed(self):
        return OrientedLoop(self.vertices[::-1].copy())

    @property
    def corners(self):
        return self.vertices[:-1]


@dataclass(frozen=True)
class OrientedSurface:
    """Triangulated surface, oriented by the vertex order of each triangle."""

    points: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        T = np.asarray(self.triangles, dtype=int)
        if P.ndim != 2 or P.shape[1] != 3 or T.ndim != 2 or T.shape[1] != 3 or len(T) == 0:
            raise DimensionMismatch("surface needs points (P, 3) and triangles (T, 3)")
        if T.min() < 0 or T.max() >= len(P):
            raise DisarrangementError("triangle index out of range")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "triangles", T)
        self.boundary_cycle()

    def flipped(self):
        return OrientedSurface(self.points, self.triangles[:, ::-1].copy())

    def boundary_cycle(self):
        """Vertex indices of the single oriented boundary cycle."""
        edges = {}
        for tri in self.triangles:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                if (a, b) in edges:
                    raise DisarrangementError("inconsistent triangle orientation")
                edges[(a, b)] = True
        boundary = {a: b for (a, b) in edges if (b, a) not in edges}
        if not boundary:
            raise DisarrangementError("surface has no boundary")
        start = min(boundary)
        cycle = [start]
        while True:
            nxt = boundary.get(cycle[-1])
            if nxt is None:
                raise DisarrangementError("surface boundary is not a closed cycle")
            if nxt == start:
                break
            cycle.append(nxt)
            if len(cycle) > len(boundary):
                raise DisarrangementError("surface boundary is not a single cycle")
        if len(cycle) != len(boundary):
            raise DisarrangementError("surface boundary has more than one cycle")
        return cycle

    def check_boundary(self, loop):
        """Raise unless the boundary equals ``loop`` up to a cyclic shift."""
        B = self.points[self.boundary_cycle()]
        L = loop.corners
        tol = POINT_TOL * (1.0 + np.max(np.abs(L)))
        if len(B) == len(L):
            for shift in range(len(L)):
                if np.max(np.abs(np.roll(B, -shift, axis=0) - L)) <= tol:
                    return
        raise DisarrangementError("surface boundary does not match the loop")

    def vector_areas(self):
        P = self.points[self.triangles]
        return 0.5 * np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])


def _segments(vertices, max_len):
    """Midpoints and displacement vectors of the loop split into short pieces."""
    p, q = vertices[:-1], vertices[1:]
    length = np.linalg.norm(q - p, axis=1)
    k = np.maximum(1, np.ceil(length / max_len).astype(int))
    mids, steps = [], []
    for a, b, kk in zip(p, q, k):
        t = (np.arange(kk) + 0.5) / kk
        mids.append(a + t[:, None] * (b - a))
        steps.append(np.repeat(((b - a) / kk)[None], kk, axis=0))
    return np.concatenate(mids), np.concatenate(steps)


def _refined_triangles(P, max_len):
    """Centroids and vector areas after uniform subdivision of each triangle."""
    cents, areas = [], []
    for a, b, c in P:
        edge = max(np.linalg.norm(b - a), np.linalg.norm(c - b), np.linalg.norm(a - c))
        k = max(1, int(np.ceil(edge / max_len)))
        u, v = (b - a) / k, (c - a) / k
        va = 0.5 * np.cross(u, v)
        i, j = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
        up = (i + j) < k
        base = a + i[up][:, None] * u + j[up][:, None] * v
        cents.append(base + (u + v) / 3.0)
        down = (i + j) < k - 1
        base = a + i[down][:, None] * u + j[down][:, None] * v
        cents.append(base + 2.0 * (u + v) / 3.0)
        areas.append(np.repeat(va[None], up.sum() + down.sum(), axis=0))
    return np.concatenate(cents), np.concatenate(areas)


def line_integral(field, loop):
    """Burgers vector ``loop integral of M(x) dx``."""
    mids, steps = _segments(loop.vertices, float(np.min(field.spacing)))
    vals = field.interpolate(mids)
    return np.einsum("kij,kj->i", vals, steps)


def surface_integral(curl_field, surface):
    """``sum of curl M(centroid) nu area`` over the (refined) triangles."""
    P = surface.points[surface.triangles]
    cents, areas = _refined_triangles(P, float(np.min(curl_field.spacing)))
    vals = curl_field.interpolate(cents)
    return np.einsum("kij,kj->i", vals, areas)


def stokes_residual(field, loop, surface, curl_field=None):
    surface.check_boundary(loop)
    if curl_field is None:
        curl_field = curl_matrix_field(field)
    return float(np.linalg.norm(line_integral(field, loop) - surface_integral(curl_field, surface)))


def curl_consistency_residual(M_field, G_field):
    """``max |curl M + curl G|``; vanishes in the limit when ``M + G`` is a gradient."""
    cm = curl_matrix_field(M_field).values
    cg = curl_matrix_field(G_field).values
    return float(np.max(np.abs(cm + cg)))


def planar_patch(corners, divisions=1):
    """Loop and matching triangulation of a planar convex polygon.

    The polygon edges are split into ``divisions`` pieces and the interior is
    triangulated from the centroid, so the surface boundary equals the loop
    and the orientation follows the corner order by the right-hand rule.
    """
    C = np.asarray(corners, dtype=float)
    if C.ndim != 2 or C.shape[1] != 3 or len(C) < 3:
        raise DimensionMismatch("corners must be at least 3 points in R^3")
    k = int(divisions)
    ring = []
    for a, b in zip(C, np.roll(C, -1, axis=0)):
        for t in np.arange(k) / k:
            ring.append(a + t * (b - a))
    ring = np.array(ring)
    centre = C.mean(axis=0)
    points = np.vstack([ring, centre])
    c = len(ring)
    tris = [(i, (i + 1) % len(ring), c) for i in range(len(ring))]
    return OrientedLoop.closed(ring), OrientedSurface(points, np.array(tris))


def burgers_report(field, loop, surface, flip=False):
    if flip:
        loop, surface = loop.reversed(), surface.flipped()
    surface.check_boundary(loop)
    curl = curl_matrix_field(field)
    line = line_integral(field, loop)
    surf = surface_integral(curl, surface)
    return {
        "line_integral": line.tolist(),
        "surface_integral": surf.tolist(),
        "residual": float(np.linalg.norm(line - surf)),
    }
