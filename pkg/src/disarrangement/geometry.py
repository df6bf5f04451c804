"""Batched convex clipping and exact integration of |affine| over flat pieces.

A *piece* is a segment in the plane (N = 2) or a planar convex polygon in
space (N = 3). Pieces are batched as padded arrays ``(F, V, N)`` with a
vertex count per row; unused slots hold copies of the last vertex.
"""

import math

import numpy as np

# ---------------------------------------------------------------- clipping


def _broadcast_planes(normals, offsets, F):
    normals = np.asarray(normals, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    if normals.ndim == 2:
        normals = np.broadcast_to(normals, (F,) + normals.shape)
        offsets = np.broadcast_to(offsets, (F,) + offsets.shape)
    return normals, offsets


def _compact(points, keep):
    order = np.argsort(~keep, axis=1, kind="stable")
    points = np.take_along_axis(points, order[:, :, None], axis=1)
    counts = keep.sum(axis=1)
    width = max(int(counts.max(initial=0)), 1)
    points = points[:, :width]
    # pad with the last valid vertex so padded slots are harmless
    idx = np.minimum(np.arange(width)[None, :], np.maximum(counts - 1, 0)[:, None])
    points = np.take_along_axis(points, idx[:, :, None], axis=1)
    return points, counts


def _clip_polygons_once(P, counts, n, d):
    F, V, _ = P.shape
    s = np.einsum("fvk,fk->fv", P, n) - d[:, None]
    slot = np.arange(V)[None, :]
    valid = slot < counts[:, None]
    nxt = np.where(slot + 1 < counts[:, None], slot + 1, 0)
    Pn = np.take_along_axis(P, nxt[:, :, None], axis=1)
    sn = np.take_along_axis(s, nxt, axis=1)
    inside = s <= 0.0
    inside_n = sn <= 0.0
    cross = valid & (inside != inside_n)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(cross, s / (s - sn), 0.0)
    X = P + t[:, :, None] * (Pn - P)
    out = np.empty((F, 2 * V, P.shape[2]))
    out[:, 0::2] = P
    out[:, 1::2] = X
    keep = np.empty((F, 2 * V), dtype=bool)
    keep[:, 0::2] = valid & inside
    keep[:, 1::2] = cross
    return _compact(out, keep)


def clip_polygons(P, counts, normals, offsets):
    """Sutherland-Hodgman clip of planar polygons to ``{x : n . x <= d}`` for each plane.

    ``normals`` is ``(K, D)`` shared by all rows or ``(F, K, D)`` per row.
    Returns the clipped batch and its vertex counts (0 for empty results).
    """
    P = np.asarray(P, dtype=float)
    counts = np.asarray(counts, dtype=np.int64)
    if P.shape[0] == 0:
        return P, counts
    normals, offsets = _broadcast_planes(normals, offsets, P.shape[0])
    for k in range(normals.shape[1]):
        n, d = normals[:, k], offsets[:, k]
        s = np.einsum("fvk,fk->fv", P, n) - d[:, None]
        # rows entirely inside this half-space pass through unchanged
        cut = np.any(s > 0.0, axis=1) & (counts > 0)
        if not cut.any():
            continue
        Pc, cc = _clip_polygons_once(P[cut], counts[cut], n[cut], d[cut])
        width = max(P.shape[1], Pc.shape[1])
        P = _pad(P, width)
        P[cut] = _pad(Pc, width)
        counts = counts.copy()
        counts[cut] = cc
    counts = np.where(counts >= 3, counts, 0)
    return P, counts


def _pad(P, width):
    if P.shape[1] >= width:
        return P
    extra = np.repeat(P[:, -1:], width - P.shape[1], axis=1)
    return np.concatenate([P, extra], axis=1)


def clip_segments(p0, p1, normals, offsets):
    """Parametric (Liang-Barsky) clip of segments to an intersection of half-spaces.

    Returns clipped endpoints and a mask of segments with positive length left.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    F = p0.shape[0]
    normals, offsets = _broadcast_planes(normals, offsets, F)
    d = p1 - p0
    lo = np.zeros(F)
    hi = np.ones(F)
    for k in range(normals.shape[1]):
        n = normals[:, k]
        s0 = np.einsum("fk,fk->f", p0, n) - offsets[:, k]
        ds = np.einsum("fk,fk->f", d, n)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -s0 / ds
        entering = ds < 0
        leaving = ds > 0
        parallel_out = (ds == 0) & (s0 > 0)
        lo = np.where(entering, np.maximum(lo, t), lo)
        hi = np.where(leaving, np.minimum(hi, t), hi)
        hi = np.where(parallel_out, -1.0, hi)
    ok = hi > lo
    q0 = p0 + lo[:, None] * d
    q1 = p0 + hi[:, None] * d
    return q0, q1, ok


def cube_planes(dim, half_width):
    """Outward half-space description ``(normals, offsets)`` of ``[-h, h]^dim``."""
    eye = np.eye(dim)
    return np.vstack([eye, -eye]), np.full(2 * dim, float(half_width))


def box_planes(centers, axes, half_width):
    """Half-spaces of rotated cubes: columns of ``axes`` are the face normals."""
    centers = np.asarray(centers, dtype=float)
    A = np.asarray(axes, dtype=float).T
    normals = np.concatenate([A, -A])
    proj = centers @ A.T
    offsets = np.concatenate([proj + half_width, -proj + half_width], axis=1)
    return normals, offsets


def clip_pieces(P, counts, normals, offsets):
    """Clip a batch of pieces (segments when ``P.shape[2] == 2``)."""
    P = np.asarray(P, dtype=float)
    if P.shape[2] == 2:
        q0, q1, ok = clip_segments(P[:, 0], P[:, 1], normals, offsets)
        out = np.stack([q0, q1], axis=1)
        return out, np.where(ok, 2, 0)
    return clip_polygons(P, counts, normals, offsets)


def clip_polygon(vertices, normals, offsets):
    """Clip one piece; returns its vertex array, empty when nothing remains."""
    V = np.asarray(vertices, dtype=float)
    P, c = clip_pieces(V[None], np.array([len(V)]), normals, offsets)
    return P[0, : c[0]].copy()


# ------------------------------------------------------------- integration


def _triangle_abs_linear(f, area):
    """Exact integral of |f| for f linear on triangles with vertex values ``f``."""
    signed = area * f.sum(axis=1) / 3.0
    npos = (f > 0).sum(axis=1)
    nneg = (f < 0).sum(axis=1)
    mixed = (npos > 0) & (nneg > 0)
    s = np.where(npos == 1, 1.0, -1.0)
    g = s[:, None] * f
    g = np.sort(g, axis=1)
    ga, gb, gc = g[:, 2], g[:, 1], g[:, 0]
    den = (ga - gb) * (ga - gc)
    den = np.where(mixed, den, 1.0)
    # the sub-triangle where g > 0 has area fraction ga^2 / den and mean ga / 3
    plus = area * ga**3 / (3.0 * den)
    return np.where(mixed, 2.0 * plus - s * signed, np.abs(signed))


def _segment_abs_linear(f0, f1, length):
    same = f0 * f1 >= 0
    den = np.where(same, 1.0, np.abs(f0) + np.abs(f1))
    mixed = length * (f0 * f0 + f1 * f1) / (2.0 * den)
    return np.where(same, length * np.abs(f0 + f1) / 2.0, mixed)


def _fan(P, counts):
    """Triangles ``(0, k, k + 1)`` of each convex polygon as (row, a, b, c) arrays."""
    F, V, _ = P.shape
    k = np.arange(1, max(V - 1, 1))
    rows, ks = np.nonzero(k[None, :] < (counts[:, None] - 1))
    ks = k[ks]
    return rows, P[rows, 0], P[rows, ks], P[rows, ks + 1]


def piece_measures(P, counts):
    """Length (segments) or area (polygons) of each piece."""
    P = np.asarray(P, dtype=float)
    counts = np.asarray(counts)
    if P.shape[2] == 2:
        return np.where(counts >= 2, np.linalg.norm(P[:, 1] - P[:, 0], axis=1), 0.0)
    rows, a, b, c = _fan(P, counts)
    tri = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    return np.bincount(rows, weights=tri, minlength=P.shape[0])


def integrate_affine(P, counts, grad, const, absolute=True):
    """Integrals of ``x -> grad . x + const`` (or its absolute value) over pieces.

    Exact up to rounding: the absolute value of an affine function is
    integrated by splitting each triangle or segment at the zero level set.
    """
    P = np.asarray(P, dtype=float)
    counts = np.asarray(counts)
    grad = np.asarray(grad, dtype=float)
    const = np.asarray(const, dtype=float)
    F = P.shape[0]
    grad = np.broadcast_to(grad, (F, P.shape[2]))
    const = np.broadcast_to(const, (F,))
    if P.shape[2] == 2:
        length = np.where(counts >= 2, np.linalg.norm(P[:, 1] - P[:, 0], axis=1), 0.0)
        f0 = np.einsum("fk,fk->f", P[:, 0], grad) + const
        f1 = np.einsum("fk,fk->f", P[:, 1], grad) + const
        if absolute:
            return _segment_abs_linear(f0, f1, length)
        return length * (f0 + f1) / 2.0
    rows, a, b, c = _fan(P, counts)
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    g = grad[rows]
    f = np.stack(
        [np.einsum("tk,tk->t", x, g) for x in (a, b, c)], axis=1
    ) + const[rows, None]
    if absolute:
        vals = _triangle_abs_linear(f, area)
    else:
        vals = area * f.sum(axis=1) / 3.0
    return np.bincount(rows, weights=vals, minlength=F)


def integrate_abs_affine(vertices, grad, const):
    """Exact integral of ``|grad . x + const|`` over one segment or convex polygon."""
    V = np.asarray(vertices, dtype=float)
    if len(V) < 2:
        return 0.0
    return float(integrate_affine(V[None], np.array([len(V)]), grad, [const])[0])


def stable_sum(values):
    """Correctly rounded sum in a fixed order, independent of chunking."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


# ------------------------------------------------------------ lattices


def lattice_keys(R, m, offset, bound, slack=1e-9):
    """Integer keys ``k`` with ``|(R (k + offset) / m)_j| <= bound_j`` for every ``j``.

    Keys come out in lexicographic order. The first ``N - 1`` coordinates
    range over a bounding box; the admissible last coordinate of each is an
    interval solved from the ``N`` slab constraints.
    """
    R = np.asarray(R, dtype=float)
    N = R.shape[0]
    offset = np.asarray(offset, dtype=float)
    bound = np.asarray(bound, dtype=float)
    reach = m * float(np.linalg.norm(bound)) + 1.0
    axes = [
        np.arange(math.ceil(-reach - offset[l]), math.floor(reach - offset[l]) + 1)
        for l in range(N - 1)
    ]
    heads = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, N - 1)
    y_head = heads + offset[: N - 1]
    P = y_head @ R[:, : N - 1].T
    col = R[:, N - 1]
    lo = np.full(len(heads), -np.inf)
    hi = np.full(len(heads), np.inf)
    mb = m * bound
    for j in range(N):
        if abs(col[j]) > 1e-14:
            a = (-mb[j] - P[:, j]) / col[j]
            b = (mb[j] - P[:, j]) / col[j]
            lo = np.maximum(lo, np.minimum(a, b))
            hi = np.minimum(hi, np.maximum(a, b))
        else:
            dead = np.abs(P[:, j]) > mb[j] * (1 + slack) + slack
            hi = np.where(dead, -np.inf, hi)
    kmin = np.ceil(lo - offset[N - 1] - slack)
    kmax = np.floor(hi - offset[N - 1] + slack)
    ok = kmax >= kmin
    heads, kmin, kmax = heads[ok], kmin[ok].astype(np.int64), kmax[ok].astype(np.int64)
    reps = kmax - kmin + 1
    keys = np.repeat(heads, reps, axis=0)
    starts = np.repeat(kmin - np.concatenate([[0], np.cumsum(reps)[:-1]]), reps)
    last = starts + np.arange(int(reps.sum()))
    keys = np.column_stack([keys, last]).astype(np.int64)
    x = (keys + offset) @ R.T / m
    keep = np.all(np.abs(x) <= bound, axis=1)
    return keys[keep]
