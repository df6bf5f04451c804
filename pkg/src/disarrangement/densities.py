"""Closed-form relaxed disarrangement densities and their integrals.

For the interfacial density ``|xi . nu|`` the relaxed bulk density is
``|tr(A - B)|`` and the interfacial one is unchanged; positive and negative
parts relax to the positive and negative parts. The density ``|xi . a|``
relaxes to ``|(B - A)^T a|`` in the bulk.

A discrete structured deformation is a :class:`StructuredDeformationMesh`:
convex cells carrying an affine ``g`` and a constant ``G``, plus declared
jump faces. The validator reconstructs each declared jump from the two
adjacent cells and rejects inconsistent declarations.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from . import geometry as geo
from .errors import DimensionMismatch, DisarrangementError, JumpConsistencyError, UnsupportedDimension
from .tensor import as_matrix, as_vector, negative_part, positive_part, row_max_norm

VARIANTS = ("abs", "plus", "minus")
JUMP_TOL = 1e-12


def _apply_variant(t, variant):
    if variant == "abs":
        return abs(t)
    if variant == "plus":
        return positive_part(t)
    if variant == "minus":
        return negative_part(t)
    raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def _same_dim(A, B):
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatch(f"A is {A.shape}, B is {B.shape}")
    return A, B


def relaxed_bulk(A, B, variant="abs"):
    """``|tr(A - B)|`` or ``(tr(A - B))^+-``."""
    A, B = _same_dim(A, B)
    return float(_apply_variant(np.trace(A - B), variant))


def relaxed_interfacial(xi, nu, variant="abs"):
    """``|xi . nu|`` or ``(xi . nu)^+-``; ``nu`` must be a unit vector."""
    nu = as_vector(nu, "nu")
    xi = as_vector(xi, "xi", dim=nu.size)
    if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
        raise DisarrangementError(f"nu must be a unit vector, |nu| = {np.linalg.norm(nu)!r}")
    return float(_apply_variant(xi @ nu, variant))


def directional_interfacial(xi, a):
    """``|xi . a|``, the initial density whose bulk relaxation is ``|(B - A)^T a|``."""
    a = as_vector(a, "a")
    xi = as_vector(xi, "xi", dim=a.size)
    return float(abs(xi @ a))


def relaxed_bulk_directional(A, B, a):
    """``|(B - A)^T a|`` with ``((B - A)^T a)_j = sum_i (B - A)[i, j] a_i``.

    For ``a = delta_i`` this is the norm of row ``i`` of ``B - A``, so the
    maximum over the standard basis is :func:`~disarrangement.tensor.row_max_norm`.
    """
    A, B = _same_dim(A, B)
    a = as_vector(a, "a", dim=A.shape[0])
    return float(np.linalg.norm((B - A).T @ a))


# --------------------------------------------------------------------- mesh


@dataclass
class Cell:
    vertices: np.ndarray
    grad_g: np.ndarray
    offset_g: np.ndarray
    G: np.ndarray
    _hull: ConvexHull = field(default=None, repr=False, compare=False)

    @property
    def hull(self):
        if self._hull is None:
            self._hull = ConvexHull(self.vertices)
        return self._hull

    @property
    def volume(self):
        return float(self.hull.volume)

    def g(self, x):
        return np.asarray(x, dtype=float) @ self.grad_g.T + self.offset_g

    def contains(self, x, tol):
        eq = self.hull.equations
        return bool(np.all(eq[:, :-1] @ x + eq[:, -1] <= tol))


@dataclass
class JumpFace:
    """A flat face with unit normal and declared jump ``[g](x) = jump_const + jump_grad x``."""

    vertices: np.ndarray
    normal: np.ndarray
    jump_const: np.ndarray
    jump_grad: np.ndarray
    plus_cell: int = -1
    minus_cell: int = -1

    def jump(self, x):
        return np.asarray(x, dtype=float) @ self.jump_grad.T + self.jump_const

    def normal_jump_affine(self):
        """``[g] . nu`` as ``(grad, const)``."""
        return self.jump_grad.T @ self.normal, float(self.jump_const @ self.normal)


def disarrangement_tensor(cell):
    """``M = grad g - G`` on one cell."""
    return cell.grad_g - cell.G


def _order_polygon(V, normal):
    """Cyclic order of the vertices of a planar convex polygon."""
    c = V.mean(axis=0)
    helper = np.eye(3)[np.argmin(np.abs(normal))]
    e1 = np.cross(normal, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    ang = np.arctan2((V - c) @ e2, (V - c) @ e1)
    return V[np.argsort(ang, kind="stable")]


class StructuredDeformationMesh:
    """Cells with affine ``g`` and constant ``G`` plus declared jump faces.

    Construction validates the mesh: positive cell volumes, pairwise
    non-overlapping cells, flat faces orthogonal to unit normals, and each
    declared jump equal to ``g(plus side) - g(minus side)`` to ``1e-12``.
    """

    def __init__(self, dim, cells, jump_faces=(), check_overlap=True):
        if dim not in (2, 3):
            raise UnsupportedDimension(f"meshes need dim 2 or 3, got {dim}")
        self.dim = int(dim)
        self.cells = [self._make_cell(c) for c in cells]
        self.jump_faces = [self._make_face(f) for f in jump_faces]
        if not self.cells:
            raise DisarrangementError("mesh has no cells")
        allv = np.concatenate([c.vertices for c in self.cells])
        self.scale = float(np.max(allv.max(axis=0) - allv.min(axis=0)))
        for k, c in enumerate(self.cells):
            if not c.volume > 0:
                raise DisarrangementError(f"cell {k} is degenerate")
        if check_overlap:
            self._check_overlap()
        for f in self.jump_faces:
            self._attach(f)

    def _make_cell(self, c):
        if isinstance(c, Cell):
            return c
        N = self.dim
        V = np.array(c["vertices"], dtype=float)
        if V.ndim != 2 or V.shape[1] != N:
            raise DimensionMismatch(f"cell vertices must be points in R^{N}")
        grad = as_matrix(np.reshape(c["grad_g"], (N, N)), "grad_g")
        off = as_vector(c.get("offset_g", np.zeros(N)), "offset_g", dim=N)
        G = as_matrix(np.reshape(c["G"], (N, N)), "G")
        return Cell(V, grad, off, G)

    def _make_face(self, f):
        if isinstance(f, JumpFace):
            return f
        N = self.dim
        V = np.array(f["vertices"], dtype=float)
        if V.ndim != 2 or V.shape[1] != N:
            raise DimensionMismatch(f"face vertices must be points in R^{N}")
        nu = as_vector(f["normal"], "normal", dim=N)
        if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
            raise DisarrangementError("face normal must be a unit vector")
        const = as_vector(f.get("jump_const", np.zeros(N)), "jump_const", dim=N)
        grad = as_matrix(np.reshape(f.get("jump_grad", np.zeros((N, N))), (N, N)), "jump_grad")
        if N == 3 and len(V) > 3:
            V = _order_polygon(V, nu)
        return JumpFace(V, nu, const, grad)

    def _check_overlap(self):
        boxes = [(c.vertices.min(axis=0), c.vertices.max(axis=0)) for c in self.cells]
        tol = 1e-9 * self.scale
        for i in range(len(self.cells)):
            for j in range(i + 1, len(self.cells)):
                (lo1, hi1), (lo2, hi2) = boxes[i], boxes[j]
                if np.any(lo1 >= hi2 - tol) or np.any(lo2 >= hi1 - tol):
                    continue
                if self._interiors_meet(self.cells[i], self.cells[j], tol):
                    raise DisarrangementError(f"cells {i} and {j} overlap")

    def _interiors_meet(self, a, b, tol):
        # largest t with a ball-like margin t inside both hulls
        eq = np.vstack([a.hull.equations, b.hull.equations])
        A_ub = np.hstack([eq[:, :-1], np.ones((len(eq), 1))])
        res = linprog(
            c=np.r_[np.zeros(self.dim), -1.0],
            A_ub=A_ub,
            b_ub=-eq[:, -1],
            bounds=[(None, None)] * self.dim + [(None, self.scale)],
            method="highs",
        )
        return res.status == 0 and -res.fun > tol

    def _attach(self, f):
        V = f.vertices
        if len(V) < self.dim:
            raise DisarrangementError("jump face has too few vertices")
        flat = np.abs((V - V[0]) @ f.normal)
        if np.max(flat) > 1e-12 * max(self.scale, 1.0):
            raise DisarrangementError("jump face vertices are not orthogonal to its normal")
        c = V.mean(axis=0)
        delta = 1e-7 * self.scale
        tol = 1e-12 * self.scale
        plus = [k for k, cell in enumerate(self.cells) if cell.contains(c + delta * f.normal, tol)]
        minus = [k for k, cell in enumerate(self.cells) if cell.contains(c - delta * f.normal, tol)]
        if len(plus) != 1 or len(minus) != 1 or plus[0] == minus[0]:
            raise JumpConsistencyError(
                f"jump face at {c.tolist()} does not separate two cells of the mesh"
            )
        f.plus_cell, f.minus_cell = plus[0], minus[0]
        cp, cm = self.cells[f.plus_cell], self.cells[f.minus_cell]
        expected = cp.g(V) - cm.g(V)
        declared = f.jump(V)
        size = 1.0 + np.max(np.abs(expected))
        err = float(np.max(np.abs(expected - declared)))
        if err > JUMP_TOL * size:
            raise JumpConsistencyError(
                f"declared jump differs from g(+) - g(-) by {err:.3e} on face at {c.tolist()}"
            )

    # -------------------------------------------------------------- queries

    def region(self, cell_ids=None):
        if cell_ids is None:
            return list(range(len(self.cells)))
        ids = [int(k) for k in cell_ids]
        bad = [k for k in ids if not 0 <= k < len(self.cells)]
        if bad:
            raise DisarrangementError(f"unknown cell ids {bad}")
        return sorted(set(ids))

    def faces_in(self, ids):
        """Faces with both neighbours in the region (faces on its boundary are excluded)."""
        s = set(ids)
        return [f for f in self.jump_faces if f.plus_cell in s and f.minus_cell in s]

    def face_integrals(self, faces):
        """``(int |[g] . nu|, int [g] . nu)`` for each face."""
        if not faces:
            return np.zeros(0), np.zeros(0)
        width = max(len(f.vertices) for f in faces)
        P = np.stack([np.concatenate([f.vertices, np.repeat(f.vertices[-1:], width - len(f.vertices), 0)]) for f in faces])
        counts = np.array([len(f.vertices) for f in faces])
        aff = [f.normal_jump_affine() for f in faces]
        grad = np.array([g for g, _ in aff])
        const = np.array([k for _, k in aff])
        return (
            geo.integrate_affine(P, counts, grad, const),
            geo.integrate_affine(P, counts, grad, const, absolute=False),
        )


@dataclass(frozen=True)
class DisarrangementReport:
    """Bulk and interfacial parts of the swept volumes over one region.

    ``trace_total`` is the trace of the limiting jump measure,
    ``int tr M + int [g] . nu``; ``V_+- = V_abs / 2 +- trace_total / 2``.
    """

    bulk_abs: float
    bulk_plus: float
    bulk_minus: float
    interfacial_abs: float
    interfacial_plus: float
    interfacial_minus: float
    V_abs: float
    V_plus: float
    V_minus: float
    trace_bulk: float
    trace_interfacial: float

    @property
    def trace_total(self):
        return self.trace_bulk + self.trace_interfacial

    def identity_residuals(self):
        scale = max(1.0, abs(self.V_abs), abs(self.trace_total))
        return {
            "V_plus": abs(self.V_plus - (0.5 * self.V_abs + 0.5 * self.trace_total)) / scale,
            "V_minus": abs(self.V_minus - (0.5 * self.V_abs - 0.5 * self.trace_total)) / scale,
            "bulk": abs(self.bulk_abs - self.bulk_plus - self.bulk_minus) / scale,
            "interfacial": abs(self.interfacial_abs - self.interfacial_plus - self.interfacial_minus) / scale,
        }


def disarrangement_report(mesh, region_cell_ids=None):
    ids = mesh.region(region_cell_ids)
    vols = np.array([mesh.cells[k].volume for k in ids])
    tr = np.array([np.trace(disarrangement_tensor(mesh.cells[k])) for k in ids])
    absint, signed = mesh.face_integrals(mesh.faces_in(ids))
    fs = geo.stable_sum
    bulk_abs = fs(np.abs(tr) * vols)
    bulk_plus = fs(positive_part(tr) * vols)
    bulk_minus = fs(negative_part(tr) * vols)
    if_abs = fs(absint)
    if_plus = fs(0.5 * (absint + signed))
    if_minus = fs(0.5 * (absint - signed))
    return DisarrangementReport(
        bulk_abs=bulk_abs,
        bulk_plus=bulk_plus,
        bulk_minus=bulk_minus,
        interfacial_abs=if_abs,
        interfacial_plus=if_plus,
        interfacial_minus=if_minus,
        V_abs=bulk_abs + if_abs,
        V_plus=bulk_plus + if_plus,
        V_minus=bulk_minus + if_minus,
        trace_bulk=fs(tr * vols),
        trace_interfacial=fs(signed),
    )


def volume_swept(mesh, region_cell_ids=None, variant="abs"):
    """Minimal volume swept out by disarrangements (``abs``), separations (``plus``) or switches (``minus``)."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    rep = disarrangement_report(mesh, region_cell_ids)
    return {"abs": rep.V_abs, "plus": rep.V_plus, "minus": rep.V_minus}[variant]


def directional_bulk_integral(mesh, a, region_cell_ids=None):
    """``sum over cells of |M_c^T a| vol(c)``."""
    a = as_vector(a, "a", dim=mesh.dim)
    ids = mesh.region(region_cell_ids)
    vals = [np.linalg.norm(disarrangement_tensor(mesh.cells[k]).T @ a) * mesh.cells[k].volume for k in ids]
    return geo.stable_sum(vals)


def rowmax_bulk_integral(mesh, region_cell_ids=None):
    """``sum over cells of ||M_c||_rowmax vol(c)``."""
    ids = mesh.region(region_cell_ids)
    vals = [row_max_norm(disarrangement_tensor(mesh.cells[k])) * mesh.cells[k].volume for k in ids]
    return geo.stable_sum(vals)


def grid_mesh(divisions, lower, upper, cell_data, check_overlap=False):
    """Axis-aligned box grid with every internal face declared as a jump face.

    ``cell_data(index)`` returns ``(grad_g, offset_g, G)`` for the multi-index
    of a cell. Jumps are computed from the two adjacent affine maps.
    """
    divisions = tuple(int(d) for d in divisions)
    N = len(divisions)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    step = (upper - lower) / np.array(divisions)
    index = list(np.ndindex(*divisions))
    pos = {idx: k for k, idx in enumerate(index)}
    corners = np.array(list(np.ndindex(*([2] * N))), dtype=float)
    cells, data = [], []
    for idx in index:
        lo = lower + step * np.array(idx)
        grad, off, G = cell_data(idx)
        data.append((np.asarray(grad, float), np.asarray(off, float)))
        cells.append({"vertices": lo + corners * step, "grad_g": grad, "offset_g": off, "G": G})
    faces = []
    for idx in index:
        for j in range(N):
            nb = list(idx)
            nb[j] += 1
            nb = tuple(nb)
            if nb not in pos:
                continue
            (gm, om), (gp, op) = data[pos[idx]], data[pos[nb]]
            lo = lower + step * np.array(idx)
            face_corners = corners[corners[:, j] == 1.0]
            V = lo + face_corners * step
            faces.append(
                {
                    "vertices": V,
                    "normal": np.eye(N)[j],
                    "jump_const": op - om,
                    "jump_grad": gp - gm,
                }
            )
    return StructuredDeformationMesh(N, cells, faces, check_overlap=check_overlap)
