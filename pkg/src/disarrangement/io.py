"""JSON documents for matrices, meshes and sampled fields.

Matrices are ``{"dim": N, "entries": [...]}`` with entries row-major, flat
or nested. Meshes and fields follow the layouts documented on
:func:`parse_mesh` and :func:`parse_field`. Floats are written with
``repr`` precision so values round-trip exactly.
"""

import json

import numpy as np

from .burgers import OrientedLoop, OrientedSurface, SampledTensorField
from .densities import StructuredDeformationMesh
from .errors import DimensionMismatch, DisarrangementError, ParseError


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def dumps(obj):
    return json.dumps(_plain(obj), indent=2, allow_nan=False)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    return obj


def _numbers(value, what):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what} must be numeric") from exc
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{what} has non-finite entries")
    return arr


def _square(value, dim, what):
    arr = _numbers(value, what)
    if arr.size != dim * dim:
        raise DimensionMismatch(f"{what} has {arr.size} entries, expected {dim * dim}")
    return arr.reshape(dim, dim)


def _require(doc, key, what):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"{what} is missing field {key!r}")
    return doc[key]


def parse_matrix(doc):
    dim = _require(doc, "dim", "matrix document")
    if not isinstance(dim, int) or dim < 1:
        raise ParseError("matrix dim must be a positive integer")
    return _square(_require(doc, "entries", "matrix document"), dim, "matrix entries")


def load_matrix(path):
    return parse_matrix(load_json(path))


def parse_vector(text):
    """Comma-separated components, e.g. ``"1,0,0"``."""
    try:
        return np.array([float(x) for x in str(text).split(",")])
    except ValueError as exc:
        raise ParseError(f"cannot parse vector {text!r}") from exc


def parse_mesh(doc):
    """``{dim, cells: [{vertices, grad_g, offset_g, G}], jump_faces: [{vertices, normal, jump_const, jump_grad}]}``."""
    dim = _require(doc, "dim", "mesh document")
    if not isinstance(dim, int):
        raise ParseError("mesh dim must be an integer")
    cells = []
    for k, c in enumerate(_require(doc, "cells", "mesh document")):
        what = f"cell {k}"
        cells.append(
            {
                "vertices": _numbers(_require(c, "vertices", what), f"{what} vertices"),
                "grad_g": _square(_require(c, "grad_g", what), dim, f"{what} grad_g"),
                "offset_g": _numbers(c.get("offset_g", [0.0] * dim), f"{what} offset_g"),
                "G": _square(_require(c, "G", what), dim, f"{what} G"),
            }
        )
    faces = []
    for k, f in enumerate(doc.get("jump_faces", [])):
        what = f"jump face {k}"
        faces.append(
            {
                "vertices": _numbers(_require(f, "vertices", what), f"{what} vertices"),
                "normal": _numbers(_require(f, "normal", what), f"{what} normal"),
                "jump_const": _numbers(f.get("jump_const", [0.0] * dim), f"{what} jump_const"),
                "jump_grad": _square(f.get("jump_grad", [0.0] * dim * dim), dim, f"{what} jump_grad"),
            }
        )
    return StructuredDeformationMesh(dim, cells, faces)


def mesh_document(mesh):
    return {
        "dim": mesh.dim,
        "cells": [
            {"vertices": c.vertices, "grad_g": c.grad_g.ravel(), "offset_g": c.offset_g, "G": c.G.ravel()}
            for c in mesh.cells
        ],
        "jump_faces": [
            {"vertices": f.vertices, "normal": f.normal, "jump_const": f.jump_const, "jump_grad": f.jump_grad.ravel()}
            for f in mesh.jump_faces
        ],
    }


def parse_field(doc):
    """Field plus geometry.

    ``{origin, spacing, counts, values, loops: [{vertices}], surfaces: [{points, triangles}]}``
    where ``values`` holds 9 row-major numbers per node, nodes ordered with
    the first axis slowest. Loop vertices repeat the first point at the end.
    """
    origin = _numbers(_require(doc, "origin", "field document"), "origin")
    spacing = _numbers(_require(doc, "spacing", "field document"), "spacing")
    counts = _require(doc, "counts", "field document")
    if not (isinstance(counts, list) and len(counts) == 3 and all(isinstance(c, int) and c > 0 for c in counts)):
        raise ParseError("counts must be three positive integers")
    values = _numbers(_require(doc, "values", "field document"), "values")
    if values.size != 9 * int(np.prod(counts)):
        raise DimensionMismatch(f"values has {values.size} numbers, expected {9 * int(np.prod(counts))}")
    if origin.shape != (3,) or spacing.size not in (1, 3):
        raise DimensionMismatch("origin needs 3 components and spacing 1 or 3")
    field = SampledTensorField(origin, spacing, values.reshape(tuple(counts) + (3, 3)))
    loops = [OrientedLoop(_numbers(_require(l, "vertices", "loop"), "loop vertices")) for l in doc.get("loops", [])]
    surfaces = []
    for s in doc.get("surfaces", []):
        pts = _numbers(s.get("points", s.get("vertices")), "surface points")
        tris = _numbers(_require(s, "triangles", "surface"), "surface triangles")
        if np.any(tris != np.round(tris)):
            raise ParseError("triangle indices must be integers")
        surfaces.append(OrientedSurface(pts, tris.astype(int)))
    return field, loops, surfaces


def field_document(field, loops=(), surfaces=()):
    return {
        "origin": field.origin,
        "spacing": field.spacing,
        "counts": list(field.counts),
        "values": field.values.reshape(-1, 9),
        "loops": [{"vertices": l.vertices} for l in loops],
        "surfaces": [{"points": s.points, "triangles": s.triangles} for s in surfaces],
    }


def pick(items, index, what):
    if not 0 <= index < len(items):
        raise DisarrangementError(f"no {what} with index {index} (have {len(items)})")
    return items[index]
