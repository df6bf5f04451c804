"""Burgers vector of a sampled field by line and by surface integral.

The stored field has third row (y, 0, 0), whose curl is constant, so both
integrals over the unit square give (0, 0, -1). A smooth nonlinear field then
shows the Stokes residual falling like h^2.
"""

from pathlib import Path

import numpy as np

from disarrangement.burgers import SampledTensorField, burgers_report, planar_patch, stokes_residual
from disarrangement.io import load_json, parse_field

field, loops, surfaces = parse_field(load_json(Path(__file__).parent / "data" / "shear_field.json"))
rep = burgers_report(field, loops[0], surfaces[0])
print("line integral   ", np.round(rep["line_integral"], 12))
print("surface integral", np.round(rep["surface_integral"], 12))


def wavy(X, Y, Z):
    V = np.zeros(X.shape + (3, 3))
    V[..., 0, 1] = np.cos(X * Z)
    V[..., 1, 2] = np.exp(0.5 * X) * Y * Y
    V[..., 2, 0] = np.sin(X + Y)
    return V


loop, surf = planar_patch([[0, 0, 0], [1, 0, 0.5], [1, 1, 1], [0, 1, 0.5]])
prev = None
for k in range(4):
    h = 0.25 / 2**k
    n = int(round(1.5 / h)) + 1
    res = stokes_residual(SampledTensorField.from_function(wavy, [-0.25] * 3, h, (n, n, n)), loop, surf)
    order = "" if prev is None else f"  order {np.log2(prev / res):.2f}"
    print(f"h = {h:.5f}: residual {res:.3e}{order}")
    prev = res
