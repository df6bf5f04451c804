"""Isotropic frames and the rotation that minimizes the normal-jump sum.

A symmetric traceless matrix admits an orthonormal basis on which its quadratic
form vanishes. Shifting sym(M) by its mean eigenvalue gives such a matrix, and
its isotropic basis is a rotation R with sum_i |sym(M) R e_i . R e_i| = |tr M|.
"""

from pathlib import Path

import numpy as np

from disarrangement import isotropic_frame, minimizing_rotation
from disarrangement.frames import rotation_objectives
from disarrangement.io import load_matrix
from disarrangement.oracle import random_rotations

A = load_matrix(Path(__file__).parent / "data" / "traceless.json")
frame = isotropic_frame(A)
print("traceless matrix A:\n", A)
print("frame vectors (columns):\n", np.round(frame.vectors, 6))
print("A v . v for each vector:", frame.residuals)
print("orthogonality error:", frame.orthogonality_error())

M = np.array([[1.0, 2.0, 0.0], [-0.5, 0.3, 1.0], [0.0, 0.4, -0.1]])
best = minimizing_rotation(M)
print("\nM =\n", M)
print("|tr M| =", abs(np.trace(M)))
print("objective at the minimizing rotation:", best.objective)
print("per-term values (each tr M / N):", best.per_term)

vals = rotation_objectives(M, random_rotations(3, 10_000, seed=0))
print(f"objective over 10000 random rotations: min {vals.min():.6f}, max {vals.max():.6f}")
