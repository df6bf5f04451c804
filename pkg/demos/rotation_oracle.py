"""Brute-force searches over rotations agree with the closed-form minimum.

No rotation does better than |tr M|. A 2D angle grid and a seeded random
search in 3D both land on it, and the tilted-cube probe gives an upper
estimate at finite resolution.
"""

import numpy as np

from disarrangement.oracle import infimum_probe, rotation_grid_search_2d, rotation_random_search

rng = np.random.default_rng(7)
M2 = rng.normal(size=(2, 2))
grid = rotation_grid_search_2d(M2, 10_000)
print(f"2D grid:   best {grid.best_value:.12f} at angle {grid.best_parameters:.6f}; |tr M| = {abs(np.trace(M2)):.12f}")

M3 = rng.normal(size=(3, 3))
for trials in (100, 10_000):
    r = rotation_random_search(M3, trials, seed=1)
    print(f"3D random: {trials:>6} trials, best {r.best_value:.6f}; |tr M| = {abs(np.trace(M3)):.6f}")
r = rotation_random_search(M3, 10_000, seed=1, refine=True)
print(f"3D random with local refinement: {r.best_value:.12f}")

probe = infimum_probe(np.diag([1.0, -1.0]), 50, 128)
print(f"tilted-cube probe for diag(1, -1): {probe.best_value:.6f}")
