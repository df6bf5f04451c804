import numpy as np
import pytest

from disarrangement.errors import DisarrangementError, UnsupportedDimension
from disarrangement.frames import minimizing_rotation, rotation_objective
from disarrangement.oracle import (
    infimum_probe,
    random_rotations,
    rotation_2d,
    rotation_grid_search_2d,
    rotation_random_search,
)


def test_grid_search_examples():
    M = np.diag([2.0, -1.0])
    r = rotation_grid_search_2d(M, 10_000, refine=False)
    assert 1.0 - 1e-12 <= r.best_value <= 1.0 + 1e-4 * np.linalg.norm(M)
    K = np.array([[1.0, 3.0], [0.5, -1.0]])
    assert rotation_grid_search_2d(K, 10_000, refine=False).best_value <= 1e-3 * np.linalg.norm(K)
    for res in (2, 7, 100):
        assert rotation_grid_search_2d(np.eye(2), res).best_value == pytest.approx(2.0)


def test_grid_search_errors():
    with pytest.raises(UnsupportedDimension):
        rotation_grid_search_2d(np.eye(3), 10)
    with pytest.raises(DisarrangementError):
        rotation_grid_search_2d(np.eye(2), 1)


def test_grid_and_closed_form_agree():
    rng = np.random.default_rng(0)
    for _ in range(100):
        M = rng.normal(size=(2, 2))
        grid = rotation_grid_search_2d(M, 10_000, refine=False).best_value
        assert abs(grid - minimizing_rotation(M).objective) <= 1e-3 * (np.linalg.norm(M) + 1)


def test_grid_parameter_reproduces_value():
    M = np.array([[0.3, -1.2], [0.7, 2.0]])
    r = rotation_grid_search_2d(M, 500)
    assert rotation_objective(M, rotation_2d(r.best_parameters)) == pytest.approx(r.best_value, abs=1e-15)


def test_random_rotations_are_haar_like():
    Rs = random_rotations(3, 20_000, 0)
    assert np.allclose(np.einsum("kji,kjl->kil", Rs, Rs), np.eye(3), atol=1e-12)
    assert np.allclose(np.linalg.det(Rs), 1.0)
    # E[R] = 0 for the Haar measure on SO(3)
    assert np.max(np.abs(Rs.mean(axis=0))) < 0.03


def test_random_search_examples():
    for N in (2, 3, 4):
        assert rotation_random_search(np.eye(N), 50, seed=1).best_value == pytest.approx(N)
    rng = np.random.default_rng(3)
    M = rng.normal(size=(3, 3))
    r = rotation_random_search(M, 100_000, seed=7, refine=True)
    assert abs(r.best_value - abs(np.trace(M))) <= 1e-3 * (np.linalg.norm(M) + 1)
    assert len(r.best_parameters) == 4
    assert np.linalg.norm(r.best_parameters) == pytest.approx(1.0)


def test_random_search_is_deterministic_and_monotone():
    M = np.random.default_rng(4).normal(size=(3, 3))
    assert rotation_random_search(M, 3000, seed=11) == rotation_random_search(M, 3000, seed=11)
    prev = np.inf
    for t in (1, 10, 100, 1000, 5000, 10_000):
        val = rotation_random_search(M, t, seed=11).best_value
        assert val <= prev
        prev = val
    assert np.array_equal(random_rotations(3, 10, 5), random_rotations(3, 5000, 5)[:10])


def test_lower_bound_never_violated():
    rng = np.random.default_rng(5)
    for N in (2, 3, 4):
        Rs = random_rotations(N, 2000, N)
        for _ in range(5):
            M = rng.normal(size=(N, N))
            from disarrangement.frames import rotation_objectives

            vals = rotation_objectives(M, Rs)
            assert np.all(vals >= abs(np.trace(M)) - 1e-9 * (np.linalg.norm(M) + 1))


def test_infimum_probe():
    assert infimum_probe(np.zeros((2, 2)), 10, 8).best_value == 0.0
    M = np.diag([1.0, -1.0])
    assert infimum_probe(M, 50, 128).best_value <= 0.1 * np.linalg.norm(M)
    rng = np.random.default_rng(6)
    A = rng.normal(size=(2, 2))
    vals = [infimum_probe(A, 20, m).best_value for m in (8, 16, 32, 64)]
    assert all(v >= abs(np.trace(A)) - 1e-9 for v in vals)
    # the minimizing rotation is one member of a wider family; widening cannot raise the minimum
    family = [minimizing_rotation(A).R] + list(random_rotations(2, 3, 1))
    offsets = [np.zeros(2), np.array([0.5, 0.5])]
    wide = infimum_probe(A, 20, 16, offsets=offsets, rotations=family)
    assert wide.best_value <= vals[1] + 1e-15
    assert wide.evaluations == 8
    with pytest.raises(UnsupportedDimension):
        infimum_probe(np.eye(4), 10, 4)


def test_probe_rise_under_refinement_stays_within_bounds():
    from disarrangement.tilted import interfacial_energy

    rng = np.random.default_rng(8)
    for _ in range(8):
        A = rng.normal(size=(2, 2))
        rows = [interfacial_energy(A, 50, m) for m in (8, 16, 32, 64, 128)]
        for coarse, fine in zip(rows, rows[1:]):
            rise = fine.upper_estimate() - coarse.upper_estimate()
            assert rise <= fine.total_bound + fine.density * (fine.interior_volume - coarse.interior_volume) + 1e-12


@pytest.mark.xfail(strict=True, reason="not monotone in general: one sampled matrix rises from m=32 to m=64")
def test_probe_nonincreasing_as_m_doubles():
    rng = np.random.default_rng(8)
    for _ in range(8):
        A = rng.normal(size=(2, 2))
        vals = [infimum_probe(A, 50, m).best_value for m in (8, 16, 32, 64, 128)]
        assert np.all(np.diff(vals) <= 1e-15)
