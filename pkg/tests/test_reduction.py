"""PCA order reduction: interval hulls, parallelotope volumes, containment
of the input zonotope, and the per-dimension stretch score."""

import math

import numpy as np
import pytest

from polyvol.bodies import Zonotope
from polyvol.errors import NumericError
from polyvol.estimate import VolumeConfig
from polyvol.oracles import exact_zonotope
from polyvol.reduction import (
    FitnessResult,
    fitness,
    interval_hull,
    parallelotope_volume_log,
    pca_reduce,
)


def rotation(d, seed):
    q, r = np.linalg.qr(np.random.default_rng(seed).normal(size=(d, d)))
    return q * np.sign(np.diag(r))


class TestIntervalHull:
    def test_identity(self):
        assert np.array_equal(interval_hull(np.eye(2)), np.eye(2))

    def test_shear(self):
        hull = interval_hull(np.array([[1.0, 1.0], [0.0, 1.0]]))
        assert np.array_equal(hull, np.diag([2.0, 1.0]))

    def test_absolute_values(self):
        assert np.array_equal(interval_hull(np.array([[-3.0, 1.0]])), [[4.0]])


class TestPcaReduce:
    def test_axis_aligned_box_is_reproduced(self):
        z = Zonotope(np.diag([2.0, 3.0]))
        red = pca_reduce(z)
        assert parallelotope_volume_log(red.g_red) == pytest.approx(
            math.log(24.0), rel=1e-9)

    def test_rotated_parallelotope_is_recovered_exactly(self):
        q = rotation(3, 7)
        z = Zonotope(q @ np.diag([1.0, 2.0, 3.0]))
        red = pca_reduce(z)
        assert parallelotope_volume_log(red.g_red) == pytest.approx(
            exact_zonotope(z), rel=1e-9)

    def test_reduction_contains_the_zonotope(self):
        rng = np.random.default_rng(11)
        g = rng.normal(size=(3, 8))
        z = Zonotope(g)
        red = pca_reduce(z)
        lam = rng.uniform(-1.0, 1.0, size=(10_000, 8))
        pts = lam @ g.T
        assert np.all(red.contains_many(pts))

    def test_rank_deficient_generators_rejected(self):
        g = np.array([[1.0, 2.0, -1.0], [2.0, 4.0, -2.0]])
        with pytest.raises(NumericError):
            pca_reduce(Zonotope(g))


class TestParallelotopeVolumeLog:
    def test_unit_cube(self):
        assert parallelotope_volume_log(np.eye(2)) == pytest.approx(math.log(4.0))

    def test_diagonal(self):
        assert parallelotope_volume_log(np.diag([1.0, 2.0, 3.0])) == pytest.approx(
            math.log(48.0))

    def test_matches_exact_zonotope_volume(self):
        g = np.random.default_rng(3).normal(size=(3, 3))
        assert parallelotope_volume_log(g) == pytest.approx(
            exact_zonotope(Zonotope(g)), rel=1e-9)

    def test_singular_matrix_warns(self):
        g = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.warns(UserWarning):
            assert parallelotope_volume_log(g) == -math.inf

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            parallelotope_volume_log(np.ones((2, 3)))


class TestFitness:
    def test_score_reflects_over_approximation(self):
        z = Zonotope(np.random.default_rng(19).normal(size=(4, 8)))
        cfg = VolumeConfig(seed=5)
        result = fitness(z, cfg)
        assert isinstance(result, FitnessResult)
        # the parallelotope contains z, so R can dip under 1 only through
        # estimator noise on vol(z)
        assert result.r >= 1.0 - 2.0 * cfg.epsilon
        assert result.vol_red_log >= result.vol_p_log - 2.0 * cfg.epsilon
        assert result.report.representation == "z"

    def test_parallelotope_scores_near_one(self):
        z = Zonotope(rotation(4, 23) @ np.diag([1.0, 1.5, 2.0, 2.5]))
        result = fitness(z, VolumeConfig(seed=6))
        assert 0.95 <= result.r <= 1.05
        assert result.vol_red_log == pytest.approx(exact_zonotope(z), rel=1e-9)

    def test_rotation_leaves_score_unchanged(self):
        g = np.random.default_rng(29).normal(size=(3, 6))
        base = fitness(Zonotope(g), VolumeConfig(seed=7)).r
        rotated = fitness(Zonotope(rotation(3, 31) @ g), VolumeConfig(seed=7)).r
        assert abs(base - rotated) <= 0.1
