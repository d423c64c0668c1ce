# Copyright 2025 kermits
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Densities, rearrangements and samplers."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from geometry.bodies import EuclideanBall, VPolytope
from geometry.types import DimensionError
from models.densities import (
    GridDensity,
    PointMass,
    ProductDensity,
    TruncatedGaussian,
    UniformOnBody,
    uniform_on_ball_of_volume_one,
)
from models.sampling import sample_matrix, sample_point, sample_points
from rearrangement.grid import GridFunction
from utils.rng import RngStream

UNIT_INTERVAL = UniformOnBody(VPolytope(np.array([[-0.5], [0.5]])))
UNIT_SQUARE = UniformOnBody(VPolytope(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])))


def test_uniform_interval_mean():
    m = 100_000
    x = sample_points(UNIT_INTERVAL, m, RngStream(1))[:, 0]
    sigma = 1.0 / math.sqrt(12.0)
    assert abs(x.mean()) < 4.0 * sigma / math.sqrt(m)
    assert np.all(np.abs(x) <= 0.5)


def test_uniform_disk_squared_radius():
    m = 50_000
    r2 = np.sum(sample_points(UniformOnBody(EuclideanBall.centered(2)), m, RngStream(2)) ** 2, axis=1)
    assert abs(r2.mean() - 0.5) < 4.0 * r2.std(ddof=1) / math.sqrt(m)


def test_grid_density_cell_frequencies():
    grid = GridFunction(1, 3, 1.0, np.array([0.25, 0.75, 0.0]))
    f = GridDensity.from_grid(grid)
    m = 40_000
    x = sample_points(f, m, RngStream(3))[:, 0]
    left = np.mean(x < -0.5)
    assert abs(left - 0.25) < 4.0 * math.sqrt(0.25 * 0.75 / m)
    assert np.all(x < 0.5)


def test_grid_rearrangement_is_equimeasurable():
    grid = GridFunction(1, 5, 0.5, np.array([0.0, 0.1, 0.2, 0.9, 0.8]))
    f = GridDensity.from_grid(grid)
    g = f.rearranged()
    assert_allclose(np.sort(g.grid.values.ravel()), np.sort(f.grid.values.ravel()))
    assert g.sup_bound == f.sup_bound


def test_uniform_rearrangement_is_ball_of_same_volume():
    g = UNIT_SQUARE.rearranged()
    assert isinstance(g.body, EuclideanBall)
    assert_allclose(g.body.radius, 1.0 / math.sqrt(math.pi))
    assert_allclose(g.sup_bound, UNIT_SQUARE.sup_bound)


def test_ball_of_volume_one():
    f = uniform_on_ball_of_volume_one(2)
    assert_allclose(f.body.radius, math.pi ** -0.5)
    assert_allclose(f.sup_bound, 1.0)


def test_truncated_gaussian_bound_and_support():
    f = TruncatedGaussian(2, 0.45)
    assert_allclose(f.radius, 3.6)
    assert f.sup_bound < 1.0
    x = sample_points(f, 2000, RngStream(4))
    assert np.all(np.linalg.norm(x, axis=1) <= 3.6 + 1e-12)
    shifted = TruncatedGaussian(2, 0.45, center=np.array([1.0, 0.0]))
    assert not np.any(shifted.rearranged().center)


def test_product_density_samples_blocks_and_rearranges_factors():
    f = ProductDensity((UNIT_INTERVAL, TruncatedGaussian(1, 0.5)))
    assert f.n == 2
    x = sample_points(f, 500, RngStream(5))
    assert np.all(np.abs(x[:, 0]) <= 0.5)
    assert isinstance(f.factor_rearranged().factors[1], TruncatedGaussian)


def test_point_mass_rearranges_to_origin():
    f = PointMass(np.array([1.0, 2.0]))
    assert_allclose(sample_point(f, RngStream(6)), [1.0, 2.0])
    assert_allclose(f.rearranged().point, [0.0, 0.0])
    assert math.isinf(f.sup_bound)


def test_ball_columns_stay_in_volume_one_ball():
    X = sample_matrix([uniform_on_ball_of_volume_one(2)] * 3, RngStream(7))
    assert X.N == 3
    assert np.all(np.linalg.norm(X.columns, axis=1) <= math.pi ** -0.5 + 1e-12)


def test_sample_matrix_is_deterministic():
    fs = [UNIT_SQUARE, TruncatedGaussian(2, 1.0)]
    first = sample_matrix(fs, RngStream(8).child(3))
    second = sample_matrix(fs, RngStream(8).child(3))
    assert np.array_equal(first.entries, second.entries)


def test_columns_are_uncorrelated():
    m = 5000
    gen = RngStream(9).generator()
    fs = [UNIT_SQUARE, TruncatedGaussian(2, 1.0)]
    draws = np.array([sample_matrix(fs, gen).entries for _ in range(m)])
    corr = np.corrcoef(draws[:, 0, 0], draws[:, 0, 1])[0, 1]
    assert abs(corr) < 4.0 / math.sqrt(m)


def test_sample_matrix_rejects_mixed_dimensions():
    with pytest.raises(DimensionError):
        sample_matrix([UNIT_INTERVAL, UNIT_SQUARE], RngStream(10))
