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
"""Grid functions, symmetrization and rearrangement inequalities."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from geometry.bodies import VPolytope
from geometry.operations import is_origin_symmetric
from geometry.types import DimensionError, HypothesisError, LabError, QuadratureError
from models.densities import TruncatedGaussian, UniformOnBody
from rearrangement.grid import (
    GridFunction,
    disk_indicator,
    ellipse_indicator,
    interval_indicator,
    read_grid,
    write_grid,
)
from rearrangement.inequalities import (
    bll_check,
    is_unimodal,
    kanter_check,
    peakedness_compare,
    random_symmetric_polygons,
)
from rearrangement.symmetrization import (
    SymmetrizationStep,
    iterate_symmetrizations,
    sdr,
    steiner_symmetral,
)
from utils.rng import RngStream


def _interval(a: float) -> VPolytope:
    return VPolytope(np.array([[-a], [a]]))


# ==================== GRID FUNCTIONS ====================

def test_grid_rejects_even_cells_and_negative_values():
    with pytest.raises(DimensionError):
        GridFunction(1, 4, 0.1, np.zeros(4))
    with pytest.raises(LabError):
        GridFunction(1, 3, 0.1, np.array([0.0, -1.0, 0.0]))


def test_lookup_is_zero_outside():
    g = interval_indicator(-0.5, 0.5, 21, 0.1)
    assert_allclose(g.lookup(np.array([[0.0], [5.0], [-5.0]])), [1.0, 0.0, 0.0])


def test_ellipse_area():
    g = ellipse_indicator([0.0, 0.0], [1.5, 0.5], math.pi / 6, 201, 0.02)
    assert_allclose(g.mass, math.pi * 1.5 * 0.5, rtol=0.03)


def test_grid_text_round_trip():
    g = disk_indicator([0.1, -0.2], 0.4, 11, 0.1, height=0.3)
    back = read_grid(write_grid(g))
    assert (back.n, back.cells, back.h) == (g.n, g.cells, g.h)
    assert np.array_equal(back.values, g.values)


def test_grid_text_with_wrong_count():
    with pytest.raises(LabError, match="Expected 9"):
        read_grid("2 3 0.5\n1 2 3\n")


# ==================== SYMMETRIZATION ====================

def test_sdr_centers_an_off_center_interval():
    g = interval_indicator(0.5, 1.5, 21, 0.2)
    assert np.array_equal(sdr(g).values, interval_indicator(-0.5, 0.5, 21, 0.2).values)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.5])
def test_sdr_preserves_norms(p):
    g = disk_indicator([0.7, 0.3], 0.5, 31, 0.1, height=2.0)
    assert_allclose(sdr(g).norm(p), g.norm(p))


def test_sdr_is_idempotent():
    values = RngStream(1).generator().random((9, 9))
    once = sdr(GridFunction(2, 9, 0.25, values))
    assert np.array_equal(sdr(once).values, once.values)


def test_steiner_symmetral_is_idempotent_and_mass_preserving():
    g = disk_indicator([0.8, 0.5], 0.6, 41, 0.1)
    once = steiner_symmetral(g, 0)
    assert_allclose(once.mass, g.mass)
    assert np.array_equal(steiner_symmetral(once, 0).values, once.values)


def test_steiner_axis_out_of_range():
    with pytest.raises(DimensionError):
        steiner_symmetral(interval_indicator(-0.5, 0.5, 11, 0.1), 1)


def test_iterated_symmetrization_approaches_rearrangement():
    g = disk_indicator([0.8, 0.5], 0.6, 41, 0.1)
    result = iterate_symmetrizations(g, [SymmetrizationStep(0), SymmetrizationStep(1)], tol=1e-9, max_iter=6)
    assert result.history[-1] < 0.5 * result.history[0]
    assert len(result.history) <= 7
    assert result.resampled_steps == []
    assert_allclose(result.target_mass, g.mass)


def test_rotated_steps_are_flagged_and_keep_mass():
    g = ellipse_indicator([0.3, 0.0], [0.8, 0.3], 0.4, 41, 0.1)
    result = iterate_symmetrizations(g, [SymmetrizationStep(0, 30.0)], tol=1e-9, max_iter=3)
    assert result.resampled_steps == [1, 2, 3]
    assert_allclose(result.grid.mass, g.mass, rtol=1e-9)


def test_empty_schedule_rejected():
    with pytest.raises(LabError):
        iterate_symmetrizations(interval_indicator(-0.5, 0.5, 11, 0.1), [], tol=1e-3, max_iter=5)


# ==================== INEQUALITIES ====================

def test_bll_rearrangement_increases_disjoint_overlap():
    fs = [interval_indicator(0.2, 0.8, 41, 0.05), interval_indicator(-0.8, -0.2, 41, 0.05)]
    result = bll_check(fs, [[1.0], [1.0]])
    assert result.lhs == 0.0
    assert result.rhs > 0.3
    assert result.holds


def test_bll_limits():
    f = interval_indicator(-0.5, 0.5, 11, 0.1)
    with pytest.raises(QuadratureError):
        bll_check([f], [[1.0, 0.0, 0.0, 0.0]])
    with pytest.raises(LabError):
        bll_check([f, f], [[1.0]])


def test_narrow_gaussian_is_more_peaked():
    narrow, wide = TruncatedGaussian(1, 0.3), TruncatedGaussian(1, 1.0)
    bodies = [_interval(a) for a in (0.2, 0.5, 1.0)]
    assert peakedness_compare(narrow, wide, bodies, cells=2000).verdict == "consistent"
    assert peakedness_compare(wide, narrow, bodies, cells=2000).verdict == "violated"


def test_peakedness_needs_symmetric_bodies():
    f = TruncatedGaussian(1, 1.0)
    with pytest.raises(HypothesisError):
        peakedness_compare(f, f, [VPolytope(np.array([[0.0], [1.0]]))], cells=100)


def test_unimodality():
    assert is_unimodal(TruncatedGaussian(2, 1.0))
    assert is_unimodal(UniformOnBody(_interval(1.0)))
    assert not is_unimodal(TruncatedGaussian(1, 1.0, center=np.array([0.3])))


def test_kanter_product_preserves_peakedness():
    f1 = UniformOnBody(_interval(0.5))
    f2 = UniformOnBody(_interval(1.0))
    bodies = random_symmetric_polygons(4, RngStream(2), scale=0.4)
    report = kanter_check(f1, f2, TruncatedGaussian(1, 0.5), bodies, cells=200)
    assert report.verdict == "consistent"
    assert all(m > 0 for m in report.margins)


def test_kanter_rejects_non_unimodal_factor():
    f1 = UniformOnBody(_interval(0.5))
    with pytest.raises(HypothesisError):
        kanter_check(f1, f1, TruncatedGaussian(1, 0.5, center=np.array([0.3])), [], cells=50)


def test_random_polygons_are_symmetric():
    polygons = random_symmetric_polygons(5, RngStream(3))
    assert len(polygons) == 5
    assert all(is_origin_symmetric(p) for p in polygons)
