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
"""Dominance, rearrangement and operator norm services."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from geometry.bodies import EuclideanBall, VPolytope
from geometry.coefficients import CrossPolytope, GenericV, LqBall, Simplex, SimplexWithOrigin
from geometry.types import CoefficientSetError, DimensionError, HypothesisError, LabError
from models.densities import PointMass, TruncatedGaussian, UniformOnBody
from models.functionals import FunctionalSpec
from models.operator_norms import NormedSpaceSpec
from services.dominance_service import dominance_service
from services.operator_norm_service import operator_norm_service
from services.rearrangement_service import build_schedule, rearrangement_service
from utils.rng import RngStream

DISK = UniformOnBody(EuclideanBall.centered(2))
SQUARE = VPolytope(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))
CENTERED_INTERVAL = UniformOnBody(VPolytope(np.array([[-0.5], [0.5]])))


# ==================== DOMINANCE SERVICE ====================

def test_expected_triangle_area_with_disk_columns():
    spec = FunctionalSpec("volume", coefficients=SimplexWithOrigin(2))
    dist = dominance_service.run_ensemble([DISK, DISK], "X", spec, 4000, RngStream(1))
    assert abs(dist.mean - 4.0 / (9.0 * math.pi)) < 4.0 * dist.stderr
    assert dist.systematic == 0.0


@pytest.mark.slow
def test_replicas_do_not_depend_on_worker_count():
    spec = FunctionalSpec("intrinsic", coefficients=Simplex(3), j=1)
    single = dominance_service.run_ensemble([DISK] * 3, "X", spec, 300, RngStream(2), workers=1)
    pooled = dominance_service.run_ensemble([DISK] * 3, "X", spec, 300, RngStream(2), workers=2)
    assert np.array_equal(single.values, pooled.values)


def test_z_ensemble_needs_bounded_densities():
    with pytest.raises(HypothesisError):
        dominance_service.ensemble_densities([TruncatedGaussian(2, 0.1)], "Z")


def test_z_ensemble_flags_conditional_coefficients():
    _, supported = dominance_service.ensemble_densities([DISK], "Z", Simplex(1))
    assert not supported
    densities, supported = dominance_service.ensemble_densities([DISK], "Z", CrossPolytope(1))
    assert supported
    assert_allclose(densities[0].sup_bound, 1.0)


def test_point_masses_need_deterministic_mode():
    with pytest.raises(HypothesisError):
        dominance_service.ensemble_densities([PointMass(np.zeros(2))], "X")


def test_lln_empty_schedule_and_bad_exponent():
    assert dominance_service.lln_convergence(SQUARE, "hull", [], RngStream(3)).sizes == []
    with pytest.raises(LabError):
        dominance_service.lln_convergence(SQUARE, "Zp", [10], RngStream(3), p=0.5)
    with pytest.raises(LabError):
        dominance_service.lln_convergence(SQUARE, "hull", [0], RngStream(3))


def test_lln_hull_distance_shrinks():
    series = dominance_service.lln_convergence(SQUARE, "hull", [10, 100, 2000], RngStream(4))
    assert series.sizes == [10, 100, 2000]
    assert series.distances[-1] < series.distances[0]


def test_m_addition_coefficient_kinds():
    positive = dominance_service.m_addition_coefficients(GenericV(np.array([[1.0, 1.0]])), 2, 3)
    assert all(isinstance(p, Simplex) for p in positive.parts)
    unconditional = dominance_service.m_addition_coefficients(LqBall(2, 1.0), 2, 2)
    assert all(isinstance(p, CrossPolytope) for p in unconditional.parts)
    with pytest.raises(CoefficientSetError):
        dominance_service.m_addition_coefficients(Simplex(3), 1, 1)
    with pytest.raises(CoefficientSetError):
        dominance_service.m_addition_coefficients(GenericV(np.array([[1.0, -1.0], [0.5, 0.5]])), 1, 1)


@pytest.mark.parametrize("M, expected", [
    (LqBall(2, 1.0), 2.0),
    (GenericV(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])), 0.5),
], ids=["unconditional", "positive_orthant"])
def test_deterministic_m_addition_matches_direct_m_sum(M, expected):
    # K and L are e_1, e_2 or the segments through them
    fK, fL = PointMass(np.array([1.0, 0.0])), PointMass(np.array([0.0, 1.0]))
    report = dominance_service.m_addition_experiment(fK, fL, M, 1, 1, j=2, m=100, rng=RngStream(5))
    deterministic = report.companions["deterministic_value"]
    assert_allclose(deterministic["value"], expected)
    assert_allclose(deterministic["reference"], expected)
    assert deterministic["sample_spread"] <= 1e-9
    assert deterministic["matches"]
    assert report.verdict == "consistent"


def test_steiner_convexity_of_hull_area():
    result = dominance_service.steiner_convexity_probe(Simplex(3), 2, 2, 20, RngStream(6))
    assert result["verdict"] == "consistent"
    assert result["failures"] == 0


# ==================== REARRANGEMENT SERVICE ====================

def test_schedules():
    assert len(build_schedule("axis", 3)) == 3
    assert build_schedule("axis+rotation", 2)[2].resamples
    with pytest.raises(LabError):
        build_schedule("axis+rotation", 3)
    with pytest.raises(LabError):
        build_schedule("spiral", 2)


def test_symmetrize_off_center_disk():
    g = rearrangement_service.off_center_disk(65, [0.3, 0.2], 0.4)
    summary = rearrangement_service.symmetrize(g, "axis", tol=0.2, max_iter=20)
    assert summary["monotone_outside_resampling"]
    assert summary["history"][-1] < summary["history"][0]


def test_bll_trials_hold():
    report = rearrangement_service.bll_trials(2, RngStream(7), N=2, M=3, h=1.0 / 40)
    assert report["verdict"] == "consistent"
    assert len(report["instances"]) == 2


def test_cube_dominates_rearranged_products():
    fs = [TruncatedGaussian(1, 0.5), CENTERED_INTERVAL]
    report = rearrangement_service.cube_domination(fs, 5, RngStream(8), cells=400)
    assert report["verdict"] == "consistent"


def test_cube_domination_needs_bounded_factors():
    with pytest.raises(HypothesisError):
        rearrangement_service.cube_domination([TruncatedGaussian(1, 0.1)], 2, RngStream(9))


# ==================== OPERATOR NORM SERVICE ====================

def test_operator_norm_chain_for_gaussian_columns():
    fs = [TruncatedGaussian(1, 0.45)] * 2
    report = operator_norm_service.op_norm_dominance(fs, NormedSpaceSpec.lq(2, 2.0), 2000, RngStream(10))
    assert report.verdict == "consistent"
    assert set(report.companions) >= {"X_vs_Xstar", "Xstar_vs_Z"}


def test_small_ball_curve_rows_and_slope():
    result = operator_norm_service.small_ball_curve(1, 2, NormedSpaceSpec.lq(2, 2.0), [0.05, 0.1, 0.2], 20_000,
                                                    RngStream(11), c=1.0)
    assert result["verdict"] == "consistent"
    assert result["exponent"] == 1
    assert all(row["pX"] is None for row in result["rows"])
    assert "negative_moment" in result


@pytest.mark.parametrize("eps", [[], [0.0, 0.1], [1.5]])
def test_small_ball_rejects_bad_grid(eps):
    with pytest.raises(LabError):
        operator_norm_service.small_ball_curve(1, 2, NormedSpaceSpec.lq(2, 2.0), eps, 100, RngStream(12))


def test_marginal_small_ball_bound():
    result = operator_norm_service.marginal_small_ball([CENTERED_INTERVAL] * 3, 1, [0.1, 0.2], 20_000, RngStream(13))
    assert_allclose(result["rows"][0]["bound"], 2.0 * math.sqrt(math.pi * math.e) * 0.1)
    assert result["verdict"] == "consistent"


def test_marginal_small_ball_hypotheses():
    with pytest.raises(HypothesisError):
        operator_norm_service.marginal_small_ball([TruncatedGaussian(1, 0.1)] * 2, 1, [0.1], 1000, RngStream(14))
    with pytest.raises(DimensionError):
        operator_norm_service.marginal_small_ball([CENTERED_INTERVAL] * 2, 3, [0.1], 1000, RngStream(14))


def test_operator_ball_of_a_row_is_the_disk():
    result = operator_norm_service.operator_ball_volume_ratio(1, 2, 1000, RngStream(15))
    assert_allclose(result["volume"], math.pi)
    assert_allclose(result["ratio"], math.sqrt(2.0 * math.pi))


def test_operator_ball_dimension_cap():
    with pytest.raises(LabError):
        operator_norm_service.operator_ball_volume_ratio(4, 5, 100, RngStream(16))
