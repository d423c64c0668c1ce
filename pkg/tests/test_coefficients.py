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
"""Coefficient sets, Young functions and M-combinations."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from geometry.coefficients import (
    CrossPolytope,
    Cube,
    GenericV,
    LqBall,
    MCombination,
    OrliczBallPolar,
    Simplex,
    SimplexWithOrigin,
    YoungFunction,
    orlicz_norm,
)
from geometry.operations import realize
from geometry.types import CoefficientSetError, Matrix
from geometry.volumes import volume


def test_simplex_support_and_membership():
    C = Simplex(3)
    assert_allclose(C.support(np.array([0.2, -1.0, 0.7])), 0.7)
    assert C.contains(np.array([0.2, 0.3, 0.5]))
    assert not C.contains(np.array([0.2, 0.3, 0.6]))


def test_simplex_with_origin_support_is_nonnegative():
    assert_allclose(SimplexWithOrigin(2).support(np.array([-1.0, -2.0])), 0.0)


def test_cube_and_cross_polytope_are_dual():
    v = np.array([[1.0, -2.0, 0.5]])
    assert_allclose(Cube(3).support(v), [3.5])
    assert_allclose(CrossPolytope(3).support(v), [2.0])


def test_lq_ball_support_uses_dual_exponent():
    C = LqBall(2, 2.0)
    assert_allclose(C.support(np.array([3.0, 4.0])), 5.0)
    assert C.unconditional and not LqBall(2, 2.0, positive=True).unconditional


def test_lq_ball_rejects_small_exponent():
    with pytest.raises(CoefficientSetError):
        LqBall(2, 0.5)


def test_generic_v_symmetry_flags():
    diamond = GenericV(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]))
    assert diamond.symmetric and diamond.unconditional
    tilted = GenericV(np.array([[1.0, 1.0], [-1.0, -1.0], [0.5, -0.5], [-0.5, 0.5]]))
    assert tilted.symmetric and not tilted.unconditional
    assert GenericV(np.array([[1.0, 1.0]])).positive_orthant


def test_young_function_families():
    assert_allclose(YoungFunction("power", 2.0)(3.0), 9.0)
    assert_allclose(YoungFunction("log_laplace", 1.0)(0.0), 0.0)
    with pytest.raises(CoefficientSetError):
        YoungFunction("cubic", 1.0)
    with pytest.raises(CoefficientSetError):
        YoungFunction("power", 0.5)


def test_orlicz_norm_of_power_function_is_normalized_lp():
    t = np.array([[1.0, 2.0, 2.0]])
    expected = np.mean(np.abs(t) ** 2) ** 0.5
    assert_allclose(orlicz_norm(t, YoungFunction("power", 2.0)), [expected], rtol=1e-9)


def test_orlicz_polar_support_matches_orlicz_norm():
    C = OrliczBallPolar(3, YoungFunction("power", 1.0))
    v = np.array([0.3, -0.6, 0.9])
    assert_allclose(C.support(v), np.mean(np.abs(v)), rtol=1e-9)


def test_m_combination_of_singleton_is_minkowski_sum():
    C = MCombination(GenericV(np.array([[1.0, 1.0]])), (Simplex(2), Simplex(2)))
    assert C.dim == 4
    assert C.convex_by_construction
    # [e1, e2] and [e1, e2] shifted: segment plus segment is a parallelogram
    X = Matrix(np.array([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]]))
    assert_allclose(volume(realize(X, C)).value, 1.0)


def test_m_combination_needs_matching_parts():
    with pytest.raises(CoefficientSetError):
        MCombination(GenericV(np.array([[1.0, 1.0]])), (Simplex(2),))


def test_unconditional_m_combination_membership():
    C = MCombination(LqBall(2, 2.0), (CrossPolytope(2), CrossPolytope(2)))
    assert C.contains(np.array([0.3, 0.0, 0.0, 0.4]))
    assert not C.contains(np.array([0.6, 0.0, 0.0, 0.9]))
