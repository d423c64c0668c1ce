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
"""Operator norms ||X : E -> l_2^n||."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from geometry.coefficients import CrossPolytope, Cube
from geometry.operations import diameter, realize
from geometry.types import DimensionError, LabError, Matrix
from models.operator_norms import NormedSpaceSpec, batch_operator_norm, operator_norm
from utils.rng import RngStream

EXAMPLE = Matrix(np.array([[1.0, 0.0], [0.0, 0.5]]))


def test_linf_norm_of_identity():
    assert_allclose(operator_norm(Matrix(np.eye(2)), NormedSpaceSpec.lq(2, math.inf)), math.sqrt(2.0))


def test_l1_norm_is_largest_column():
    assert_allclose(operator_norm(EXAMPLE, NormedSpaceSpec.lq(2, 1.0)), 1.0)


def test_l2_norm_is_largest_singular_value():
    assert_allclose(operator_norm(EXAMPLE, NormedSpaceSpec.lq(2, 2.0)), 1.0)


def test_vball_of_cross_polytope_matches_l1():
    gen = RngStream(1).generator()
    X = Matrix(gen.standard_normal((2, 3)))
    E = NormedSpaceSpec("vball", 3, vertices=np.vstack([np.eye(3), -np.eye(3)]))
    assert_allclose(operator_norm(X, E), operator_norm(X, NormedSpaceSpec.lq(3, 1.0)))


def test_vball_must_be_symmetric():
    with pytest.raises(LabError):
        NormedSpaceSpec("vball", 2, vertices=np.eye(2))


def test_intermediate_q_is_heuristic_and_bracketed():
    gen = RngStream(2).generator()
    X = Matrix(gen.standard_normal((2, 3)))
    E = NormedSpaceSpec.lq(3, 3.0)
    assert E.heuristic
    value = operator_norm(X, E)
    assert operator_norm(X, NormedSpaceSpec.lq(3, 2.0)) <= value * (1 + 1e-9)
    assert value <= operator_norm(X, NormedSpaceSpec.lq(3, math.inf)) * (1 + 1e-9)


def test_sign_enumeration_cap():
    X = Matrix(np.ones((2, 25)))
    with pytest.raises(DimensionError, match="sign enumeration cap 24"):
        operator_norm(X, NormedSpaceSpec.lq(25, math.inf))


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        operator_norm(EXAMPLE, NormedSpaceSpec.lq(3, 2.0))


@pytest.mark.parametrize("q", [1.0, 2.0, math.inf])
def test_batch_matches_single(q):
    gen = RngStream(3).generator()
    stack = gen.standard_normal((20, 2, 4))
    E = NormedSpaceSpec.lq(4, q)
    expected = [operator_norm(Matrix(stack[k]), E) for k in range(20)]
    assert_allclose(batch_operator_norm(stack, E), expected, rtol=1e-12)


def test_diameter_identities_on_random_matrices():
    root = RngStream(4)
    for k in range(200):
        X = Matrix(root.child(k).generator().standard_normal((2, 4)))
        assert_allclose(diameter(realize(X, CrossPolytope(4))), 2.0 * operator_norm(X, NormedSpaceSpec.lq(4, 1.0)))
        assert_allclose(diameter(realize(X, Cube(4))), 2.0 * operator_norm(X, NormedSpaceSpec.lq(4, math.inf)))
