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
"""
Samplers for points and random matrices X, X* and Z.
"""

import logging
from typing import Sequence

import numpy as np

from geometry.types import DimensionError, Matrix
from models.densities import Density
from utils.rng import RngLike, as_generator

logger = logging.getLogger(__name__)


def sample_point(f: Density, rng: RngLike) -> np.ndarray:
    """One exact draw from f."""
    return f.sample(1, as_generator(rng))[0]


def sample_points(f: Density, m: int, rng: RngLike) -> np.ndarray:
    """m exact draws from f as rows."""
    return f.sample(int(m), as_generator(rng))


def sample_matrix(fs: Sequence[Density], rng: RngLike) -> Matrix:
    """
    Matrix whose column i is drawn from fs[i], columns drawn in order from a
    single stream.

    Raises:
        DimensionError: If the densities do not share a dimension
    """
    if not fs:
        raise DimensionError("Need at least one density")
    dims = {f.n for f in fs}
    if len(dims) != 1:
        raise DimensionError(f"Densities have mixed dimensions {sorted(dims)}")
    gen = as_generator(rng)
    return Matrix(np.column_stack([f.sample(1, gen)[0] for f in fs]))
