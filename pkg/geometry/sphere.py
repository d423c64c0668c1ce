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
Deterministic direction sets on the unit sphere.

Circles use equally spaced angles; higher dimensions use a scrambled Sobol
sequence with a fixed seed pushed through the Gaussian quantile function,
so every mean width or Hausdorff estimate is reproducible.
"""

import logging
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.stats import norm, qmc

logger = logging.getLogger(__name__)

SPHERE_SEED = 20160221


def default_grid_size(n: int) -> int:
    return 2048 if n <= 3 else 8192


@lru_cache(maxsize=64)
def _sphere_grid(n: int, size: int) -> np.ndarray:
    if n == 1:
        grid = np.array([[-1.0], [1.0]])
    elif n == 2:
        angles = 2.0 * np.pi * (np.arange(size) + 0.5) / size
        grid = np.column_stack([np.cos(angles), np.sin(angles)])
    else:
        sampler = qmc.Sobol(d=n, scramble=True, seed=SPHERE_SEED)
        m = int(np.ceil(np.log2(size)))
        points = sampler.random_base2(m)[:size]
        gaussian = norm.ppf(np.clip(points, 1e-12, 1.0 - 1e-12))
        grid = gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)
    grid.setflags(write=False)
    return grid


def sphere_grid(n: int, size: Optional[int] = None) -> np.ndarray:
    """
    Deterministic direction set on S^{n-1}.

    Args:
        n: Ambient dimension
        size: Number of directions (defaults to 2048 for n <= 3, else 8192)

    Returns:
        Read-only (size, n) array of unit vectors
    """
    return _sphere_grid(n, size or default_grid_size(n))


@lru_cache(maxsize=64)
def covering_angle(n: int, size: int) -> float:
    """
    Angular covering radius of a sphere grid (every direction lies within
    this angle of some grid point).
    """
    if n == 1:
        return 0.0
    if n == 2:
        return float(np.pi / size)
    grid = _sphere_grid(n, size)
    probe = np.random.default_rng(SPHERE_SEED).standard_normal((4096, n))
    probe /= np.linalg.norm(probe, axis=1, keepdims=True)
    cosines = np.max(probe @ grid.T, axis=1)
    worst = float(np.arccos(np.clip(cosines.min(), -1.0, 1.0)))
    # probe maximum underestimates the true covering radius
    return 1.5 * worst


def random_directions(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random unit vectors."""
    gaussian = rng.standard_normal((count, n))
    return gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)
