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
L_p and Orlicz centroid bodies by quadrature.

    h(Z_p(K), y)^p = V_n(K)^{-1} integral over K of |<x, y>|^p dx
    h(Z_psi(K), y) = inf{lambda > 0 : V_n(K)^{-1} integral over K of psi(|<x, y>| / lambda) dx <= 1}

Their empirical counterparts replace the normalized integral by the average
over N sample points.
"""

import logging
from typing import Tuple

import numpy as np
from scipy.special import roots_legendre
from scipy.stats import qmc

from geometry.bodies import Body, EuclideanBall
from geometry.coefficients import orlicz_norm
from geometry.sphere import SPHERE_SEED
from geometry.types import LabError

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 256


def body_nodes(body: Body, resolution: int = DEFAULT_RESOLUTION) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quadrature nodes and weights for integrals over a body.

    Planar disks use Gauss-Legendre in the radius times the angular midpoint
    rule; other planar bodies use a midpoint tensor grid over the bounding
    box; higher dimensions use scrambled Sobol points in the bounding box.

    Returns:
        (points, weights) with weights summing to the body's volume estimate
    """
    n = body.n
    if n == 2 and isinstance(body, EuclideanBall):
        nodes, w = roots_legendre(resolution // 4)
        radii = body.radius * 0.5 * (nodes + 1.0)
        radial_w = body.radius * 0.5 * w * radii
        angles = 2.0 * np.pi * (np.arange(resolution) + 0.5) / resolution
        rr, aa = np.meshgrid(radii, angles, indexing="ij")
        points = body.center + np.column_stack([(rr * np.cos(aa)).ravel(), (rr * np.sin(aa)).ravel()])
        weights = (radial_w[:, None] * np.full(resolution, 2.0 * np.pi / resolution)[None, :]).ravel()
        return points, weights
    radius = body.bounding_radius()
    if n <= 2:
        cells = resolution if n == 2 else resolution * 16
        h = 2.0 * radius / cells
        axis = -radius + h * (np.arange(cells) + 0.5)
        grids = np.meshgrid(*([axis] * n), indexing="ij")
        points = np.column_stack([g.ravel() for g in grids])
        inside = body.contains(points)
        return points[inside], np.full(int(inside.sum()), h ** n)
    sampler = qmc.Sobol(d=n, scramble=True, seed=SPHERE_SEED)
    count = 2 ** int(np.ceil(np.log2(resolution ** 2)))
    points = radius * (2.0 * sampler.random(count) - 1.0)
    inside = body.contains(points)
    cube = (2.0 * radius) ** n
    return points[inside], np.full(int(inside.sum()), cube / count)


def centroid_support(body: Body, p: float, directions: np.ndarray,
                     resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """
    Support function of Z_p(K) at the given direction rows.

    Raises:
        LabError: If p < 1
    """
    if p < 1:
        raise LabError(f"L_p centroid body needs p >= 1, got {p}")
    points, weights = body_nodes(body, resolution)
    if weights.sum() <= 0:
        raise LabError("Body has no quadrature mass")
    moments = (np.abs(directions @ points.T) ** p) @ weights / weights.sum()
    return moments ** (1.0 / p)


def orlicz_centroid_support(body: Body, psi, directions: np.ndarray,
                            resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """Support function of the Orlicz centroid body Z_psi(K)."""
    points, weights = body_nodes(body, resolution)
    if weights.sum() <= 0:
        raise LabError("Body has no quadrature mass")
    return orlicz_norm(directions @ points.T, psi, 1.0, weights / weights.sum())


def empirical_centroid_support(points: np.ndarray, p: float, directions: np.ndarray) -> np.ndarray:
    """Support function of Z_{p,N} = the L_p average over sample points."""
    if p < 1:
        raise LabError(f"L_p centroid body needs p >= 1, got {p}")
    return np.mean(np.abs(directions @ points.T) ** p, axis=1) ** (1.0 / p)


def empirical_orlicz_support(points: np.ndarray, psi, directions: np.ndarray) -> np.ndarray:
    """Support function of the empirical Orlicz centroid body over sample points."""
    return orlicz_norm(directions @ points.T, psi, 1.0)
