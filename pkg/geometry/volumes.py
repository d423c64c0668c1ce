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
Volumes and intrinsic volumes.

Exact paths: polytope hulls, zonotope determinant sums, Euclidean balls and
planar disk intersections. Everything else falls back to Monte Carlo
membership sampling in the bounding ball, or to a Steiner polynomial fit for
intrinsic volumes without a closed form.
"""

import itertools
import logging
from math import comb
from typing import NamedTuple, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from geometry import disks
from geometry.bodies import (
    BallIntersection,
    Body,
    EuclideanBall,
    HalfspacePolytope,
    PolarBody,
    SupportOracle,
    VertexBody,
    Zonotope,
)
from geometry.operations import parallel_body
from geometry.sphere import sphere_grid
from geometry.types import DimensionError, Estimate, ball_volume
from utils.rng import RngLike, as_generator

logger = logging.getLogger(__name__)

DEFAULT_MC_SAMPLES = 200_000
MC_BATCH = 20_000
PLANAR_TANGENT_DIRECTIONS = 4096
DET_BATCH = 50_000


def uniform_in_ball(n: int, radius: float, count: int, gen: np.random.Generator) -> np.ndarray:
    """Uniform points in the centered ball: direction times radius * u^(1/n)."""
    gaussian = gen.standard_normal((count, n))
    directions = gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)
    radii = radius * gen.random(count) ** (1.0 / n)
    return directions * radii[:, None]


def monte_carlo_volume(body: Body, rng: RngLike = None, samples: int = DEFAULT_MC_SAMPLES) -> Estimate:
    """
    Hit-or-miss volume in the bounding ball, in batches.

    Returns:
        Estimate with binomial standard error
    """
    gen = as_generator(rng)
    radius = body.bounding_radius()
    hits = 0
    drawn = 0
    while drawn < samples:
        batch = min(MC_BATCH, samples - drawn)
        points = uniform_in_ball(body.n, radius, batch, gen)
        hits += int(np.count_nonzero(body.contains(points)))
        drawn += batch
    p = hits / drawn
    box = ball_volume(body.n) * radius ** body.n
    return Estimate(box * p, box * np.sqrt(p * (1.0 - p) / drawn), exact=False)


def hull_volume(body: VertexBody) -> Estimate:
    """Exact volume of a vertex body; lower-dimensional hulls give a flagged zero."""
    if body.n == 1:
        return Estimate(float(np.ptp(body.vertices)))
    if not body.full_dimensional:
        logger.debug(f"Degenerate {body.kind}: affine hull has dimension < {body.n}")
        return Estimate(0.0, degenerate=True)
    return Estimate(float(body.hull.volume))


def zonotope_intrinsic_volume(body: Zonotope, j: int) -> Estimate:
    """
    V_j of a zonotope: 2^j times the sum over j-subsets S of generators of the
    j-dimensional volume sqrt(det(G_S G_S^T)).
    """
    g = body.generators
    total = 0.0
    subsets = itertools.combinations(range(g.shape[0]), j)
    while True:
        batch = list(itertools.islice(subsets, DET_BATCH))
        if not batch:
            break
        stacks = g[np.array(batch)]
        if j == body.n:
            total += float(np.abs(np.linalg.det(stacks)).sum())
        else:
            gram = stacks @ np.transpose(stacks, (0, 2, 1))
            total += float(np.sqrt(np.clip(np.linalg.det(gram), 0.0, None)).sum())
    return Estimate(2.0 ** j * total, degenerate=(j == body.n and body.rank < body.n))


def disk_intersection_volume(body: BallIntersection) -> Estimate:
    arcs = body.arcs
    if not arcs:
        return Estimate(0.0, degenerate=True)
    return Estimate(disks.arc_area(arcs, body.radius))


def planar_tangent_volume(body: Body, directions: int = PLANAR_TANGENT_DIRECTIONS) -> Estimate:
    """
    Area of the circumscribed polygon cut out by tangent lines; the gap to
    the half-resolution polygon is reported as the error.
    """
    def polygon_area(k):
        grid = sphere_grid(2, k)
        return hull_volume(HalfspacePolytope(grid, body.support(grid))).value

    fine = polygon_area(directions)
    coarse = polygon_area(directions // 2)
    return Estimate(fine, abs(coarse - fine), exact=False)


def planar_radial_volume(body: PolarBody, directions: int = PLANAR_TANGENT_DIRECTIONS) -> Estimate:
    """Area (1/2) * integral of rho(theta)^2, midpoint rule with a half-resolution error."""
    def area(k):
        grid = sphere_grid(2, k)
        rho = 1.0 / body.gauge(grid)
        return float(np.pi * np.mean(rho ** 2))

    fine = area(directions)
    return Estimate(fine, abs(area(directions // 2) - fine), exact=False)


def volume(body: Body, rng: RngLike = None, samples: int = DEFAULT_MC_SAMPLES) -> Estimate:
    """
    Volume of a body.

    Args:
        body: Any bounded body
        rng: Stream for Monte Carlo fallbacks
        samples: Monte Carlo budget

    Returns:
        Estimate (stderr 0 and exact=True on exact paths)

    Raises:
        UnboundedBodyError: If an oracle body has no finite bounding radius
    """
    if isinstance(body, EuclideanBall):
        return Estimate(ball_volume(body.n) * body.radius ** body.n)
    if isinstance(body, Zonotope):
        return zonotope_intrinsic_volume(body, body.n)
    if isinstance(body, VertexBody):
        return hull_volume(body)
    if isinstance(body, BallIntersection):
        if body.n == 2:
            return disk_intersection_volume(body)
        if body.n == 1:
            h = body.support(np.array([[1.0], [-1.0]]))
            return Estimate(max(float(h.sum()), 0.0))
    if body.n == 1:
        h = body.support(np.array([[1.0], [-1.0]]))
        return Estimate(max(float(h.sum()), 0.0), exact=not isinstance(body, PolarBody))
    if body.n == 2 and isinstance(body, SupportOracle) and body.membership_fn is None:
        return planar_tangent_volume(body)
    if body.n == 2 and isinstance(body, PolarBody):
        return planar_radial_volume(body)
    return monte_carlo_volume(body, rng, samples)


# ==================== INTRINSIC VOLUMES ====================

def ball_intrinsic_volume(n: int, j: int, radius: float) -> float:
    """V_j(r B_2^n) = C(n, j) omega_n / omega_{n-j} r^j."""
    return comb(n, j) * ball_volume(n) / ball_volume(n - j) * radius ** j


def planar_mean_support(body: Body, directions: int = PLANAR_TANGENT_DIRECTIONS) -> Estimate:
    """V_1 of a planar body: (1/2) * integral of h over the circle."""
    def value(k):
        return float(np.pi * np.mean(body.support(sphere_grid(2, k))))

    fine = value(directions)
    return Estimate(fine, abs(value(directions // 2) - fine), exact=False)


class SteinerFit(NamedTuple):
    """Steiner polynomial fit plus its check at an eps left out of the fit."""
    coefficients: np.ndarray
    covariance: np.ndarray
    eps: np.ndarray
    volumes: np.ndarray
    held_out_eps: float
    held_out_volume: float
    held_out_stderr: float

    def predict(self, eps: float) -> Tuple[float, float]:
        """Fitted V_n(B + eps B_2^n) and its standard error."""
        row = np.power(float(eps), np.arange(self.coefficients.size))
        variance = float(row @ self.covariance @ row)
        return float(row @ self.coefficients), float(np.sqrt(max(variance, 0.0)))

    @property
    def held_out_residual(self) -> float:
        return self.predict(self.held_out_eps)[0] - self.held_out_volume

    @property
    def held_out_tolerance(self) -> float:
        fit_err = self.predict(self.held_out_eps)[1]
        return 3.0 * float(np.hypot(fit_err, self.held_out_stderr)) + 1e-9 * abs(self.held_out_volume)

    @property
    def consistent(self) -> bool:
        return abs(self.held_out_residual) <= self.held_out_tolerance


def steiner_fit(body: Body, rng: RngLike = None, samples: int = DEFAULT_MC_SAMPLES,
                eps_max: float = None, points: int = None, sphere_size: int = None) -> SteinerFit:
    """
    Least-squares fit of V_n(B + eps B_2^n) = sum_i a_i eps^i.

    The eps between the two largest fit points is measured but kept out of
    the fit; the fit must reproduce it within its standard error.
    """
    n = body.n
    points = points or 2 * n + 2
    if eps_max is None:
        eps_max = 0.5 * max(body.bounding_radius(), 1e-3)
    gen = as_generator(rng)

    def measured(e):
        return volume(parallel_body(body, float(e), sphere_size=sphere_size), gen, samples)

    eps = np.linspace(eps_max / points, eps_max, points)
    values = np.empty(points)
    variances = np.empty(points)
    for k, e in enumerate(eps):
        est = measured(e)
        values[k] = est.value
        variances[k] = est.stderr ** 2
    design = np.vander(eps, n + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = values - design @ coef
    dof = max(points - (n + 1), 1)
    sigma2 = max(float(residual @ residual) / dof, float(variances.mean()))
    gram_inv = np.linalg.pinv(design.T @ design)

    held_out = 0.5 * float(eps[-2] + eps[-1])
    check = measured(held_out)
    fit = SteinerFit(coef, sigma2 * gram_inv, eps, values, held_out, check.value, check.stderr)
    if not fit.consistent:
        logger.warning(f"Steiner fit for {body.kind} misses held-out eps={held_out:.4g} "
                       f"by {fit.held_out_residual:.3g} (tolerance {fit.held_out_tolerance:.3g})")
    return fit


def intrinsic_volume(body: Body, j: int, rng: RngLike = None,
                     samples: int = DEFAULT_MC_SAMPLES) -> Estimate:
    """
    Intrinsic volume V_j(B), 1 <= j <= n.

    Raises:
        DimensionError: If j is out of range
    """
    n = body.n
    if not 1 <= j <= n:
        raise DimensionError(f"Intrinsic volume index j={j} outside [1, {n}]")
    if isinstance(body, EuclideanBall):
        return Estimate(ball_intrinsic_volume(n, j, body.radius))
    if isinstance(body, Zonotope):
        return zonotope_intrinsic_volume(body, j)
    if j == n:
        return volume(body, rng, samples)
    if j == n - 1:
        if isinstance(body, VertexBody) and body.full_dimensional:
            return Estimate(float(body.hull.area) / 2.0)
        if isinstance(body, BallIntersection) and n == 2:
            arcs = body.arcs
            return Estimate(disks.arc_perimeter(arcs, body.radius) / 2.0, degenerate=not arcs)
        if n == 2:
            if isinstance(body, VertexBody):
                # lower-dimensional planar polytope: a segment or a point
                return Estimate(_segment_length(body.vertices), degenerate=True)
            return planar_mean_support(body)
    fit = steiner_fit(body, rng, samples)
    coef, cov = fit.coefficients, fit.covariance
    index = n - j
    value = float(coef[index]) / ball_volume(index)
    fit_err = float(np.sqrt(max(cov[index, index], 0.0))) / ball_volume(index)
    resolution = 0.0
    if isinstance(body, VertexBody) and n <= 3:
        coarse = steiner_fit(body, rng, samples, sphere_size=256).coefficients
        resolution = abs(float(coarse[index]) / ball_volume(index) - value)
    return Estimate(value, float(np.hypot(fit_err, resolution)), exact=False)


def _segment_length(vertices: np.ndarray) -> float:
    if vertices.shape[0] < 2:
        return 0.0
    return float(pdist(vertices).max())
