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
Radial measures and their evaluation on bodies.

Supported densities (all radial and -1/(n+1)-concave):
    lebesgue       psi = 1
    gaussian       psi = (2 pi sigma^2)^{-n/2} exp(-|x|^2 / (2 sigma^2))
    inverse_power  psi = (1 + |x|^2)^{-(n+1)/2}

The gaussian is log-concave, hence s-concave for every s <= 0. For the
inverse power density psi^{-1/(n+1)} = sqrt(1 + |x|^2), a convex function.

For a star body K with the origin inside,
    nu(K) = (1 / |S^{n-1}|) * integral over S^{n-1} of F(rho_K(theta)),
where F(r) = nu(rB) is the radial mass function.
"""

import logging
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.special import beta, betainc
from scipy.stats import chi

from geometry.bodies import Body, EuclideanBall
from geometry.operations import gauge
from geometry.sphere import sphere_grid
from geometry.types import (
    DimensionError,
    Estimate,
    LabError,
    NotInteriorError,
    ball_volume,
    sphere_area,
)
from geometry.volumes import DEFAULT_MC_SAMPLES, volume
from utils.rng import RngLike, as_generator

logger = logging.getLogger(__name__)

PLANAR_RADIAL_DIRECTIONS = 8192
PLANAR_TENSOR_CELLS = 512


@dataclass(frozen=True)
class RadialMeasure:
    """Measure with a radial density on R^n."""
    kind: str
    n: int
    sigma: float = 1.0
    KINDS: ClassVar[tuple] = ("lebesgue", "gaussian", "inverse_power")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise LabError(f"Unknown radial measure '{self.kind}', expected one of {self.KINDS}")
        if self.sigma <= 0:
            raise LabError(f"Gaussian sigma must be positive, got {self.sigma}")

    def density(self, points: np.ndarray) -> np.ndarray:
        r2 = np.sum(np.atleast_2d(points) ** 2, axis=1)
        if self.kind == "lebesgue":
            return np.ones_like(r2)
        if self.kind == "gaussian":
            return (2.0 * np.pi * self.sigma ** 2) ** (-self.n / 2.0) * np.exp(-r2 / (2.0 * self.sigma ** 2))
        return (1.0 + r2) ** (-(self.n + 1) / 2.0)

    def radial_mass(self, r) -> np.ndarray:
        """nu(B(0, r)) for r >= 0 (may be inf for lebesgue)."""
        r = np.asarray(r, dtype=float)
        n = self.n
        if self.kind == "lebesgue":
            return ball_volume(n) * r ** n
        if self.kind == "gaussian":
            return chi.cdf(r / self.sigma, df=n)
        t = np.where(np.isinf(r), 1.0, r * r / (1.0 + r * r))
        return sphere_area(n) * 0.5 * beta(n / 2.0, 0.5) * betainc(n / 2.0, 0.5, t)

    def radius_quantile(self, p: np.ndarray, radius: float) -> np.ndarray:
        """Radius with nu(B(0, r)) = p * nu(B(0, radius)), by bisection."""
        p = np.asarray(p, dtype=float)
        total = self.radial_mass(radius)
        lo = np.zeros_like(p)
        hi = np.full_like(p, radius)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = self.radial_mass(mid) < p * total
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def check_concavity(self, rng: RngLike = None, rays: int = 200, tol: float = 1e-9) -> bool:
        """
        Spot-check that psi^{-1/(n+1)} is convex along random lines.
        """
        if self.kind == "lebesgue":
            return True
        gen = as_generator(rng)
        starts = gen.normal(scale=3.0, size=(rays, self.n))
        directions = gen.standard_normal((rays, self.n))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        t = np.linspace(-4.0, 4.0, 41)
        points = starts[:, None, :] + t[None, :, None] * directions[:, None, :]
        values = self.density(points.reshape(-1, self.n)).reshape(rays, t.size) ** (-1.0 / (self.n + 1))
        second = values[:, 2:] - 2.0 * values[:, 1:-1] + values[:, :-2]
        scale = np.maximum(np.abs(values[:, 1:-1]), 1.0)
        ok = bool(np.all(second >= -tol * scale))
        if not ok:
            logger.warning(f"Concavity spot-check failed for {self.kind} in R^{self.n}")
        return ok


def _interval_mass(measure: RadialMeasure, lo: float, hi: float) -> float:
    def signed(x):
        return np.sign(x) * 0.5 * measure.radial_mass(abs(x))

    return float(max(signed(hi) - signed(lo), 0.0))


def _radial_quadrature(measure: RadialMeasure, body: Body, size: int) -> float:
    grid = sphere_grid(body.n, size)
    rho = 1.0 / gauge(body, grid)
    return float(np.mean(measure.radial_mass(rho)))


def _planar_tensor(measure: RadialMeasure, body: Body, cells: int) -> float:
    radius = body.bounding_radius()
    h = 2.0 * radius / cells
    axis = -radius + h * (np.arange(cells) + 0.5)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    points = np.column_stack([xx.ravel(), yy.ravel()])
    inside = body.contains(points)
    return float(np.sum(measure.density(points[inside])) * h * h)


def _importance_sampled(measure: RadialMeasure, body: Body, gen: np.random.Generator, samples: int) -> Estimate:
    radius = body.bounding_radius()
    total = float(measure.radial_mass(radius))
    directions = gen.standard_normal((samples, body.n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = measure.radius_quantile(gen.random(samples), radius)
    p = float(np.mean(body.contains(directions * radii[:, None])))
    return Estimate(total * p, total * np.sqrt(p * (1.0 - p) / samples), exact=False)


def measure(nu: RadialMeasure, body: Body, rng: RngLike = None,
            samples: int = DEFAULT_MC_SAMPLES) -> Estimate:
    """
    nu(B) for a bounded body.

    Paths: lebesgue uses volume; n = 1 and centered balls are exact; bodies
    with the origin inside use radial quadrature on the sphere grid (angular
    midpoint rule in the plane); other planar bodies use a midpoint tensor
    grid; remaining cases use radially importance-sampled Monte Carlo.
    Deterministic paths report the gap to a half-resolution rule as stderr.

    Raises:
        DimensionError: If the measure and body dimensions differ
        UnboundedBodyError: If the body has no finite bounding radius
    """
    if nu.n != body.n:
        raise DimensionError(f"Measure lives in R^{nu.n}, body in R^{body.n}")
    if nu.kind == "lebesgue":
        return volume(body, rng, samples)
    if body.n == 1:
        h = body.support(np.array([[1.0], [-1.0]]))
        return Estimate(_interval_mass(nu, -float(h[1]), float(h[0])))
    if isinstance(body, EuclideanBall) and not np.any(body.center):
        return Estimate(float(nu.radial_mass(body.radius)))

    try:
        size = PLANAR_RADIAL_DIRECTIONS if body.n == 2 else 4 * sphere_grid(body.n).shape[0]
        fine = _radial_quadrature(nu, body, size)
        coarse = _radial_quadrature(nu, body, size // 2)
        return Estimate(fine, abs(fine - coarse), exact=False)
    except NotInteriorError:
        logger.debug("Origin not interior; falling back to direct integration")

    if body.n == 2:
        fine = _planar_tensor(nu, body, PLANAR_TENSOR_CELLS)
        coarse = _planar_tensor(nu, body, PLANAR_TENSOR_CELLS // 2)
        return Estimate(fine, abs(fine - coarse), exact=False)
    return _importance_sampled(nu, body, as_generator(rng), samples)
