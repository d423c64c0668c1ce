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
Probability densities with certified sup bounds.

Each density knows its dimension, a stored upper bound on its sup norm, how
to evaluate itself, how to draw exact samples, and its symmetric decreasing
rearrangement.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.stats import chi

from geometry.bodies import Body, EuclideanBall
from geometry.types import DegenerateBodyError, DimensionError, LabError, SamplingError, ball_volume
from geometry.volumes import volume
from rearrangement.grid import GridFunction
from rearrangement.symmetrization import sdr

logger = logging.getLogger(__name__)

MIN_ACCEPTANCE = 1e-4
MIN_PROPOSALS_FOR_ABORT = 100_000
NORMALIZATION_TOL = 1e-6
PRODUCT_GRID_CELLS = 101


def ball_radius(body: Body) -> float:
    """
    Radius r_K of the Euclidean ball with the volume of K.

    Raises:
        DegenerateBodyError: If K has zero volume
    """
    vol = volume(body).value
    if vol <= 0:
        raise DegenerateBodyError("Body has zero volume; r_K undefined")
    return float((vol / ball_volume(body.n)) ** (1.0 / body.n))


class Density:
    """Probability density on R^n."""
    kind = "abstract"

    @property
    def n(self) -> int:
        raise NotImplementedError

    @property
    def sup_bound(self) -> float:
        raise NotImplementedError

    def pdf(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample(self, count: int, gen: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def rearranged(self) -> "Density":
        raise NotImplementedError

    def support_radius(self) -> float:
        """R with the support inside the centered ball of radius R."""
        raise NotImplementedError


# ==================== UNIFORM ====================

@dataclass(frozen=True, eq=False)
class UniformOnBody(Density):
    body: Body
    kind = "uniform"

    @cached_property
    def body_volume(self) -> float:
        est = volume(self.body)
        if est.value <= 0:
            raise DegenerateBodyError("Uniform density needs a body with positive volume")
        if not est.exact:
            logger.warning(f"Uniform density on {self.body.kind} normalized by an estimated volume "
                           f"({est.value:.6g} +- {est.stderr:.2g})")
        return float(est.value)

    @property
    def n(self) -> int:
        return self.body.n

    @property
    def sup_bound(self) -> float:
        return 1.0 / self.body_volume

    def pdf(self, points):
        points = np.atleast_2d(points)
        return self.body.contains(points) / self.body_volume

    def support_radius(self) -> float:
        return self.body.bounding_radius()

    @cached_property
    def _box(self) -> Tuple[np.ndarray, np.ndarray]:
        eye = np.eye(self.n)
        return -self.body.support(-eye), self.body.support(eye)

    def sample(self, count, gen):
        if isinstance(self.body, EuclideanBall):
            g = gen.standard_normal((count, self.n))
            directions = g / np.linalg.norm(g, axis=1, keepdims=True)
            radii = self.body.radius * gen.random(count) ** (1.0 / self.n)
            return self.body.center + directions * radii[:, None]
        return self._rejection(count, gen)

    def _rejection(self, count: int, gen: np.random.Generator) -> np.ndarray:
        lo, hi = self._box
        accepted = []
        total = 0
        proposed = 0
        batch = max(64, 2 * count)
        while total < count:
            proposals = lo + (hi - lo) * gen.random((batch, self.n))
            keep = proposals[self.body.contains(proposals)]
            accepted.append(keep)
            total += keep.shape[0]
            proposed += batch
            rate = total / proposed
            if proposed >= MIN_PROPOSALS_FOR_ABORT and rate < MIN_ACCEPTANCE:
                raise SamplingError(
                    f"Rejection sampler for {self.body.kind} accepted {total} of {proposed} "
                    f"proposals (rate {rate:.2e} < {MIN_ACCEPTANCE:.0e})"
                )
            if total < count:
                batch = int(min(1_000_000, max(64, 1.2 * (count - total) / max(rate, MIN_ACCEPTANCE))))
        logger.debug(f"Rejection sampler acceptance rate {total / proposed:.4f} on {self.body.kind}")
        return np.vstack(accepted)[:count]

    def rearranged(self) -> "UniformOnBody":
        if isinstance(self.body, EuclideanBall) and not np.any(self.body.center):
            return self
        return UniformOnBody(EuclideanBall.centered(self.n, ball_radius(self.body)))


def uniform_on_ball_of_volume_one(n: int) -> UniformOnBody:
    """Uniform density on the ball of volume one, radius omega_n^{-1/n}."""
    return UniformOnBody(EuclideanBall.centered(n, ball_volume(n) ** (-1.0 / n)))


# ==================== GAUSSIAN ====================

@dataclass(frozen=True, eq=False)
class TruncatedGaussian(Density):
    """Isotropic gaussian N(center, sigma^2 I) conditioned on |x - center| <= radius."""
    dim: int
    sigma: float = 1.0
    radius: Optional[float] = None
    center: Optional[np.ndarray] = field(default=None, repr=False)
    kind = "truncated_gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise LabError(f"Gaussian sigma must be positive, got {self.sigma}")
        if self.radius is None:
            object.__setattr__(self, "radius", 8.0 * self.sigma)
        if self.radius <= 0:
            raise LabError(f"Truncation radius must be positive, got {self.radius}")
        center = np.zeros(self.dim) if self.center is None else np.asarray(self.center, dtype=float)
        if center.shape != (self.dim,):
            raise DimensionError(f"Center must have length {self.dim}")
        object.__setattr__(self, "center", center)

    @property
    def n(self) -> int:
        return self.dim

    @property
    def retained(self) -> float:
        return float(chi.cdf(self.radius / self.sigma, df=self.dim))

    @property
    def sup_bound(self) -> float:
        return float((2.0 * np.pi * self.sigma ** 2) ** (-self.dim / 2.0) / self.retained)

    def pdf(self, points):
        offsets = np.atleast_2d(points) - self.center
        r2 = np.sum(offsets ** 2, axis=1)
        values = np.exp(-r2 / (2.0 * self.sigma ** 2)) * self.sup_bound
        return np.where(r2 <= self.radius ** 2, values, 0.0)

    def support_radius(self) -> float:
        return float(np.linalg.norm(self.center) + self.radius)

    def sample(self, count, gen):
        g = gen.standard_normal((count, self.dim))
        directions = g / np.linalg.norm(g, axis=1, keepdims=True)
        radii = self.sigma * chi.ppf(gen.random(count) * self.retained, df=self.dim)
        return self.center + directions * radii[:, None]

    def rearranged(self) -> "TruncatedGaussian":
        if not np.any(self.center):
            return self
        return TruncatedGaussian(self.dim, self.sigma, self.radius)


# ==================== GRID ====================

@dataclass(frozen=True, eq=False)
class GridDensity(Density):
    """Piecewise-constant density on the cells of a normalized grid function."""
    grid: GridFunction
    kind = "grid"

    def __post_init__(self):
        if abs(self.grid.mass - 1.0) > NORMALIZATION_TOL:
            raise LabError(f"Grid density must integrate to 1, got {self.grid.mass:.9g}")

    @classmethod
    def from_grid(cls, grid: GridFunction) -> "GridDensity":
        return cls(grid.normalized())

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def sup_bound(self) -> float:
        return float(self.grid.values.max())

    def pdf(self, points):
        return self.grid.lookup(points)

    def support_radius(self) -> float:
        return float(self.grid.half_width * np.sqrt(self.grid.n))

    @cached_property
    def _cell_probabilities(self) -> np.ndarray:
        flat = self.grid.values.ravel()
        return flat / flat.sum()

    def sample(self, count, gen):
        g = self.grid
        cells = gen.choice(self._cell_probabilities.size, size=count, p=self._cell_probabilities)
        index = np.column_stack(np.unravel_index(cells, g.values.shape))
        lower = (index - g.cells / 2.0) * g.h
        return lower + g.h * gen.random((count, g.n))

    def rearranged(self) -> "GridDensity":
        return GridDensity(sdr(self.grid))


# ==================== PRODUCTS AND POINT MASSES ====================

@dataclass(frozen=True, eq=False)
class ProductDensity(Density):
    """f_1(x_1) ... f_k(x_k) on consecutive coordinate blocks."""
    factors: Tuple[Density, ...]
    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise LabError("Product density needs at least one factor")

    @property
    def n(self) -> int:
        return int(sum(f.n for f in self.factors))

    @property
    def sup_bound(self) -> float:
        return float(np.prod([f.sup_bound for f in self.factors]))

    def _blocks(self, points):
        offsets = np.cumsum([0] + [f.n for f in self.factors])
        return [points[:, offsets[i]:offsets[i + 1]] for i in range(len(self.factors))]

    def pdf(self, points):
        points = np.atleast_2d(points)
        values = np.ones(points.shape[0])
        for f, block in zip(self.factors, self._blocks(points)):
            values *= f.pdf(block)
        return values

    def support_radius(self) -> float:
        return float(np.sqrt(sum(f.support_radius() ** 2 for f in self.factors)))

    def sample(self, count, gen):
        return np.hstack([f.sample(count, gen) for f in self.factors])

    def factor_rearranged(self) -> "ProductDensity":
        """Product of the rearranged factors."""
        return ProductDensity(tuple(f.rearranged() for f in self.factors))

    def rearranged(self) -> "GridDensity":
        """
        Rearrangement of the joint density, discretized on a centered grid
        (total dimension at most 3).
        """
        if self.n > 3:
            raise LabError("Joint rearrangement of a product is only available up to dimension 3")
        cells = PRODUCT_GRID_CELLS
        h = 2.0 * self.support_radius() / cells
        grid = GridFunction.from_function(self.pdf, self.n, cells, h)
        return GridDensity(sdr(grid.normalized()))


@dataclass(frozen=True, eq=False)
class PointMass(Density):
    """Dirac mass at a point; a degenerate sampler with no density."""
    point: np.ndarray
    kind = "point_mass"

    def __post_init__(self):
        object.__setattr__(self, "point", np.atleast_1d(np.asarray(self.point, dtype=float)))

    @property
    def n(self) -> int:
        return self.point.shape[0]

    @property
    def sup_bound(self) -> float:
        return float("inf")

    def pdf(self, points):
        raise LabError("A point mass has no density")

    def support_radius(self) -> float:
        return float(np.linalg.norm(self.point))

    def sample(self, count, gen):
        return np.tile(self.point, (count, 1))

    def rearranged(self) -> "PointMass":
        return PointMass(np.zeros(self.n))
