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
Convex body representations.

Every body answers support queries for arbitrary (not necessarily unit)
vectors, membership queries for batches of points, and reports a finite
bounding radius about the origin. Bodies are immutable; derived data such as
hulls and facet lists is computed lazily and cached on the instance.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, ClassVar, Optional

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from geometry import disks
from geometry.sphere import covering_angle, default_grid_size, sphere_grid
from geometry.types import (
    MAX_DIMENSION,
    DegenerateBodyError,
    DimensionError,
    NotInteriorError,
    UnboundedBodyError,
)

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
MAX_ZONOTOPE_FACET_SUBSETS = 200_000


def _rows(points, n: int) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(points, dtype=float))
    if arr.shape[1] != n:
        raise DimensionError(f"Expected points in R^{n}, got R^{arr.shape[1]}")
    return arr


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def qhull(points: np.ndarray) -> ConvexHull:
    """Convex hull with a joggled retry for precision-degenerate inputs."""
    try:
        return ConvexHull(points)
    except QhullError:
        logger.debug(f"Qhull failed on {points.shape[0]} points, retrying with joggle")
        return ConvexHull(points, qhull_options="QJ")


def affine_rank(points: np.ndarray) -> int:
    if points.shape[0] <= 1:
        return 0
    shifted = points[1:] - points[0]
    scale = max(1.0, float(np.abs(points).max()))
    return int(np.linalg.matrix_rank(shifted, tol=RANK_TOL * scale))


class Body:
    """Compact convex set in R^n."""
    kind: ClassVar[str] = "abstract"

    @property
    def n(self) -> int:
        raise NotImplementedError

    def support(self, directions) -> np.ndarray:
        """h_B at each row; positively homogeneous in the direction."""
        rows = _rows(directions, self.n)
        norms = np.linalg.norm(rows, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        values = self._support_unit(rows / safe[:, None])
        return np.where(norms > 0, norms * values, 0.0)

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        return self._contains(_rows(points, self.n), tol)

    def bounding_radius(self) -> float:
        """R with B contained in the centered ball of radius R."""
        raise NotImplementedError

    def _support_unit(self, units: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _contains(self, points: np.ndarray, tol: float) -> np.ndarray:
        raise NotImplementedError


# ==================== VERTEX BODIES ====================

class VertexBody(Body):
    """Body given as the convex hull of a finite point set."""

    @property
    def vertices(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    def support(self, directions) -> np.ndarray:
        rows = _rows(directions, self.n)
        return (rows @ self.vertices.T).max(axis=1)

    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.vertices, axis=1).max())

    @cached_property
    def full_dimensional(self) -> bool:
        return affine_rank(self.vertices) == self.n

    @cached_property
    def hull(self) -> Optional[ConvexHull]:
        if self.n == 1 or not self.full_dimensional:
            return None
        return qhull(self.vertices)

    def _contains(self, points, tol):
        if self.n == 1:
            lo, hi = self.vertices.min(), self.vertices.max()
            x = points[:, 0]
            return (x >= lo - tol) & (x <= hi + tol)
        if self.hull is not None:
            eq = self.hull.equations
            return np.all(points @ eq[:, :-1].T + eq[:, -1] <= tol, axis=1)
        return np.array([self._lp_contains(p, tol) for p in points])

    def _lp_contains(self, point: np.ndarray, tol: float) -> bool:
        k = self.vertices.shape[0]
        res = linprog(
            np.zeros(k),
            A_eq=np.vstack([self.vertices.T, np.ones((1, k))]),
            b_eq=np.concatenate([point, [1.0]]),
            bounds=[(0, None)] * k,
            method="highs",
        )
        return res.status == 0

    def facets(self):
        """(normals, offsets) with the body equal to {y : normals @ y <= offsets}."""
        if self.n == 1:
            return np.array([[1.0], [-1.0]]), np.array([self.vertices.max(), -self.vertices.min()])
        if self.hull is None:
            raise DegenerateBodyError("Lower-dimensional polytope has no facet description")
        eq = self.hull.equations
        return eq[:, :-1], -eq[:, -1]


@dataclass(frozen=True, eq=False)
class VPolytope(VertexBody):
    """conv of a nonempty vertex list (rows)."""
    points: np.ndarray = field(repr=False)
    kind: ClassVar[str] = "vpolytope"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] == 0:
            raise DimensionError("VPolytope needs at least one vertex")
        if not 1 <= pts.shape[1] <= MAX_DIMENSION:
            raise DimensionError(f"VPolytope dimension {pts.shape[1]} outside [1, {MAX_DIMENSION}]")
        if not np.all(np.isfinite(pts)):
            raise UnboundedBodyError("VPolytope vertices must be finite")
        object.__setattr__(self, "points", _readonly(pts))

    @property
    def vertices(self) -> np.ndarray:
        return self.points


@dataclass(frozen=True, eq=False)
class SymmetricCrossHull(VertexBody):
    """conv{+-x_i} for generator rows x_i."""
    generators: np.ndarray = field(repr=False)
    kind: ClassVar[str] = "symmetric_cross_hull"

    def __post_init__(self):
        object.__setattr__(self, "generators", _readonly(np.atleast_2d(self.generators)))

    @cached_property
    def vertices(self) -> np.ndarray:
        return _readonly(np.vstack([self.generators, -self.generators]))

    def support(self, directions):
        rows = _rows(directions, self.n)
        return np.abs(rows @ self.generators.T).max(axis=1)


@dataclass(frozen=True, eq=False)
class HalfspacePolytope(VertexBody):
    """{y : normals @ y <= offsets}, assumed bounded with nonempty interior."""
    normals: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)
    kind: ClassVar[str] = "hpolytope"

    def __post_init__(self):
        normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        if normals.shape[0] != offsets.shape[0]:
            raise DimensionError("HalfspacePolytope needs one offset per normal")
        object.__setattr__(self, "normals", _readonly(normals))
        object.__setattr__(self, "offsets", _readonly(offsets))

    @property
    def n(self) -> int:
        return self.normals.shape[1]

    def _interior_point(self) -> np.ndarray:
        if np.all(self.offsets > 0):
            return np.zeros(self.n)
        # Chebyshev center
        norms = np.linalg.norm(self.normals, axis=1)
        res = linprog(
            np.concatenate([np.zeros(self.n), [-1.0]]),
            A_ub=np.column_stack([self.normals, norms]),
            b_ub=self.offsets,
            bounds=[(None, None)] * self.n + [(0, None)],
            method="highs",
        )
        if res.status != 0:
            raise UnboundedBodyError(f"Halfspace system is unbounded or infeasible: {res.message}")
        if res.x[-1] <= RANK_TOL:
            raise DegenerateBodyError("Halfspace polytope has empty interior")
        return res.x[:-1]

    @cached_property
    def vertices(self) -> np.ndarray:
        if self.n == 1:
            a = self.normals[:, 0]
            b = self.offsets
            upper = b[a > 0] / a[a > 0]
            lower = b[a < 0] / a[a < 0]
            if upper.size == 0 or lower.size == 0:
                raise UnboundedBodyError("Halfspace interval is unbounded")
            return _readonly(np.array([[lower.max()], [upper.min()]]))
        halfspaces = np.column_stack([self.normals, -self.offsets])
        try:
            intersection = HalfspaceIntersection(halfspaces, self._interior_point())
        except QhullError as e:
            raise UnboundedBodyError(f"Halfspace intersection failed: {e}") from e
        points = intersection.intersections
        if not np.all(np.isfinite(points)):
            raise UnboundedBodyError("Halfspace polytope is unbounded")
        return _readonly(points)

    def _contains(self, points, tol):
        return np.all(points @ self.normals.T <= self.offsets + tol, axis=1)

    def facets(self):
        return self.normals, self.offsets


# ==================== ZONOTOPE ====================

@dataclass(frozen=True, eq=False)
class Zonotope(Body):
    """Minkowski sum of segments [-x_i, x_i] for generator rows x_i."""
    generators: np.ndarray = field(repr=False)
    kind: ClassVar[str] = "zonotope"

    def __post_init__(self):
        object.__setattr__(self, "generators", _readonly(np.atleast_2d(self.generators)))

    @property
    def n(self) -> int:
        return self.generators.shape[1]

    def support(self, directions):
        rows = _rows(directions, self.n)
        return np.abs(rows @ self.generators.T).sum(axis=1)

    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.generators, axis=1).sum())

    @cached_property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.generators, tol=RANK_TOL * max(1.0, np.abs(self.generators).max())))

    @cached_property
    def facet_normals(self) -> Optional[np.ndarray]:
        """
        Unit normals of every hyperplane spanned by n-1 generators; these
        include all facet normals, so |<y, nu>| <= h(nu) describes the body.
        None when the generators do not span R^n or the subset count is too large.
        """
        n, N = self.n, self.generators.shape[0]
        if self.rank < n:
            return None
        if n == 1:
            return np.array([[1.0]])
        subsets = list(itertools.combinations(range(N), n - 1))
        if len(subsets) > MAX_ZONOTOPE_FACET_SUBSETS:
            return None
        stacks = self.generators[np.array(subsets)]
        _, s, vh = np.linalg.svd(stacks)
        normals = vh[:, -1, :]
        keep = s[:, -1] > RANK_TOL * max(1.0, float(s.max()))
        normals = normals[keep]
        # dedupe antipodal and repeated normals
        signs = np.sign(normals[np.arange(normals.shape[0]), np.argmax(np.abs(normals) > 1e-12, axis=1)])
        normals = normals * signs[:, None]
        normals = np.unique(np.round(normals, 12), axis=0)
        return _readonly(normals / np.linalg.norm(normals, axis=1, keepdims=True))

    def _contains(self, points, tol):
        normals = self.facet_normals
        if normals is not None:
            bounds = self.support(normals)
            return np.all(np.abs(points @ normals.T) <= bounds + tol, axis=1)
        return np.array([self._lp_contains(p, tol) for p in points])

    def _lp_contains(self, point, tol):
        N = self.generators.shape[0]
        res = linprog(
            np.zeros(N),
            A_eq=self.generators.T,
            b_eq=point,
            bounds=[(-1.0 - tol, 1.0 + tol)] * N,
            method="highs",
        )
        return res.status == 0

    def facets(self):
        normals = self.facet_normals
        if normals is None:
            raise DegenerateBodyError("Zonotope facets unavailable (rank deficient or too many generators)")
        bounds = self.support(normals)
        return np.vstack([normals, -normals]), np.concatenate([bounds, bounds])


# ==================== BALLS ====================

@dataclass(frozen=True, eq=False)
class EuclideanBall(Body):
    center: np.ndarray
    radius: float
    kind: ClassVar[str] = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _readonly(np.atleast_1d(self.center)))
        if not self.radius >= 0 or not np.isfinite(self.radius):
            raise UnboundedBodyError(f"Ball radius must be finite and nonnegative, got {self.radius}")

    @classmethod
    def centered(cls, n: int, radius: float = 1.0) -> "EuclideanBall":
        return cls(np.zeros(n), float(radius))

    @property
    def n(self) -> int:
        return self.center.shape[0]

    def support(self, directions):
        rows = _rows(directions, self.n)
        return rows @ self.center + self.radius * np.linalg.norm(rows, axis=1)

    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.center) + self.radius)

    def _contains(self, points, tol):
        return np.linalg.norm(points - self.center, axis=1) <= self.radius + tol


@dataclass(frozen=True, eq=False)
class BallIntersection(Body):
    """Intersection of the balls B(c_i, radius) over center rows c_i."""
    centers: np.ndarray = field(repr=False)
    radius: float = 1.0
    kind: ClassVar[str] = "ball_intersection"

    def __post_init__(self):
        object.__setattr__(self, "centers", _readonly(np.atleast_2d(self.centers)))
        if not self.radius > 0:
            raise DegenerateBodyError(f"Ball radius must be positive, got {self.radius}")

    @property
    def n(self) -> int:
        return self.centers.shape[1]

    @cached_property
    def arcs(self):
        if self.n != 2:
            return None
        return disks.boundary_arcs(self.centers, self.radius)

    @cached_property
    def minimax_center(self):
        """(point, radius) minimizing the largest distance to the centers."""
        c = self.centers
        start = np.concatenate([c.mean(axis=0), [np.max(np.sum((c - c.mean(axis=0)) ** 2, axis=1))]])
        res = minimize(
            lambda z: z[-1],
            start,
            jac=lambda z: np.concatenate([np.zeros(self.n), [1.0]]),
            constraints=[{
                "type": "ineq",
                "fun": lambda z: z[-1] - np.sum((c - z[:-1]) ** 2, axis=1),
                "jac": lambda z: np.column_stack([2.0 * (c - z[:-1]), np.ones(c.shape[0])]),
            }],
            method="SLSQP",
        )
        return res.x[:-1], float(np.sqrt(max(res.x[-1], 0.0)))

    @property
    def is_empty(self) -> bool:
        if self.n == 2:
            return len(self.arcs) == 0
        return self.minimax_center[1] >= self.radius

    def bounding_radius(self) -> float:
        return float((np.linalg.norm(self.centers, axis=1) + self.radius).min())

    def _contains(self, points, tol):
        d = np.linalg.norm(points[:, None, :] - self.centers[None, :, :], axis=2)
        return np.all(d <= self.radius + tol, axis=1)

    def _support_unit(self, units):
        if self.n == 1:
            lo = self.centers[:, 0].max() - self.radius
            hi = self.centers[:, 0].min() + self.radius
            if lo > hi:
                raise DegenerateBodyError("Ball intersection is empty")
            return np.where(units[:, 0] >= 0, hi * units[:, 0], lo * units[:, 0])
        if self.is_empty:
            raise DegenerateBodyError("Ball intersection has empty interior")
        if self.n == 2:
            return disks.arc_support(self.arcs, self.radius, units)
        return np.array([self._support_slsqp(u) for u in units])

    def _support_slsqp(self, u: np.ndarray) -> float:
        c, r = self.centers, self.radius
        res = minimize(
            lambda y: -float(u @ y),
            self.minimax_center[0],
            jac=lambda y: -u,
            constraints=[{
                "type": "ineq",
                "fun": lambda y: r * r - np.sum((c - y) ** 2, axis=1),
                "jac": lambda y: 2.0 * (c - y),
            }],
            method="SLSQP",
            options={"ftol": 1e-12, "maxiter": 200},
        )
        return float(-res.fun)


# ==================== ORACLES ====================

@dataclass(frozen=True, eq=False)
class SupportOracle(Body):
    """
    Body known through a support function u -> h(u) over rows.

    Membership uses `membership_fn` when given, else the outer approximation
    {y : <y, theta> <= h(theta)} over the sphere grid.
    """
    dim: int
    support_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    radius: float = np.inf
    membership_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    kind: ClassVar[str] = "support_oracle"

    @property
    def n(self) -> int:
        return self.dim

    def support(self, directions):
        rows = _rows(directions, self.n)
        return np.asarray(self.support_fn(rows), dtype=float)

    def bounding_radius(self) -> float:
        if not np.isfinite(self.radius):
            raise UnboundedBodyError("Support oracle has no finite bounding radius")
        return float(self.radius)

    @cached_property
    def _outer_grid(self):
        grid = sphere_grid(self.n)
        return grid, self.support(grid)

    def _contains(self, points, tol):
        if self.membership_fn is not None:
            return np.asarray(self.membership_fn(points), dtype=bool)
        grid, h = self._outer_grid
        out = np.empty(points.shape[0], dtype=bool)
        for start in range(0, points.shape[0], 4096):
            chunk = points[start:start + 4096]
            out[start:start + 4096] = np.all(chunk @ grid.T <= h + tol, axis=1)
        return out


class RadialBody(Body):
    """
    Star body about the origin, known through its gauge; support values come
    from the radial function sampled on the sphere grid.
    """

    def gauge(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _contains(self, points, tol):
        return self.gauge(points) <= 1.0 + tol

    @cached_property
    def _radial_grid(self):
        grid = sphere_grid(self.n)
        return grid, 1.0 / self.gauge(grid)

    def _support_unit(self, units):
        grid, rho = self._radial_grid
        return ((units @ grid.T) * rho).max(axis=1)


@dataclass(frozen=True, eq=False)
class MembershipOracle(RadialBody):
    """
    Body known through an indicator and a bounding radius; the origin must
    be interior for support evaluation (gauge by bisection along rays).
    """
    dim: int
    indicator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    radius: float = np.inf
    kind: ClassVar[str] = "membership_oracle"

    @property
    def n(self) -> int:
        return self.dim

    def bounding_radius(self) -> float:
        if not np.isfinite(self.radius):
            raise UnboundedBodyError("Membership oracle has no finite bounding radius")
        return float(self.radius)

    def _contains(self, points, tol):
        return np.asarray(self.indicator(points), dtype=bool)

    def gauge(self, points, iterations: int = 60):
        points = _rows(points, self.n)
        norms = np.linalg.norm(points, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        units = points / safe[:, None]
        lo = np.zeros(points.shape[0])
        hi = np.full(points.shape[0], self.bounding_radius())
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            inside = self._contains(units * mid[:, None], 0.0)
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        if np.any(lo <= 0):
            raise NotInteriorError("Origin is not an interior point of the membership body",
                                   direction=units[np.argmin(lo)])
        return norms / lo


@dataclass(frozen=True, eq=False)
class PolarBody(RadialBody):
    """K° = {y : h_K(y) <= 1} for a body K with the origin in its interior."""
    primal: Body
    kind: ClassVar[str] = "polar"

    @property
    def n(self) -> int:
        return self.primal.n

    def gauge(self, points):
        return self.primal.support(_rows(points, self.n))

    @cached_property
    def _radius(self) -> float:
        grid = sphere_grid(self.n)
        h_min = float(self.primal.support(grid).min())
        delta = covering_angle(self.n, grid.shape[0])
        slack = h_min - self.primal.bounding_radius() * 2.0 * np.sin(delta / 2.0)
        if slack <= 0:
            # grid too coarse for a certified bound; refine once
            fine = sphere_grid(self.n, 4 * default_grid_size(self.n))
            h_min = float(self.primal.support(fine).min())
            delta = covering_angle(self.n, fine.shape[0])
            slack = h_min - self.primal.bounding_radius() * 2.0 * np.sin(delta / 2.0)
        if slack <= 0:
            raise NotInteriorError("Origin is too close to the boundary for a finite polar radius")
        return 1.0 / slack

    def bounding_radius(self) -> float:
        return self._radius
