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
Operations on bodies: realizing XC, polarity, and support-function
functionals (Hausdorff distance, diameter, mean width).
"""

import itertools
import logging
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from geometry.bodies import (
    Body,
    EuclideanBall,
    HalfspacePolytope,
    MembershipOracle,
    PolarBody,
    RadialBody,
    SupportOracle,
    SymmetricCrossHull,
    VertexBody,
    VPolytope,
    Zonotope,
)
from geometry.coefficients import (
    CoefficientSet,
    CrossPolytope,
    Cube,
    GenericV,
    LqBall,
    MCombination,
    Simplex,
    SimplexWithOrigin,
)
from geometry.sphere import covering_angle, default_grid_size, sphere_grid
from geometry.types import DimensionError, Matrix, NotInteriorError

logger = logging.getLogger(__name__)

MAX_COMBINATION_VERTICES = 4096
MAX_SIGN_ENUMERATION = 24
UNIT_TOL = 1e-12


# ==================== REALIZATION ====================

def _combination_vertices(C: MCombination) -> Optional[np.ndarray]:
    """Points (a_1 c_1, ..., a_m c_m) over vertices a of M and c_i of C_i."""
    m_vertices = C.M.vertices()
    part_vertices = [p.vertices() for p in C.parts]
    if m_vertices is None or any(v is None for v in part_vertices):
        return None
    count = m_vertices.shape[0] * int(np.prod([v.shape[0] for v in part_vertices]))
    if count > MAX_COMBINATION_VERTICES:
        return None
    points = []
    for a in m_vertices:
        for choice in itertools.product(*part_vertices):
            points.append(np.concatenate([a_i * c_i for a_i, c_i in zip(a, choice)]))
    return np.unique(np.array(points), axis=0)


def realize(X: Matrix, C: CoefficientSet) -> Body:
    """
    The body XC = {Xc : c in C}.

    Args:
        X: n x N matrix
        C: Coefficient set in R^N

    Returns:
        Polytope representation when C is a polytope with known vertices,
        otherwise a SupportOracle with h(u) = h_C(X^T u)

    Raises:
        DimensionError: If C does not live in R^N
    """
    if C.dim != X.N:
        raise DimensionError(f"Coefficient set dimension {C.dim} does not match N={X.N}")
    columns = X.columns
    if isinstance(C, Simplex):
        return VPolytope(columns)
    if isinstance(C, SimplexWithOrigin):
        return VPolytope(np.vstack([columns, np.zeros(X.n)]))
    if isinstance(C, CrossPolytope) or (isinstance(C, LqBall) and C.q == 1 and not C.positive):
        return SymmetricCrossHull(columns)
    if isinstance(C, Cube) or (isinstance(C, LqBall) and np.isinf(C.q) and not C.positive):
        return Zonotope(columns)
    if isinstance(C, GenericV):
        return VPolytope(C.points @ X.entries.T)
    if isinstance(C, MCombination):
        points = _combination_vertices(C)
        if points is not None:
            return VPolytope(points @ X.entries.T)

    entries = X.entries
    radius = float(np.linalg.norm(columns, axis=1) @ C.coordinate_bound())
    membership = None
    if isinstance(C, LqBall) and C.q == 2 and not C.positive:
        membership = _ellipsoid_membership(entries)
    return SupportOracle(
        X.n,
        lambda u: C.support(u @ entries),
        radius,
        membership,
    )


def _ellipsoid_membership(entries: np.ndarray):
    pinv = np.linalg.pinv(entries)
    projector = entries @ pinv

    def contains(points):
        coeffs = points @ pinv.T
        in_range = np.linalg.norm(points - points @ projector.T, axis=1) <= 1e-9 * (1 + np.linalg.norm(points, axis=1))
        return in_range & (np.linalg.norm(coeffs, axis=1) <= 1.0 + 1e-9)

    return contains


# ==================== SUPPORT FUNCTIONALS ====================

def support(body: Body, u) -> float:
    """
    h_B(u) for a unit vector u.

    Raises:
        DimensionError: If u has the wrong length or is not a unit vector
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != body.n:
        raise DimensionError(f"Direction has length {u.shape[0]}, body lives in R^{body.n}")
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL * 1e3:
        raise DimensionError(f"Direction must be a unit vector, |u| = {np.linalg.norm(u)}")
    return float(body.support(u[None, :])[0])


def hausdorff_distance(first: Body, second: Body, grid_size: Optional[int] = None) -> float:
    """
    Max of |h_1 - h_2| over the sphere grid.

    A lower bound on the true distance; the gap is at most
    (R_1 + R_2) * 2 sin(delta / 2) for grid covering angle delta.
    """
    if first.n != second.n:
        raise DimensionError(f"Bodies live in R^{first.n} and R^{second.n}")
    grid = sphere_grid(first.n, grid_size)
    return float(np.max(np.abs(first.support(grid) - second.support(grid))))


def hausdorff_resolution(first: Body, second: Body, grid_size: Optional[int] = None) -> float:
    """Upper bound on the amount hausdorff_distance may underestimate."""
    size = grid_size or default_grid_size(first.n)
    delta = covering_angle(first.n, size)
    return float((first.bounding_radius() + second.bounding_radius()) * 2.0 * np.sin(delta / 2.0))


def mean_width(body: Body, grid_size: Optional[int] = None) -> float:
    """2 * average of h_B over the sphere grid."""
    grid = sphere_grid(body.n, grid_size)
    if body.n == 1:
        return float(body.support(grid).sum())
    return float(2.0 * np.mean(body.support(grid)))


def diameter(body: Body, grid_size: Optional[int] = None) -> float:
    """
    Largest distance between two points of the body.

    Exact for vertex bodies, balls and zonotopes with at most 24 generators
    (2 * ||X : l_inf -> l_2||); sphere-grid width otherwise.
    """
    if isinstance(body, EuclideanBall):
        return 2.0 * body.radius
    if isinstance(body, SymmetricCrossHull):
        return float(2.0 * np.linalg.norm(body.generators, axis=1).max())
    if isinstance(body, VertexBody):
        vertices = body.vertices
        if vertices.shape[0] < 2:
            return 0.0
        return float(pdist(vertices).max())
    if isinstance(body, Zonotope) and body.generators.shape[0] <= MAX_SIGN_ENUMERATION:
        g = body.generators
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=g.shape[0] - 1)))
        signs = np.column_stack([np.ones(signs.shape[0]), signs]) if g.shape[0] > 1 else np.ones((1, 1))
        return float(2.0 * np.linalg.norm(signs @ g, axis=1).max())
    grid = sphere_grid(body.n, grid_size)
    return float(np.max(body.support(grid) + body.support(-grid)))


def is_origin_symmetric(body: Body, tol: float = 1e-9, grid_size: Optional[int] = None) -> bool:
    """h(u) = h(-u) on the sphere grid."""
    grid = sphere_grid(body.n, grid_size)
    h_plus = body.support(grid)
    h_minus = body.support(-grid)
    scale = max(1.0, float(np.abs(h_plus).max()))
    return bool(np.max(np.abs(h_plus - h_minus)) <= tol * scale)


def parallel_body(body: Body, eps: float, sphere_size: Optional[int] = None) -> Body:
    """
    B + eps B_2^n.

    Balls stay exact; polytopes in n <= 3 become the hull of vertices plus a
    sphere point set; everything else becomes a support oracle h + eps.
    """
    if eps < 0:
        raise DimensionError(f"Parallel body needs eps >= 0, got {eps}")
    n = body.n
    if isinstance(body, EuclideanBall):
        return EuclideanBall(body.center, body.radius + eps)
    if isinstance(body, VertexBody) and 2 <= n <= 3:
        directions = sphere_grid(n, sphere_size or (256 if n == 2 else 1024))
        delta = covering_angle(n, directions.shape[0])
        # midpoint between inscribed and circumscribed sphere polytopes
        scale = eps * 0.5 * (1.0 + 1.0 / np.cos(delta))
        points = (body.vertices[:, None, :] + scale * directions[None, :, :]).reshape(-1, n)
        return VPolytope(points)
    if n == 1:
        h = body.support(np.array([[1.0], [-1.0]]))
        return VPolytope(np.array([[-h[1] - eps], [h[0] + eps]]))
    return SupportOracle(
        n,
        lambda u: body.support(u) + eps * np.linalg.norm(u, axis=1),
        body.bounding_radius() + eps,
    )


# ==================== GAUGE AND POLARITY ====================

def check_origin_interior(body: Body, tol: float = 1e-12) -> None:
    """
    Raise NotInteriorError naming a direction u with h(u) <= 0 when the
    origin is not an interior point.
    """
    n = body.n
    eye = np.eye(n)
    probe = np.vstack([eye, -eye])
    h = body.support(probe)
    if np.any(h <= tol):
        k = int(np.argmin(h))
        raise NotInteriorError(f"Origin not interior: support {h[k]:.3g} in direction {probe[k]}",
                               direction=probe[k])
    if not bool(body.contains(np.zeros((1, n)), 0.0)[0]):
        raise NotInteriorError("Origin is not contained in the body")
    if isinstance(body, VertexBody) and n >= 2:
        if not body.full_dimensional:
            raise NotInteriorError("Polytope is lower-dimensional; origin cannot be interior")
        normals, offsets = body.facets()
        if np.any(offsets <= tol * np.linalg.norm(normals, axis=1)):
            k = int(np.argmin(offsets))
            raise NotInteriorError(f"Origin lies on the facet with normal {normals[k]}",
                                   direction=normals[k])
    elif isinstance(body, Zonotope) and body.rank < n:
        raise NotInteriorError("Zonotope generators do not span; origin cannot be interior")


def gauge(body: Body, points) -> np.ndarray:
    """
    Minkowski functional ||y||_B = inf{t > 0 : y in tB} for bodies with the
    origin in their interior, vectorized over rows.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if isinstance(body, RadialBody):
        return body.gauge(points)
    if isinstance(body, EuclideanBall):
        c, r = body.center, body.radius
        norms = np.linalg.norm(points, axis=1)
        if np.linalg.norm(c) >= r:
            raise NotInteriorError("Origin is not interior to the ball")
        safe = np.where(norms > 0, norms, 1.0)
        units = points / safe[:, None]
        proj = units @ c
        rho = proj + np.sqrt(proj ** 2 - c @ c + r * r)
        return norms / rho
    if isinstance(body, (VertexBody, Zonotope)):
        check_origin_interior(body)
        normals, offsets = body.facets()
        return np.maximum((points @ normals.T / offsets).max(axis=1), 0.0)
    check_origin_interior(body)
    return MembershipOracle(body.n, body.contains, body.bounding_radius()).gauge(points)


def radial_function(body: Body, directions) -> np.ndarray:
    """rho_B(theta) = 1 / gauge(theta)."""
    return 1.0 / gauge(body, directions)


def polar(body: Body) -> Body:
    """
    Polar body {y : <x, y> <= 1 for all x in B}.

    Polytopes go to exact H or V representations, centered balls to balls,
    everything else to a PolarBody known through h_B.

    Raises:
        NotInteriorError: If the origin is not an interior point of B
    """
    check_origin_interior(body)
    if isinstance(body, EuclideanBall) and not np.any(body.center):
        return EuclideanBall(body.center, 1.0 / body.radius)
    if isinstance(body, HalfspacePolytope):
        return VPolytope(body.normals / body.offsets[:, None])
    if isinstance(body, SymmetricCrossHull):
        g = body.generators
        return HalfspacePolytope(np.vstack([g, -g]), np.ones(2 * g.shape[0]))
    if isinstance(body, VertexBody):
        return HalfspacePolytope(body.vertices, np.ones(body.vertices.shape[0]))
    if isinstance(body, Zonotope) and body.facet_normals is not None:
        normals = body.facet_normals
        scaled = normals / body.support(normals)[:, None]
        return VPolytope(np.vstack([scaled, -scaled]))
    if isinstance(body, PolarBody):
        return body.primal
    return PolarBody(body)
