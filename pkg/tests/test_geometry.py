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
"""Geometry kernel: bodies, realize, volumes, polarity and measures."""

import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from geometry.bodies import (
    BallIntersection,
    EuclideanBall,
    HalfspacePolytope,
    PolarBody,
    SymmetricCrossHull,
    VPolytope,
    Zonotope,
)
from geometry.coefficients import Cube, CrossPolytope, Simplex, SimplexWithOrigin
from geometry.measures import RadialMeasure, measure
from geometry.operations import (
    diameter,
    gauge,
    hausdorff_distance,
    is_origin_symmetric,
    mean_width,
    parallel_body,
    polar,
    realize,
    support,
)
from geometry.sphere import sphere_grid
from geometry.types import DimensionError, Matrix, NotInteriorError, ball_volume
from geometry.volumes import intrinsic_volume, monte_carlo_volume, steiner_fit, volume
from models.densities import UniformOnBody, ball_radius
from models.sampling import sample_points
from utils.rng import RngStream

SQUARE = VPolytope(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))


# ==================== REALIZE ====================

def test_simplex_realizes_hull_of_columns():
    X = Matrix(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    body = realize(X, Simplex(3))
    assert_allclose(volume(body).value, 0.5)


def test_simplex_with_origin_adds_origin():
    X = Matrix(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert_allclose(volume(realize(X, SimplexWithOrigin(2))).value, 0.5)


def test_cross_polytope_realizes_symmetric_hull():
    body = realize(Matrix(np.eye(2)), CrossPolytope(2))
    assert isinstance(body, SymmetricCrossHull)
    assert_allclose(volume(body).value, 2.0)


def test_realize_rejects_dimension_mismatch():
    with pytest.raises(DimensionError):
        realize(Matrix(np.eye(2)), Simplex(3))


def test_collinear_columns_give_flagged_zero_area():
    X = Matrix(np.array([[0.0, 1.0, 2.0], [0.0, 1.0, 2.0]]))
    est = volume(realize(X, Simplex(3)))
    assert est.value == 0.0
    assert est.degenerate


# ==================== ZONOTOPES ====================

def test_zonotope_area_from_determinants():
    body = realize(Matrix(np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]])), Cube(3))
    assert isinstance(body, Zonotope)
    assert_allclose(volume(body).value, 8.0)


@pytest.mark.parametrize("n", [2, 3])
def test_zonotope_volume_matches_monte_carlo(n):
    root = RngStream(2024)
    for k in range(10):
        gen = root.child(k).generator()
        generators = gen.uniform(-1.0, 1.0, size=(n + 2, n))
        body = Zonotope(generators)
        exact = volume(body).value
        est = monte_carlo_volume(body, root.child(100 + k), samples=40_000)
        assert abs(est.value - exact) <= 4.0 * est.stderr + 1e-9


# ==================== INTRINSIC VOLUMES ====================

def test_square_half_perimeter():
    assert_allclose(intrinsic_volume(SQUARE, 1).value, 4.0)


def test_ball_intrinsic_volume_closed_form():
    assert_allclose(intrinsic_volume(EuclideanBall.centered(3), 2).value, 2.0 * math.pi)


def test_intrinsic_volume_index_out_of_range():
    with pytest.raises(DimensionError):
        intrinsic_volume(SQUARE, 3)


def test_ball_volume_values():
    assert_allclose(ball_volume(2), math.pi)
    assert_allclose(ball_volume(3), 4.0 * math.pi / 3.0)


def test_ball_radius_of_unit_square():
    unit = VPolytope(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    assert_allclose(ball_radius(unit), 1.0 / math.sqrt(math.pi))


def _cube_vertices(n):
    return VPolytope(np.array(list(itertools.product([-1.0, 1.0], repeat=n))))


def test_steiner_fit_reproduces_held_out_parallel_volume():
    cube = _cube_vertices(3)
    fit = steiner_fit(cube)
    eps0 = fit.held_out_eps
    assert eps0 not in fit.eps
    predicted, stderr = fit.predict(eps0)
    direct = volume(parallel_body(cube, eps0)).value
    assert abs(predicted - direct) <= 3.0 * stderr + 1e-9 * direct
    assert fit.consistent


def test_steiner_path_gives_first_intrinsic_volume_of_cube():
    # V_1([-1, 1]^3) = 3 * 2
    est = intrinsic_volume(_cube_vertices(3), 1)
    assert not est.exact
    assert_allclose(est.value, 6.0, rtol=0.02)


# ==================== SUPPORT FUNCTIONALS ====================

SUBLINEAR_BODIES = {
    "vpolytope": VPolytope(np.array([[0.2, -0.5], [1.0, 0.3], [-0.4, 0.9]])),
    "cross_hull": SymmetricCrossHull(np.array([[1.0, 0.2, 0.0], [0.3, -0.8, 0.5], [0.0, 0.4, 1.2]])),
    "zonotope": Zonotope(np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.3], [0.2, 0.0, 1.0], [0.4, 0.4, 0.4]])),
    "ball_intersection": BallIntersection(np.array([[0.3, 0.0], [-0.2, 0.25], [0.0, -0.3]]), 1.0),
    "polar_body": PolarBody(SQUARE),
}


@pytest.mark.parametrize("name", sorted(SUBLINEAR_BODIES))
def test_support_function_is_sublinear(name):
    body = SUBLINEAR_BODIES[name]
    gen = RngStream(31).generator()
    u = gen.standard_normal((50, body.n))
    v = gen.standard_normal((50, body.n))
    hu, hv, huv = body.support(u), body.support(v), body.support(u + v)
    assert np.all(huv <= hu + hv + 1e-9 * (1.0 + np.abs(hu) + np.abs(hv)))


def test_support_of_square_on_diagonal():
    u = np.array([1.0, 1.0]) / math.sqrt(2.0)
    assert_allclose(support(SQUARE, u), math.sqrt(2.0))


def test_support_requires_unit_vector():
    with pytest.raises(DimensionError):
        support(SQUARE, [2.0, 0.0])


def test_hausdorff_square_to_disk():
    assert_allclose(hausdorff_distance(SQUARE, EuclideanBall.centered(2)), math.sqrt(2.0) - 1.0, rtol=1e-5)


def test_mean_width_of_segment():
    segment = VPolytope(np.array([[-1.0, 0.0], [1.0, 0.0]]))
    assert_allclose(mean_width(segment), 4.0 / math.pi, rtol=1e-6)


@pytest.mark.parametrize("body", [SQUARE, realize(Matrix(np.eye(3)), Cube(3))], ids=["square", "cube"])
def test_first_intrinsic_volume_is_proportional_to_mean_width(body):
    n = body.n
    constant = n * ball_volume(n) / (2.0 * ball_volume(n - 1))
    assert_allclose(intrinsic_volume(body, 1).value, constant * mean_width(body), rtol=5e-3)


def test_diameter_of_square():
    assert_allclose(diameter(SQUARE), 2.0 * math.sqrt(2.0))


def test_origin_symmetry():
    assert is_origin_symmetric(SQUARE)
    assert not is_origin_symmetric(VPolytope(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])))


def test_lens_of_two_unit_disks():
    lens = BallIntersection(np.array([[-0.5, 0.0], [0.5, 0.0]]), 1.0)
    assert_allclose(volume(lens).value, 2.0 * math.pi / 3.0 - math.sqrt(3.0) / 2.0)
    assert_allclose(intrinsic_volume(lens, 1).value, 2.0 * math.pi / 3.0)
    assert_allclose(support(lens, [0.0, 1.0]), math.sqrt(3.0) / 2.0)


def test_disjoint_disks_have_flagged_zero_area():
    est = volume(BallIntersection(np.array([[-2.0, 0.0], [2.0, 0.0]]), 1.0))
    assert est.value == 0.0
    assert est.degenerate


def test_half_sum_of_ball_intersections_stays_in_midpoint_intersection():
    gen = RngStream(17).generator()
    u = gen.uniform(-0.3, 0.3, size=(4, 2))
    v = gen.uniform(-0.3, 0.3, size=(4, 2))
    p = sample_points(UniformOnBody(BallIntersection(u, 1.0)), 2000, RngStream(18))
    q = sample_points(UniformOnBody(BallIntersection(v, 1.0)), 2000, RngStream(19))
    half_sum = 0.5 * p + 0.5 * q
    midpoints = 0.5 * (u + v)
    distances = np.linalg.norm(half_sum[:, None, :] - midpoints[None, :, :], axis=2)
    assert np.count_nonzero(distances.max(axis=1) > 1.0 + 1e-9) == 0


def test_parallel_body_of_ball_is_exact():
    grown = parallel_body(EuclideanBall.centered(2, 1.0), 0.5)
    assert_allclose(grown.radius, 1.5)


# ==================== POLARITY ====================

def test_polar_of_cross_polytope_is_the_square():
    dual = polar(SymmetricCrossHull(np.eye(2)))
    assert isinstance(dual, HalfspacePolytope)
    assert abs(volume(dual).value - 4.0) < 1e-9


def test_polar_of_centered_ball():
    dual = polar(EuclideanBall.centered(3, 2.0))
    assert_allclose(dual.radius, 0.5)


def test_double_polar_of_symmetric_polytope_on_sphere_grid():
    body = SymmetricCrossHull(RngStream(23).generator().standard_normal((5, 3)))
    twice = polar(polar(body))
    grid = sphere_grid(3, 721)
    h, h2 = body.support(grid), twice.support(grid)
    assert np.all(h2 >= h - 1e-9)
    assert np.all(h2 <= (1.0 + 1e-6) * h)


def test_polar_needs_origin_in_interior():
    shifted = VPolytope(np.array([[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]]))
    with pytest.raises(NotInteriorError):
        polar(shifted)


def test_gauge_of_square():
    assert_allclose(gauge(SQUARE, np.array([[0.5, 0.25], [2.0, -3.0]])), [0.5, 3.0])


# ==================== MEASURES ====================

def test_gaussian_measure_of_interval():
    nu = RadialMeasure("gaussian", 1)
    est = measure(nu, VPolytope(np.array([[-1.0], [1.0]])))
    assert_allclose(est.value, math.erf(1.0 / math.sqrt(2.0)))


def test_lebesgue_measure_is_volume():
    assert_allclose(measure(RadialMeasure("lebesgue", 2), SQUARE).value, 4.0)


def test_gaussian_measure_of_square_by_quadrature():
    est = measure(RadialMeasure("gaussian", 2), SQUARE)
    assert_allclose(est.value, math.erf(1.0 / math.sqrt(2.0)) ** 2, atol=1e-5)


@pytest.mark.parametrize("kind", ["lebesgue", "gaussian", "inverse_power"])
def test_radial_measures_pass_concavity_check(kind):
    assert RadialMeasure(kind, 2).check_concavity(RngStream(5))


def test_sphere_grid_is_unit_and_deterministic():
    grid = sphere_grid(3, 512)
    assert_allclose(np.linalg.norm(grid, axis=1), 1.0)
    assert np.array_equal(grid, sphere_grid(3, 512))
