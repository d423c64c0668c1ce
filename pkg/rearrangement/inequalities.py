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
Quadrature checks of rearrangement inequalities.

    peakedness   mu_1(K) >= mu_2(K) for origin-symmetric convex K
    bll          integral of prod f_i(<x, u_i>) <= same with every f_i rearranged
    kanter       f1 more peaked than f2 and f unimodal => f f1 more peaked than f f2

All integrals use midpoint tensor grids; the error bar is the gap between
the full and half resolution rules.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from scipy.optimize import linprog

from geometry.bodies import Body, EuclideanBall, SymmetricCrossHull, VertexBody, VPolytope
from geometry.operations import is_origin_symmetric
from geometry.types import DimensionError, HypothesisError, LabError, QuadratureError
from models.densities import Density, GridDensity, ProductDensity, TruncatedGaussian, UniformOnBody
from rearrangement.grid import GridFunction
from rearrangement.symmetrization import sdr
from utils.rng import RngLike, as_generator

logger = logging.getLogger(__name__)

MAX_QUADRATURE_DIMENSION = 3
MAX_BLL_FACTORS = 4
DEFAULT_CELLS = {1: 4000, 2: 400, 3: 80}
BLL_CELLS = {1: 4000, 2: 600, 3: 100}
ERROR_MULTIPLIER = 3.0


@dataclass
class PeakednessReport:
    """Per-body margins mu_1(K) - mu_2(K) with quadrature error bars."""
    margins: List[float] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)
    masses_first: List[float] = field(default_factory=list)
    masses_second: List[float] = field(default_factory=list)
    verdict: str = "consistent"

    @property
    def worst_index(self) -> int:
        scaled = [m + ERROR_MULTIPLIER * e for m, e in zip(self.margins, self.errors)]
        return int(np.argmin(scaled)) if scaled else -1

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "margins": self.margins,
            "errors": self.errors,
            "mass_first": self.masses_first,
            "mass_second": self.masses_second,
        }


@dataclass
class BllResult:
    lhs: float
    rhs: float
    error: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + self.error

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "error": self.error, "holds": self.holds}


# ==================== QUADRATURE ====================

def _midpoint_grid(lower: np.ndarray, upper: np.ndarray, cells: int):
    n = lower.shape[0]
    widths = (upper - lower) / cells
    axes = [lower[k] + widths[k] * (np.arange(cells) + 0.5) for k in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh]), float(np.prod(widths))


def _body_mass(f: Density, body: Body, cells: int) -> float:
    eye = np.eye(body.n)
    upper = body.support(eye)
    lower = -body.support(-eye)
    points, cell_volume = _midpoint_grid(lower, upper, cells)
    inside = body.contains(points)
    return float(np.sum(f.pdf(points[inside])) * cell_volume)


def body_mass(f: Density, body: Body, cells: int) -> tuple:
    """(mu_f(K), error) from the full and half resolution midpoint rules."""
    fine = _body_mass(f, body, cells)
    coarse = _body_mass(f, body, max(cells // 2, 1))
    return fine, abs(fine - coarse)


def peakedness_compare(f1: Density, f2: Density, bodies: Sequence[Body], cells: int = None) -> PeakednessReport:
    """
    Compare mu_1(K) and mu_2(K) over origin-symmetric bodies K.

    Verdict "consistent" iff no margin falls below -3 times its error.

    Raises:
        DimensionError: If densities and bodies disagree in dimension
        HypothesisError: If a body is not origin-symmetric
        QuadratureError: If the dimension exceeds 3
    """
    n = f1.n
    if f2.n != n:
        raise DimensionError(f"Densities live in R^{f1.n} and R^{f2.n}")
    if n > MAX_QUADRATURE_DIMENSION:
        raise QuadratureError(f"Quadrature limited to dimension {MAX_QUADRATURE_DIMENSION}, got {n}")
    cells = cells or DEFAULT_CELLS[n]
    report = PeakednessReport()
    for k, body in enumerate(bodies):
        if body.n != n:
            raise DimensionError(f"Body {k} lives in R^{body.n}, densities in R^{n}")
        if not is_origin_symmetric(body):
            raise HypothesisError(f"Body {k} ({body.kind}) is not origin-symmetric")
        mu1, e1 = body_mass(f1, body, cells)
        mu2, e2 = body_mass(f2, body, cells)
        report.masses_first.append(mu1)
        report.masses_second.append(mu2)
        report.margins.append(mu1 - mu2)
        report.errors.append(e1 + e2 + 1e-12)
    failing = [k for k, (m, e) in enumerate(zip(report.margins, report.errors)) if m < -ERROR_MULTIPLIER * e]
    report.verdict = "violated" if failing else "consistent"
    if failing:
        logger.warning(f"Peakedness violated on {len(failing)} of {len(bodies)} bodies")
    return report


# ==================== BRASCAMP-LIEB-LUTTINGER ====================

def _bll_box(us: np.ndarray, widths: np.ndarray):
    """Bounding box of {x : |<x, u_i>| <= W_i} by linear programming."""
    N = us.shape[1]
    a_ub = np.vstack([us, -us])
    b_ub = np.concatenate([widths, widths])
    lower, upper = np.empty(N), np.empty(N)
    for k in range(N):
        c = np.zeros(N)
        c[k] = 1.0
        low = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * N, method="highs")
        high = linprog(-c, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * N, method="highs")
        if low.status != 0 or high.status != 0:
            raise LabError("Vectors u_i do not span R^N; the integral diverges")
        lower[k], upper[k] = low.fun, -high.fun
    return lower, upper


def _bll_integral(fs: Sequence[GridFunction], us: np.ndarray, lower, upper, cells: int) -> float:
    points, cell_volume = _midpoint_grid(lower, upper, cells)
    values = np.ones(points.shape[0])
    for f, u in zip(fs, us):
        values *= f.lookup((points @ u)[:, None])
    return float(values.sum() * cell_volume)


def bll_check(fs: Sequence[GridFunction], us: Sequence[Sequence[float]], cells: int = None) -> BllResult:
    """
    Both sides of the Rogers / Brascamp-Lieb-Luttinger inequality for
    one-dimensional grid functions.

    Raises:
        QuadratureError: If N > 3
        LabError: If M > 4, lengths differ, or a function is not 1-D
    """
    us = np.atleast_2d(np.asarray(us, dtype=float))
    N = us.shape[1]
    if N > MAX_QUADRATURE_DIMENSION:
        raise QuadratureError(f"BLL quadrature limited to N <= {MAX_QUADRATURE_DIMENSION}, got {N}")
    if len(fs) != us.shape[0]:
        raise LabError(f"Got {len(fs)} functions and {us.shape[0]} vectors")
    if len(fs) > MAX_BLL_FACTORS:
        raise LabError(f"BLL check supports at most {MAX_BLL_FACTORS} factors, got {len(fs)}")
    if any(f.n != 1 for f in fs):
        raise LabError("BLL factors must be one-dimensional grid functions")
    cells = cells or BLL_CELLS[N]
    widths = np.array([f.half_width for f in fs])
    lower, upper = _bll_box(us, widths)
    rearranged = [sdr(f) for f in fs]

    def side(functions):
        fine = _bll_integral(functions, us, lower, upper, cells)
        coarse = _bll_integral(functions, us, lower, upper, cells // 2)
        return fine, abs(fine - coarse)

    lhs, lhs_err = side(fs)
    rhs, rhs_err = side(rearranged)
    result = BllResult(lhs, rhs, lhs_err + rhs_err)
    logger.debug(f"BLL check: lhs={lhs:.6g} rhs={rhs:.6g} error={result.error:.2g}")
    return result


# ==================== KANTER ====================

def is_unimodal(f: Density, tol: float = 1e-12) -> bool:
    """Even and quasi-concave: radial-decreasing grids, centered balls and gaussians, symmetric uniforms."""
    if isinstance(f, GridDensity):
        return bool(np.allclose(sdr(f.grid).values, f.grid.values, atol=tol))
    if isinstance(f, TruncatedGaussian):
        return not np.any(f.center)
    if isinstance(f, UniformOnBody):
        if isinstance(f.body, EuclideanBall):
            return not np.any(f.body.center)
        return is_origin_symmetric(f.body)
    if isinstance(f, ProductDensity):
        return all(is_unimodal(g, tol) for g in f.factors)
    return False


def kanter_check(f1: Density, f2: Density, f: Density, bodies: Sequence[Body], cells: int = None) -> PeakednessReport:
    """
    Peakedness of f1 x f versus f2 x f over product-space bodies.

    The hypothesis f1 more peaked than f2 is checked first on the
    projections of the vertex bodies to the first block.

    Raises:
        QuadratureError: If the total dimension exceeds 3
        HypothesisError: If f is not unimodal or f1 is not more peaked than f2
    """
    total = f1.n + f.n
    if total > MAX_QUADRATURE_DIMENSION:
        raise QuadratureError(f"Kanter check limited to total dimension {MAX_QUADRATURE_DIMENSION}, got {total}")
    if not is_unimodal(f):
        raise HypothesisError(f"Density {f.kind} is not unimodal (even and quasi-concave)")
    projections = [VPolytope(b.vertices[:, :f1.n]) for b in bodies if isinstance(b, VertexBody)]
    if projections:
        pre = peakedness_compare(f1, f2, projections)
        if pre.verdict != "consistent":
            raise HypothesisError("f1 is not more peaked than f2 on the projected bodies")
    return peakedness_compare(ProductDensity((f1, f)), ProductDensity((f2, f)), bodies, cells)


def random_symmetric_polygons(count: int, rng: RngLike, vertices: int = 4, scale: float = 1.0) -> List[SymmetricCrossHull]:
    """Random origin-symmetric polygons conv{+-p_i} with p_i uniform in [-scale, scale]^2."""
    gen = as_generator(rng)
    polygons = []
    while len(polygons) < count:
        points = scale * (2.0 * gen.random((vertices, 2)) - 1.0)
        body = SymmetricCrossHull(points)
        if body.full_dimensional:
            polygons.append(body)
    return polygons
