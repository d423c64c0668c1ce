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
Rearrangement Service
Symmetrization runs and randomized trials of the BLL, Kanter and
cube-domination inequalities
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

import os
import sys
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from geometry.bodies import EuclideanBall, Zonotope
from geometry.types import HypothesisError, LabError
from models.densities import Density, ProductDensity, TruncatedGaussian, UniformOnBody
from models.empirical import combine_verdicts
from rearrangement.grid import GridFunction, disk_indicator, interval_indicator
from rearrangement.inequalities import (
    bll_check,
    kanter_check,
    peakedness_compare,
    random_symmetric_polygons,
)
from rearrangement.symmetrization import SymmetrizationResult, SymmetrizationStep, iterate_symmetrizations
from utils.rng import RngStream

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = 180.0 * (3.0 - np.sqrt(5.0))
SCHEDULES = ("axis", "axis+rotation")
BLL_SUPPORT = 1.5
SUP_BOUND_TOL = 1e-12


def build_schedule(name: str, n: int) -> List[SymmetrizationStep]:
    """
    Named symmetrization schedules.

        axis           symmetrize along every coordinate axis in turn
        axis+rotation  planar only: both axes, then rotate by the golden angle
                       and symmetrize again
    """
    if name not in SCHEDULES:
        raise LabError(f"Unknown schedule '{name}', expected one of {SCHEDULES}")
    steps = [SymmetrizationStep(axis) for axis in range(n)]
    if name == "axis+rotation":
        if n != 2:
            raise LabError("Rotation schedules are planar only")
        steps.append(SymmetrizationStep(0, GOLDEN_ANGLE))
        steps.append(SymmetrizationStep(1))
    return steps


def symmetrization_summary(result: SymmetrizationResult) -> Dict[str, Any]:
    history = np.asarray(result.history)
    resampled = set(result.resampled_steps)
    # outside resampling steps the distance to sdr(g) never grows
    increases = [k for k in range(1, history.size)
                 if k not in resampled and history[k] > history[k - 1] * (1 + 1e-9) + 1e-12]
    return {
        "converged": result.converged,
        "steps": int(history.size - 1),
        "final_distance": float(history[-1]),
        "relative_distance": float(history[-1] / result.target_mass) if result.target_mass else 0.0,
        "monotone_outside_resampling": not increases,
        "increases": increases,
        "resampled_steps": list(result.resampled_steps),
        "history": history.tolist(),
    }


class RearrangementService:
    """
    Service for grid rearrangement experiments
    """

    def __init__(self):
        """Initialize rearrangement service"""
        logger.info("Rearrangement service initialized")

    # ==================== SYMMETRIZATION ====================

    def off_center_disk(self, cells: int, center: Sequence[float], radius: float,
                        half_width: float = 1.0) -> GridFunction:
        """Indicator of a disk on a centered grid of the given half width."""
        return disk_indicator(center, radius, cells, 2.0 * half_width / cells)

    def symmetrize(self, g: GridFunction, schedule: str = "axis+rotation", tol: float = 0.02,
                   max_iter: int = 200) -> Dict[str, Any]:
        """
        Iterate a named schedule towards sdr(g).

        Returns:
            Dict with convergence flag, history and the monotonicity check
        """
        result = iterate_symmetrizations(g, build_schedule(schedule, g.n), tol, max_iter)
        summary = symmetrization_summary(result)
        summary["schedule"] = schedule
        summary["verdict"] = "consistent" if summary["monotone_outside_resampling"] else "violated"
        if not result.converged:
            summary["verdict"] = combine_verdicts([summary["verdict"], "inconclusive"])
        logger.info(f"Schedule {schedule}: converged={result.converged} after {summary['steps']} steps")
        return summary

    def compare_schedules(self, g: GridFunction, tol: float = 0.02, max_iter: int = 200) -> Dict[str, Any]:
        """Axis-only against axis+rotation on the same grid function."""
        runs = {name: self.symmetrize(g, name, tol, max_iter) for name in SCHEDULES}
        return {
            "verdict": runs["axis+rotation"]["verdict"],
            "schedules": runs,
        }

    # ==================== BLL ====================

    def random_step_function(self, gen: np.random.Generator, cells: int, h: float) -> GridFunction:
        """Sum of two off-center interval indicators with random heights."""
        g = None
        for _ in range(2):
            length = gen.uniform(0.2, 0.8)
            lo = gen.uniform(-BLL_SUPPORT + 0.1, BLL_SUPPORT - 0.1 - length)
            part = interval_indicator(lo, lo + length, cells, h, gen.uniform(0.5, 2.0))
            g = part if g is None else g.with_values(g.values + part.values)
        return g

    def bll_trials(self, trials: int, rng: RngStream, N: int = 2, M: int = 3, h: float = 1.0 / 200,
                   cells: Optional[int] = None) -> Dict[str, Any]:
        """
        Randomized instances of the BLL inequality with step-function factors
        and gaussian vectors u_i in R^N.
        """
        grid_cells = 2 * int(np.ceil(BLL_SUPPORT / h)) + 1
        results = []
        for t in range(trials):
            gen = rng.child(t).generator()
            fs = [self.random_step_function(gen, grid_cells, h) for _ in range(M)]
            us = gen.standard_normal((M, N))
            while np.linalg.matrix_rank(us) < N:
                us = gen.standard_normal((M, N))
            results.append(bll_check(fs, us, cells))
        failing = [k for k, r in enumerate(results) if not r.holds]
        relative = [r.error / r.rhs for r in results if r.rhs > 0]
        if failing:
            logger.warning(f"BLL fails in {len(failing)} of {trials} instances")
        return {
            "verdict": "violated" if failing else "consistent",
            "instances": [r.to_dict() for r in results],
            "failing": failing,
            "max_relative_error": float(max(relative)) if relative else 0.0,
        }

    # ==================== PEAKEDNESS ====================

    def kanter_trials(self, trials: int, polygons: int, rng: RngStream,
                      cells: Optional[int] = None) -> Dict[str, Any]:
        """
        f1 uniform on [-a, a] against f2 uniform on [-b, b] (a < b), both
        multiplied by a centered truncated gaussian, over random symmetric
        polygons.
        """
        reports = []
        for t in range(trials):
            gen = rng.child(t).generator()
            a = gen.uniform(0.2, 0.6)
            b = a + gen.uniform(0.1, 0.6)
            f1 = UniformOnBody(EuclideanBall.centered(1, a))
            f2 = UniformOnBody(EuclideanBall.centered(1, b))
            f = TruncatedGaussian(1, gen.uniform(0.3, 1.0))
            bodies = random_symmetric_polygons(polygons, gen)
            reports.append(kanter_check(f1, f2, f, bodies, cells))
        return self._peakedness_summary(reports, "Kanter")

    def cube_domination(self, fs: Sequence[Density], polygons: int, rng: RngStream,
                        cells: Optional[int] = None) -> Dict[str, Any]:
        """
        The uniform density on [-1/2, 1/2]^N against prod f_i* (the cube is
        the more peaked side) over random symmetric polygons.

        Raises:
            HypothesisError: If some factor has sup bound above 1
        """
        for i, f in enumerate(fs):
            if f.n != 1:
                raise LabError("Cube domination factors must be one-dimensional")
            if f.sup_bound > 1.0 + SUP_BOUND_TOL:
                raise HypothesisError(f"Factor {i} has sup bound {f.sup_bound:.6g} > 1")
        N = len(fs)
        peaked = ProductDensity(tuple(f.rearranged() for f in fs))
        cube = UniformOnBody(Zonotope(0.5 * np.eye(N)))
        bodies = random_symmetric_polygons(polygons, rng)
        return peakedness_compare(cube, peaked, bodies, cells).to_dict()

    def cube_domination_trials(self, trials: int, polygons: int, rng: RngStream,
                               cells: Optional[int] = None) -> Dict[str, Any]:
        """Random planar factors with sup bound at most 1."""
        reports = []
        for t in range(trials):
            gen = rng.child(t).generator()
            fs = []
            for _ in range(2):
                if gen.random() < 0.5:
                    fs.append(UniformOnBody(EuclideanBall.centered(1, gen.uniform(0.5, 1.5))))
                else:
                    fs.append(TruncatedGaussian(1, gen.uniform(0.45, 1.0)))
            peaked = ProductDensity(tuple(f.rearranged() for f in fs))
            cube = UniformOnBody(Zonotope(0.5 * np.eye(2)))
            reports.append(peakedness_compare(cube, peaked, random_symmetric_polygons(polygons, gen), cells))
        return self._peakedness_summary(reports, "Cube domination")

    def _peakedness_summary(self, reports, name: str) -> Dict[str, Any]:
        verdict = combine_verdicts([r.verdict for r in reports])
        if verdict != "consistent":
            logger.warning(f"{name} trials: {verdict}")
        margins = [m for r in reports for m in r.margins]
        return {
            "verdict": verdict,
            "trials": [r.to_dict() for r in reports],
            "min_margin": float(min(margins)) if margins else 0.0,
        }


# Global rearrangement service instance
rearrangement_service = RearrangementService()
