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
Lab Client for the Stochastic Convex Geometry Lab

This client provides a unified interface to all experiment services:
- Dominance of random bodies (X, X*, Z ensembles, M-additions, LLN)
- Rearrangement inequalities (symmetrization, BLL, Kanter, cube domination)
- Operator norms (lower-tail chain, small-ball curves)

All operations return consistent dict responses:
{"success", "verdict", "report", "curves", "message"}
"""

import logging
from typing import Any, Callable, Dict, List, Optional

import os
import sys
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from geometry.coefficients import CoefficientSet
from lab.experiment_config import BllSection, ExperimentConfig, KanterSection, RearrangementSection
from models.empirical import combine_verdicts
from rearrangement.grid import read_grid
from services.dominance_service import dominance_service
from services.operator_norm_service import operator_norm_service
from services.rearrangement_service import rearrangement_service
from utils.rng import RngStream

logger = logging.getLogger(__name__)

Progress = Optional[Callable[[int], None]]


class LabClient:
    """
    Unified client for all lab experiments.

    Provides a single interface for the workflow to access all services
    with consistent error handling and response formats.
    """

    def __init__(self):
        """Initialize lab client with all services"""
        self.dominance_service = dominance_service
        self.operator_norm_service = operator_norm_service
        self.rearrangement_service = rearrangement_service

        logger.info("Lab Client initialized with all services")

    def _success(self, verdict: str, report: Dict[str, Any], curves: List[Dict[str, Any]],
                 message: str) -> Dict[str, Any]:
        return {"success": True, "verdict": verdict, "report": report, "curves": curves, "message": message}

    def _failure(self, operation: str, error: Exception) -> Dict[str, Any]:
        logger.error(f"Lab {operation} error: {error}")
        return {
            "success": False,
            "verdict": None,
            "report": {},
            "curves": [],
            "message": f"{operation} failed: {error}",
            "error": type(error).__name__,
        }

    # ==================== DOMINANCE OPERATIONS ====================

    def run_dominance(self, config: ExperimentConfig, workers: int = 1, base_dir: str = ".",
                      progress: Progress = None) -> Dict[str, Any]:
        """
        X against X* (and Z when compare_z is set) for one functional.

        Args:
            config: Validated dominance config
            workers: joblib worker count
            base_dir: Directory that relative grid files resolve against
            progress: Replica progress callback

        Returns:
            Dict with the DominanceReport and its survival curves
        """
        try:
            fs = config.build_densities(base_dir)
            spec = config.build_functional()
            report = self.dominance_service.compare_ensembles(
                fs, spec, config.m, RngStream(config.seed), config.default_direction(), config.delta,
                workers, compare_z=config.compare_z, config_digest=config.digest,
                with_expectation=config.expectation, progress=progress,
            )
            return self._success(report.verdict, report.to_dict(), report.curves(),
                                 f"{spec.label}: {report.label_a} {report.direction} {report.label_b} is {report.verdict}")
        except Exception as e:
            return self._failure("dominance", e)

    def run_maddition(self, config: ExperimentConfig, workers: int = 1, base_dir: str = ".",
                      progress: Progress = None) -> Dict[str, Any]:
        """M-addition of random hulls against the rearranged ensemble."""
        try:
            section = config.maddition
            report = self.dominance_service.m_addition_experiment(
                section.K.build(config.n, base_dir), section.L.build(config.n, base_dir),
                section.M.build(2), section.N1, section.N2, section.j, config.m,
                RngStream(config.seed), config.delta, workers, config.digest, progress,
            )
            return self._success(report.verdict, report.to_dict(), report.curves(),
                                 f"M-addition V_{section.j}: {report.verdict}")
        except Exception as e:
            return self._failure("maddition", e)

    def run_lln(self, config: ExperimentConfig) -> Dict[str, Any]:
        """
        Independent LLN paths. Hull mode passes when the final distance beats
        the first on the required fraction of paths; centroid modes pass when
        every final gap is within tolerance times the largest reference support.
        """
        try:
            section = config.lln
            body = section.body.build(config.n or section.body.dimension(None))
            psi = section.young.build() if section.young else None
            root = RngStream(config.seed)
            series = [
                self.dominance_service.lln_convergence(body, section.mode, section.schedule, root.child(path),
                                                       section.p, psi, section.grid_size)
                for path in range(section.paths)
            ]
            curves = [
                {"path": k, "N": size, "distance": distance}
                for k, s in enumerate(series) for size, distance in zip(s.sizes, s.distances)
            ]
            report: Dict[str, Any] = {"mode": section.mode, "paths": [s.to_dict() for s in series]}
            if not section.schedule:
                verdict = "inconclusive"
            elif section.mode == "hull":
                if len(section.schedule) < 2:
                    verdict = "inconclusive"
                else:
                    decreasing = sum(s.distances[-1] < s.distances[0] for s in series)
                    report["decreasing_fraction"] = decreasing / len(series)
                    verdict = "consistent" if report["decreasing_fraction"] >= section.required_fraction \
                        else "violated"
            else:
                gaps = [s.distances[-1] / s.scale for s in series]
                report["relative_final_gaps"] = gaps
                verdict = "consistent" if max(gaps) <= section.tolerance else "violated"
            return self._success(verdict, report, curves, f"LLN {section.mode}: {verdict}")
        except Exception as e:
            return self._failure("lln", e)

    def steiner_probe(self, C: CoefficientSet, n: int, j: int, trials: int, seed: int) -> Dict[str, Any]:
        """Midpoint Steiner convexity of V_j(XC) along parallel moves."""
        try:
            result = self.dominance_service.steiner_convexity_probe(C, n, j, trials, RngStream(seed))
            return self._success(result["verdict"], result, [], f"Steiner probe on {C.kind}: {result['verdict']}")
        except Exception as e:
            return self._failure("steiner probe", e)

    # ==================== REARRANGEMENT OPERATIONS ====================

    def run_rearrangement(self, config: ExperimentConfig, base_dir: str = ".") -> Dict[str, Any]:
        """Iterated symmetrization of a grid file or an off-center disk indicator."""
        try:
            section = config.rearrangement or RearrangementSection()
            if section.grid_file:
                path = os.path.join(base_dir, section.grid_file)
                with open(path, encoding="utf-8") as handle:
                    g = read_grid(handle.read())
            else:
                g = self.rearrangement_service.off_center_disk(
                    section.cells, section.center, section.radius, section.half_width)
            if section.compare_schedules:
                report = self.rearrangement_service.compare_schedules(g, section.tol, section.max_iter)
                runs = report["schedules"]
            else:
                run = self.rearrangement_service.symmetrize(g, section.schedule, section.tol, section.max_iter)
                runs = {section.schedule: run}
                report = {"verdict": run["verdict"], "schedules": runs}
            curves = [
                {"schedule": name, "step": step, "distance": distance,
                 "resampled": step in run["resampled_steps"]}
                for name, run in runs.items() for step, distance in enumerate(run["history"])
            ]
            return self._success(report["verdict"], report, curves, f"Symmetrization: {report['verdict']}")
        except Exception as e:
            return self._failure("rearrangement", e)

    def run_bll(self, config: ExperimentConfig) -> Dict[str, Any]:
        """BLL instances; an error bar above the allowed fraction of rhs is inconclusive."""
        try:
            section = config.bll or BllSection()
            report = self.rearrangement_service.bll_trials(
                section.trials, RngStream(config.seed), section.N, section.M, section.h, section.cells)
            verdict = report["verdict"]
            if verdict == "consistent" and report["max_relative_error"] >= section.max_relative_error:
                verdict = "inconclusive"
            report["verdict"] = verdict
            curves = [{"instance": k, **row} for k, row in enumerate(report["instances"])]
            return self._success(verdict, report, curves, f"BLL over {section.trials} instances: {verdict}")
        except Exception as e:
            return self._failure("bll", e)

    def run_kanter(self, config: ExperimentConfig) -> Dict[str, Any]:
        """Kanter trials and, unless disabled, cube-domination trials."""
        try:
            section = config.kanter or KanterSection()
            root = RngStream(config.seed)
            checks = {"kanter": self.rearrangement_service.kanter_trials(
                section.trials, section.polygons, root.child(0), section.cells)}
            if section.cube:
                checks["cube_domination"] = self.rearrangement_service.cube_domination_trials(
                    section.trials, section.polygons, root.child(1), section.cells)
            verdict = combine_verdicts([c["verdict"] for c in checks.values()])
            curves = [
                {"check": name, "trial": t, "body": b, "margin": margin, "error": error}
                for name, check in checks.items()
                for t, trial in enumerate(check["trials"])
                for b, (margin, error) in enumerate(zip(trial["margins"], trial["errors"]))
            ]
            return self._success(verdict, {"verdict": verdict, "checks": checks}, curves,
                                 f"Peakedness checks: {verdict}")
        except Exception as e:
            return self._failure("kanter", e)

    # ==================== OPERATOR NORM OPERATIONS ====================

    def run_opnorm(self, config: ExperimentConfig, workers: int = 1, base_dir: str = ".",
                   progress: Progress = None) -> Dict[str, Any]:
        """Lower-tail chain of operator norms, with the operator-ball volume ratio when asked."""
        try:
            fs = config.build_densities(base_dir)
            E = config.norm.build(len(fs))
            rng = RngStream(config.seed)
            report = self.operator_norm_service.op_norm_dominance(
                fs, E, config.m, rng, config.delta, workers, config.digest, progress)
            if config.norm.volume_ratio_samples:
                # reported only, never part of the verdict
                report.companions["volume_ratio"] = self.operator_norm_service.operator_ball_volume_ratio(
                    config.n, len(fs), config.norm.volume_ratio_samples, rng.child(3))
            return self._success(report.verdict, report.to_dict(), report.curves(),
                                 f"||X : {E.label} -> l2||: {report.verdict}")
        except Exception as e:
            return self._failure("opnorm", e)

    def run_smallball(self, config: ExperimentConfig, workers: int = 1, base_dir: str = ".") -> Dict[str, Any]:
        """Small-ball curve of Z, or the marginal small-ball check."""
        try:
            section = config.smallball
            rng = RngStream(config.seed)
            if section.marginal:
                fs = config.model_copy(update={"n": 1}).build_densities(base_dir)
                report = self.operator_norm_service.marginal_small_ball(
                    fs, section.k, section.eps, config.m, rng, config.delta)
            else:
                E = config.norm.build(config.N)
                report = self.operator_norm_service.small_ball_curve(
                    config.n, config.N, E, section.eps, config.m, rng, section.c, section.confidence, workers)
            return self._success(report["verdict"], report, report["rows"], f"Small-ball: {report['verdict']}")
        except Exception as e:
            return self._failure("smallball", e)

    # ==================== DISPATCH ====================

    def run_experiment(self, config: ExperimentConfig, workers: int = 1, base_dir: str = ".",
                       progress: Progress = None) -> Dict[str, Any]:
        """Dispatch a validated config to its experiment."""
        kind = config.kind
        if kind == "dominance":
            return self.run_dominance(config, workers, base_dir, progress)
        if kind == "maddition":
            return self.run_maddition(config, workers, base_dir, progress)
        if kind == "lln":
            return self.run_lln(config)
        if kind == "rearrangement":
            return self.run_rearrangement(config, base_dir)
        if kind == "bll":
            return self.run_bll(config)
        if kind == "kanter":
            return self.run_kanter(config)
        if kind == "opnorm":
            return self.run_opnorm(config, workers, base_dir, progress)
        return self.run_smallball(config, workers, base_dir)


# Global lab client instance
lab_client = LabClient()


# ==================== CONVENIENCE FUNCTIONS ====================

def run_experiment(config: ExperimentConfig, workers: int = 1) -> Dict[str, Any]:
    """Run one validated experiment"""
    return lab_client.run_experiment(config, workers)


def steiner_probe(C: CoefficientSet, n: int, j: int, trials: int = 100, seed: int = 0) -> Dict[str, Any]:
    """Steiner convexity probe of V_j(XC)"""
    return lab_client.steiner_probe(C, n, j, trials, seed)
