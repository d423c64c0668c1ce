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
Dominance Service
Monte Carlo ensembles X, X* and Z of random bodies and their comparisons
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

import os
import sys
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from geometry.bodies import Body, VPolytope
from geometry.centroid import (
    centroid_support,
    empirical_centroid_support,
    empirical_orlicz_support,
    orlicz_centroid_support,
)
from geometry.coefficients import CoefficientSet, CrossPolytope, MCombination, Simplex, YoungFunction
from geometry.operations import hausdorff_distance, realize
from geometry.sphere import random_directions, sphere_grid
from geometry.types import CoefficientSetError, HypothesisError, LabError, Matrix
from geometry.volumes import intrinsic_volume
from models.densities import Density, PointMass, UniformOnBody, uniform_on_ball_of_volume_one
from models.empirical import (
    DominanceReport,
    EmpiricalDistribution,
    check_dominance,
    combine_verdicts,
    expectation_check,
)
from models.functionals import FunctionalSpec
from models.sampling import sample_matrix, sample_points
from utils.rng import RngStream

logger = logging.getLogger(__name__)

ENSEMBLES = ("X", "Xstar", "Z")
SUP_BOUND_TOL = 1e-12
REPLICA_CHUNK = 256
DIRECTION_BLOCK = 128


def _replica_chunk(densities: List[Density], spec: FunctionalSpec, rng: RngStream, indices: Sequence[int]):
    values = np.empty(len(indices))
    stderrs = np.empty(len(indices))
    for k, index in enumerate(indices):
        gen = rng.child(index).generator()
        X = sample_matrix(densities, gen)
        estimate = spec.evaluate(X, gen)
        values[k] = estimate.value
        stderrs[k] = estimate.stderr
    return values, stderrs


def _blocked(fn: Callable[[np.ndarray], np.ndarray], grid: np.ndarray) -> np.ndarray:
    return np.concatenate([fn(grid[s:s + DIRECTION_BLOCK]) for s in range(0, grid.shape[0], DIRECTION_BLOCK)])


def _max_gap(empirical: Callable[[np.ndarray], np.ndarray], grid: np.ndarray, reference: np.ndarray) -> float:
    # direction blocks keep the (directions x points) product bounded
    gap = 0.0
    for start in range(0, grid.shape[0], DIRECTION_BLOCK):
        block = slice(start, start + DIRECTION_BLOCK)
        gap = max(gap, float(np.max(np.abs(empirical(grid[block]) - reference[block]))))
    return gap


@dataclass
class LlnSeries:
    """Distances between the empirical body and its limit along an N schedule."""
    mode: str
    sizes: List[int] = field(default_factory=list)
    distances: List[float] = field(default_factory=list)
    scale: float = 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {"mode": self.mode, "sizes": self.sizes, "distances": self.distances, "scale": self.scale}


class DominanceService:
    """
    Service for sampling functional distributions and checking dominance
    """

    def __init__(self):
        """Initialize dominance service"""
        logger.info("Dominance service initialized")

    # ==================== ENSEMBLES ====================

    def ensemble_densities(self, fs: Sequence[Density], ensemble: str,
                           coefficients: Optional[CoefficientSet] = None,
                           allow_point_masses: bool = False):
        """
        Column densities of an ensemble and whether theory covers it.

        Raises:
            HypothesisError: Point masses outside the deterministic mode, or
                a Z ensemble with some sup bound above 1
        """
        if ensemble not in ENSEMBLES:
            raise LabError(f"Unknown ensemble '{ensemble}', expected one of {ENSEMBLES}")
        if not allow_point_masses:
            for i, f in enumerate(fs):
                if isinstance(f, PointMass):
                    raise HypothesisError(f"Density {i} is a point mass; only M-addition reductions allow them")
        if ensemble == "X":
            return list(fs), True
        if ensemble == "Xstar":
            return [f.rearranged() for f in fs], True
        for i, f in enumerate(fs):
            if f.sup_bound > 1.0 + SUP_BOUND_TOL:
                raise HypothesisError(
                    f"Z ensemble needs sup bounds <= 1; density {i} ({f.kind}) has sup bound {f.sup_bound:.6g}"
                )
        n = fs[0].n
        supported = coefficients is None or bool(coefficients.unconditional)
        if not supported:
            logger.warning("Z comparison for a coefficient set that is not unconditional is unsupported by theory")
        return [uniform_on_ball_of_volume_one(n)] * len(fs), supported

    def run_ensemble(self, fs: Sequence[Density], ensemble: str, spec: FunctionalSpec, m: int,
                     rng: RngStream, workers: int = 1, config_digest: str = "",
                     allow_point_masses: bool = False,
                     progress: Optional[Callable[[int], None]] = None) -> EmpiricalDistribution:
        """
        m independent replicas of the functional over one ensemble.

        Replica i draws from rng.child(i), so values do not depend on the
        worker count.

        Args:
            fs: Column densities (length N)
            ensemble: "X", "Xstar" or "Z"
            spec: Functional and body constructor
            m: Replica count
            rng: Stream of this ensemble
            workers: joblib worker count
            config_digest: Digest recorded on the distribution
            allow_point_masses: Permit PointMass columns
            progress: Called with the number of finished replicas per chunk

        Returns:
            EmpiricalDistribution with the largest inner stderr as systematic band
        """
        if not fs:
            raise LabError("Ensemble needs at least one density")
        n, N = fs[0].n, len(fs)
        spec.validate(n, N)
        densities, supported = self.ensemble_densities(fs, ensemble, spec.coefficients, allow_point_masses)
        if ensemble == "Z" and spec.ball_radius is not None:
            supported = True
        chunks = [list(range(s, min(s + REPLICA_CHUNK, m))) for s in range(0, m, REPLICA_CHUNK)]
        logger.info(f"Running {ensemble} ensemble: {spec.label}, n={n}, N={N}, m={m}, workers={workers}")

        values: List[np.ndarray] = []
        stderrs: List[np.ndarray] = []
        if workers <= 1:
            results = (_replica_chunk(densities, spec, rng, chunk) for chunk in chunks)
        else:
            results = Parallel(n_jobs=workers, backend="loky", return_as="generator")(
                delayed(_replica_chunk)(densities, spec, rng, chunk) for chunk in chunks
            )
        for chunk, (chunk_values, chunk_stderrs) in zip(chunks, results):
            values.append(chunk_values)
            stderrs.append(chunk_stderrs)
            if progress is not None:
                progress(len(chunk))
        all_values = np.concatenate(values) if values else np.empty(0)
        all_stderrs = np.concatenate(stderrs) if stderrs else np.empty(0)
        systematic = float(all_stderrs.max()) if all_stderrs.size else 0.0
        logger.debug(f"{ensemble} ensemble mean {all_values.mean():.6g}, systematic band {systematic:.3g}")
        return EmpiricalDistribution(all_values, config_digest, ensemble, systematic, supported)

    def check_dominance(self, dA: EmpiricalDistribution, dB: EmpiricalDistribution,
                        direction: str = "A>=B", delta: float = 0.01) -> DominanceReport:
        return check_dominance(dA, dB, direction, delta)

    def expectation_check(self, dA: EmpiricalDistribution, dB: EmpiricalDistribution) -> Dict[str, Any]:
        return expectation_check(dA, dB)

    def compare_ensembles(self, fs: Sequence[Density], spec: FunctionalSpec, m: int, rng: RngStream,
                          direction: str = "A>=B", delta: float = 0.01, workers: int = 1,
                          compare_z: bool = False, config_digest: str = "",
                          allow_point_masses: bool = False, with_expectation: bool = False,
                          progress: Optional[Callable[[int], None]] = None) -> DominanceReport:
        """
        X against X* (main report) and optionally X against Z (companion).

        A Z companion unsupported by theory is recorded but never changes the
        main verdict.
        """
        dX = self.run_ensemble(fs, "X", spec, m, rng.child(0), workers, config_digest, allow_point_masses, progress)
        dXs = self.run_ensemble(fs, "Xstar", spec, m, rng.child(1), workers, config_digest, allow_point_masses, progress)
        report = check_dominance(dX, dXs, direction, delta)
        verdicts = [report.verdict]
        if with_expectation:
            report.companions["expectation_X_vs_Xstar"] = expectation_check(dX, dXs) \
                if direction == "A>=B" else expectation_check(dXs, dX)
            verdicts.append(report.companions["expectation_X_vs_Xstar"]["verdict"])
        if compare_z:
            dZ = self.run_ensemble(fs, "Z", spec, m, rng.child(2), workers, config_digest, allow_point_masses, progress)
            z_report = check_dominance(dX, dZ, direction, delta)
            report.companions["X_vs_Z"] = z_report.to_dict()
            report.companions["X_vs_Z"]["curves"] = z_report.curves()
            if dZ.theory_supported:
                verdicts.append(z_report.verdict)
            if with_expectation:
                exp = expectation_check(dX, dZ) if direction == "A>=B" else expectation_check(dZ, dX)
                report.companions["expectation_X_vs_Z"] = exp
                if dZ.theory_supported:
                    verdicts.append(exp["verdict"])
        report.verdict = combine_verdicts(verdicts)
        return report

    # ==================== LAW OF LARGE NUMBERS ====================

    def lln_convergence(self, K: Body, mode: str, schedule: Sequence[int], rng: RngStream,
                        p: float = 2.0, psi: Optional[YoungFunction] = None,
                        grid_size: Optional[int] = None) -> LlnSeries:
        """
        Distance of K_N (hull), Z_{p,N}(K) or the empirical Orlicz body to its
        limit along one sample path of uniform points in K.

        Raises:
            LabError: If p < 1, the mode is unknown, or a schedule entry is < 1
        """
        if mode not in ("hull", "Zp", "Orlicz"):
            raise LabError(f"Unknown LLN mode '{mode}'")
        if mode == "Zp" and p < 1:
            raise LabError(f"L_p centroid bodies need p >= 1, got {p}")
        if mode == "Orlicz" and psi is None:
            raise LabError("Orlicz mode needs a Young function")
        series = LlnSeries(mode)
        if not schedule:
            return series
        if min(schedule) < 1:
            raise LabError("Schedule entries must be positive")
        points = sample_points(UniformOnBody(K), max(schedule), rng)
        grid = sphere_grid(K.n, grid_size)
        reference = None
        if mode == "Zp":
            reference = _blocked(lambda u: centroid_support(K, p, u), grid)
        elif mode == "Orlicz":
            reference = _blocked(lambda u: orlicz_centroid_support(K, psi, u), grid)
        if reference is not None:
            series.scale = float(reference.max())
        for size in schedule:
            sample = points[:size]
            if mode == "hull":
                distance = hausdorff_distance(VPolytope(sample), K, grid_size)
            elif mode == "Zp":
                distance = _max_gap(lambda u: empirical_centroid_support(sample, p, u), grid, reference)
            else:
                distance = _max_gap(lambda u: empirical_orlicz_support(sample, psi, u), grid, reference)
            series.sizes.append(int(size))
            series.distances.append(distance)
            logger.debug(f"LLN {mode}: N={size} distance={distance:.6g}")
        return series

    # ==================== M-ADDITION ====================

    def m_addition_coefficients(self, M: CoefficientSet, N1: int, N2: int) -> MCombination:
        """
        Coefficient set of K_{N1} (+)_M L_{N2} in block form: simplex parts for M
        in the positive orthant, cross-polytope parts (symmetric hulls) for
        unconditional M.

        Raises:
            CoefficientSetError: If M is not in R^2 or is neither kind
        """
        if M.dim != 2:
            raise CoefficientSetError(f"M must live in R^2, got R^{M.dim}")
        if M.positive_orthant:
            return MCombination(M, (Simplex(N1), Simplex(N2)))
        if M.unconditional:
            return MCombination(M, (CrossPolytope(N1), CrossPolytope(N2)))
        raise CoefficientSetError("M must lie in the positive orthant or be unconditional")

    def m_addition_experiment(self, fK: Density, fL: Density, M: CoefficientSet, N1: int, N2: int,
                              j: int, m: int, rng: RngStream, delta: float = 0.01, workers: int = 1,
                              config_digest: str = "",
                              progress: Optional[Callable[[int], None]] = None) -> DominanceReport:
        """
        V_j of [X1 X2](C1' (+)_M C2') against the rearranged ensemble.

        Point-mass densities reduce the experiment to a deterministic
        M-combination.
        """
        C = self.m_addition_coefficients(M, N1, N2)
        fs = [fK] * N1 + [fL] * N2
        spec = FunctionalSpec("intrinsic", coefficients=C, j=j)
        deterministic = all(isinstance(f, PointMass) for f in fs)
        report = self.compare_ensembles(
            fs, spec, m, rng, "A>=B", delta, workers,
            compare_z=False, config_digest=config_digest,
            allow_point_masses=deterministic, progress=progress,
        )
        if deterministic:
            report.companions["deterministic_value"] = self._deterministic_m_addition(
                fK, fL, M, C, fs, spec, j, m, rng, config_digest)
            if not report.companions["deterministic_value"]["matches"]:
                report.verdict = combine_verdicts([report.verdict, "violated"])
        return report

    def _deterministic_m_addition(self, fK: PointMass, fL: PointMass, M: CoefficientSet, C: MCombination,
                                  fs: Sequence[Density], spec: FunctionalSpec, j: int, m: int,
                                  rng: RngStream, config_digest: str) -> Dict[str, Any]:
        """
        V_j of the block M-combination against the M-sum of K and L taken
        directly, and against every sampled X replica.
        """
        X = Matrix(np.column_stack([f.point for f in fs]))
        value = intrinsic_volume(realize(X, C), j).value
        # K and L are the points x, y (simplex parts) or the segments [-x, x], [-y, y]
        pair = Matrix(np.column_stack([fK.point, fL.point]))
        reference = intrinsic_volume(realize(pair, M), j).value
        samples = self.run_ensemble(fs, "X", spec, m, rng.child(0), 1, config_digest,
                                    allow_point_masses=True).values
        tolerance = 1e-9 * max(1.0, abs(reference))
        spread = float(np.max(np.abs(samples - value)))
        matches = abs(value - reference) <= tolerance and spread <= tolerance
        if not matches:
            logger.warning(f"M-combination V_{j}={value:.17g} differs from M-sum {reference:.17g} "
                           f"or from the sampled replicas (spread {spread:.3g})")
        return {"value": value, "reference": reference, "sample_spread": spread, "matches": bool(matches)}

    # ==================== STEINER CONVEXITY ====================

    def steiner_convexity_probe(self, C: CoefficientSet, n: int, j: int, trials: int,
                                rng: RngStream) -> Dict[str, Any]:
        """
        Midpoint convexity of t -> V_j(X(t) C) along parallel moves
        x_i = y_i + t_i theta with y_i in theta-perp.
        """
        gen = rng.generator()
        N = C.dim
        failures = 0
        worst = -np.inf
        for _ in range(trials):
            theta = random_directions(n, 1, gen)[0]
            y = gen.standard_normal((N, n))
            y -= np.outer(y @ theta, theta)
            s, t = gen.standard_normal(N), gen.standard_normal(N)

            def value(shift):
                X = Matrix((y + np.outer(shift, theta)).T)
                return intrinsic_volume(realize(X, C), j, gen)

            a, b, mid = value(s), value(t), value(0.5 * (s + t))
            slack = 3.0 * max(a.stderr, b.stderr, mid.stderr) + 1e-9 * max(1.0, abs(a.value), abs(b.value))
            excess = mid.value - 0.5 * (a.value + b.value)
            worst = max(worst, excess)
            if excess > slack:
                failures += 1
        verdict = "consistent" if failures == 0 else "violated"
        logger.info(f"Steiner convexity probe on {C.kind}: {failures} failures in {trials} trials")
        return {"verdict": verdict, "trials": trials, "failures": failures, "max_excess": float(worst)}


# Global dominance service instance
dominance_service = DominanceService()
