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
Operator Norm Service
Lower-tail dominance of ||X : E -> l_2^n||, small-ball curves and
marginal small-ball bounds
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

import os
import sys
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from geometry.types import DimensionError, HypothesisError, LabError, ball_volume
from models.densities import Density, uniform_on_ball_of_volume_one
from models.empirical import (
    DominanceReport,
    check_dominance,
    combine_verdicts,
    dkw_epsilon,
    wilson_interval,
)
from models.functionals import FunctionalSpec
from models.operator_norms import MAX_VOLUME_RATIO_DIMENSION, NormedSpaceSpec, batch_operator_norm
from services.dominance_service import dominance_service
from utils.rng import RngStream

logger = logging.getLogger(__name__)

BATCH = 10_000
MIN_RESOLVABLE_COUNT = 10
NEGATIVE_MOMENT_MAX_EXPONENT = 8
SUP_BOUND_TOL = 1e-12
SLOPE_SLACK = 0.5


def _batch_sizes(m: int) -> List[int]:
    return [min(BATCH, m - s) for s in range(0, m, BATCH)]


def _uniform_stack(n: int, N: int, count: int, stream: RngStream) -> np.ndarray:
    """count matrices (count, n, N) with iid columns uniform on the volume-one ball."""
    gen = stream.generator()
    columns = uniform_on_ball_of_volume_one(n).sample(count * N, gen)
    return columns.reshape(count, N, n).transpose(0, 2, 1)


def _z_batch(n: int, N: int, E: NormedSpaceSpec, count: int, stream: RngStream) -> np.ndarray:
    return batch_operator_norm(_uniform_stack(n, N, count, stream), E)


def _z_norms(n: int, N: int, E: NormedSpaceSpec, m: int, rng: RngStream, workers: int) -> np.ndarray:
    sizes = _batch_sizes(m)
    if workers <= 1:
        parts = [_z_batch(n, N, E, size, rng.child(k)) for k, size in enumerate(sizes)]
    else:
        parts = Parallel(n_jobs=workers, backend="loky")(
            delayed(_z_batch)(n, N, E, size, rng.child(k)) for k, size in enumerate(sizes)
        )
    return np.concatenate(parts) if parts else np.empty(0)


def _check_grid(eps_grid: Sequence[float]) -> np.ndarray:
    eps = np.asarray(eps_grid, dtype=float)
    if eps.size == 0:
        raise LabError("Epsilon grid must be nonempty")
    if np.any(eps <= 0) or np.any(eps > 1):
        raise LabError("Epsilon values must lie in (0, 1]")
    return eps


def log_log_slope(eps: np.ndarray, probabilities: np.ndarray, counts: np.ndarray) -> Optional[float]:
    """Least-squares slope of log p against log eps over the resolvable points."""
    usable = (counts >= MIN_RESOLVABLE_COUNT) & (probabilities < 0.9) & (probabilities > 0)
    if usable.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(eps[usable]), np.log(probabilities[usable]), 1)
    return float(slope)


class OperatorNormService:
    """
    Service for random-matrix operator norm experiments
    """

    def __init__(self):
        """Initialize operator norm service"""
        logger.info("Operator norm service initialized")

    # ==================== DOMINANCE ====================

    def op_norm_dominance(self, fs: Sequence[Density], E: NormedSpaceSpec, m: int, rng: RngStream,
                          delta: float = 0.01, workers: int = 1, config_digest: str = "",
                          progress: Optional[Callable[[int], None]] = None) -> DominanceReport:
        """
        Lower-tail chain P(||X|| <= a) <= P(||X*|| <= a) <= P(||Z|| <= a).

        The main report compares X with Z; the X / X* and X* / Z links are
        companions and all three feed the verdict.

        Raises:
            HypothesisError: If some density has sup bound above 1
        """
        spec = FunctionalSpec("operator_norm", norm=E)
        run = dominance_service.run_ensemble
        dX = run(fs, "X", spec, m, rng.child(0), workers, config_digest, progress=progress)
        dXs = run(fs, "Xstar", spec, m, rng.child(1), workers, config_digest, progress=progress)
        dZ = run(fs, "Z", spec, m, rng.child(2), workers, config_digest, progress=progress)
        # larger survival means smaller lower tail
        report = check_dominance(dX, dZ, "A>=B", delta)
        first = check_dominance(dX, dXs, "A>=B", delta)
        second = check_dominance(dXs, dZ, "A>=B", delta)
        report.companions["X_vs_Xstar"] = first.to_dict()
        report.companions["Xstar_vs_Z"] = second.to_dict()
        report.verdict = combine_verdicts([report.verdict, first.verdict, second.verdict])
        if E.heuristic:
            report.companions["norm"] = {"heuristic": True, "label": E.label}
        return report

    # ==================== SMALL BALL ====================

    def small_ball_curve(self, n: int, N: int, E: NormedSpaceSpec, eps_grid: Sequence[float], m: int,
                         rng: RngStream, c: Optional[float] = None, confidence: float = 0.99,
                         workers: int = 1) -> Dict[str, Any]:
        """
        Empirical P(||Z : E -> l_2^n|| <= eps sqrt(N)) with Wilson intervals,
        the reference curve (c eps)^(nN-1) when c is given, the fitted log-log
        slope and, for nN - 1 <= 8, the negative-moment estimate.

        Raises:
            LabError: If an epsilon lies outside (0, 1]
        """
        eps = _check_grid(eps_grid)
        if E.dim != N:
            raise DimensionError(f"Normed space has dimension {E.dim}, expected N={N}")
        norms = _z_norms(n, N, E, m, rng, workers)
        exponent = n * N - 1
        rows = []
        counts = np.array([int(np.sum(norms <= e * np.sqrt(N))) for e in eps])
        for e, k in zip(eps, counts):
            lo, hi = wilson_interval(k, m, confidence)
            rows.append({
                "eps": float(e),
                "pX": None,
                "pZ": k / m,
                "bound": float((c * e) ** exponent) if c is not None else None,
                "wilsonLo": lo,
                "wilsonHi": hi,
            })
        slope = log_log_slope(eps, counts / m, counts)
        if slope is None:
            verdict = "inconclusive"
        else:
            verdict = "consistent" if slope >= exponent - SLOPE_SLACK else "violated"
        result: Dict[str, Any] = {
            "verdict": verdict,
            "rows": rows,
            "exponent": exponent,
            "slope": slope,
        }
        if c is not None:
            # c is an overlay only; crossings are reported, never gated on
            above = [r["eps"] for r in rows if r["wilsonLo"] > r["bound"]]
            if above:
                logger.warning(f"Small-ball probabilities exceed ({c} eps)^{exponent} at eps={above}")
            result["exceeds_reference"] = above
        if 1 <= exponent <= NEGATIVE_MOMENT_MAX_EXPONENT:
            moment = float(np.mean(norms ** (-float(exponent))) ** (1.0 / exponent))
            result["negative_moment"] = {
                "exponent": exponent,
                "moment": moment,
                "c1": moment * np.sqrt(N) / np.e,
            }
        logger.info(f"Small-ball curve n={n} N={N} {E.label}: slope {result['slope']}")
        return result

    def marginal_small_ball(self, fs: Sequence[Density], k: int, eps_grid: Sequence[float], m: int,
                            rng: RngStream, delta: float = 0.01) -> Dict[str, Any]:
        """
        P(||P_E x|| <= eps sqrt(k)) for x with independent coordinates from
        fs and E uniform in G_{N,k}, against z uniform in [-1/2, 1/2]^N and
        the bound (2 sqrt(pi e) eps)^k.

        Raises:
            HypothesisError: If some coordinate density has sup bound above 1
            DimensionError: If a density is not one-dimensional or k > N
        """
        eps = _check_grid(eps_grid)
        N = len(fs)
        if any(f.n != 1 for f in fs):
            raise DimensionError("Coordinate densities must be one-dimensional")
        if not 1 <= k <= N:
            raise DimensionError(f"Subspace dimension k={k} outside [1, {N}]")
        for i, f in enumerate(fs):
            if f.sup_bound > 1.0 + SUP_BOUND_TOL:
                raise HypothesisError(f"Coordinate density {i} has sup bound {f.sup_bound:.6g} > 1")

        x_norms, z_norms = [], []
        for b, size in enumerate(_batch_sizes(m)):
            gen = rng.child(b).generator()
            frames, _ = np.linalg.qr(gen.standard_normal((size, N, k)))
            x = np.column_stack([f.sample(size, gen)[:, 0] for f in fs])
            z = gen.random((size, N)) - 0.5
            x_norms.append(np.linalg.norm(np.einsum("mNk,mN->mk", frames, x), axis=1))
            z_norms.append(np.linalg.norm(np.einsum("mNk,mN->mk", frames, z), axis=1))
        x_norms, z_norms = np.concatenate(x_norms), np.concatenate(z_norms)

        band = dkw_epsilon(m, delta)
        rows, failures = [], []
        for e in eps:
            t = e * np.sqrt(k)
            p_x = float(np.mean(x_norms <= t))
            p_z = float(np.mean(z_norms <= t))
            lo, hi = wilson_interval(int(np.sum(z_norms <= t)), m)
            bound = float((2.0 * np.sqrt(np.pi * np.e) * e) ** k)
            rows.append({"eps": float(e), "pX": p_x, "pZ": p_z, "bound": bound, "wilsonLo": lo, "wilsonHi": hi})
            if p_x > p_z + 2 * band or p_z > bound + 2 * band:
                failures.append(float(e))
        if failures:
            logger.warning(f"Marginal small-ball ordering fails at eps={failures}")
        return {
            "verdict": "violated" if failures else "consistent",
            "rows": rows,
            "dkw_epsilon": band,
            "failures": failures,
        }

    # ==================== VOLUME RATIO ====================

    def operator_ball_volume_ratio(self, n: int, N: int, samples: int, rng: RngStream) -> Dict[str, Any]:
        """
        vol(C)^(1/nN) sqrt(N) for C = {X : ||X : l_2^N -> l_2^n|| <= 1},
        by Monte Carlo inside the Frobenius ball of radius sqrt(min(n, N)).

        Raises:
            LabError: If nN > 16
        """
        d = n * N
        if d > MAX_VOLUME_RATIO_DIMENSION:
            raise LabError(f"Volume ratio estimate limited to nN <= {MAX_VOLUME_RATIO_DIMENSION}, got {d}")
        radius = np.sqrt(min(n, N))
        hits = 0
        for b, size in enumerate(_batch_sizes(samples)):
            gen = rng.child(b).generator()
            g = gen.standard_normal((size, d))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            points = g * (radius * gen.random(size) ** (1.0 / d))[:, None]
            hits += int(np.sum(np.linalg.norm(points.reshape(size, n, N), ord=2, axis=(1, 2)) <= 1.0))
        fraction = hits / samples
        if fraction == 0:
            raise LabError("No Monte Carlo point fell inside the operator ball")
        vol = ball_volume(d) * radius ** d * fraction
        rel = np.sqrt((1.0 - fraction) / (fraction * samples))
        ratio = vol ** (1.0 / d) * np.sqrt(N)
        return {"volume": vol, "ratio": ratio, "stderr": ratio * rel / d, "fraction": fraction}


# Global operator norm service instance
operator_norm_service = OperatorNormService()
