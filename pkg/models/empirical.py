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
Empirical distributions and DKW-banded survival-curve comparisons.

A comparison of A against B in direction "A>=B" asks whether
P(A > alpha) >= P(B > alpha) for every alpha. With m_A and m_B samples the
empirical curves are each within eps(m, delta) = sqrt(ln(2/delta) / (2m)) of
the truth with probability 1 - delta, so only a margin below
-(eps_A + eps_B) is evidence of a violation.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import xxhash
from scipy.stats import binomtest

from geometry.types import LabError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100
MAX_ALPHA_GRID = 512
DIRECTIONS = ("A>=B", "A<=B")


def dkw_epsilon(m: int, delta: float) -> float:
    """DKW uniform half-width sqrt(ln(2/delta) / (2m))."""
    return float(np.sqrt(np.log(2.0 / delta) / (2.0 * m)))


def wilson_interval(successes: int, trials: int, confidence: float = 0.99):
    """Wilson score interval for a binomial proportion."""
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """
    Sorted functional samples.

    `systematic` is the largest inner Monte Carlo standard error over the
    replicas, in the units of the samples; it is kept apart from the DKW band.
    """
    values: np.ndarray = field(repr=False)
    config_digest: str = ""
    label: str = ""
    systematic: float = 0.0
    theory_supported: bool = True

    def __post_init__(self):
        values = np.sort(np.asarray(self.values, dtype=float).reshape(-1))
        if values.size < MIN_SAMPLES:
            raise LabError(f"Empirical distribution needs at least {MIN_SAMPLES} samples, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise LabError("Empirical distribution contains non-finite samples")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return int(self.values.size)

    @property
    def digest(self) -> str:
        h = xxhash.xxh64()
        h.update(self.config_digest.encode())
        h.update(self.values.tobytes())
        return h.hexdigest()

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def stderr(self) -> float:
        return float(self.values.std(ddof=1) / np.sqrt(self.m))

    def survival(self, alpha: np.ndarray) -> np.ndarray:
        """P(V > alpha) under the empirical law."""
        return 1.0 - np.searchsorted(self.values, alpha, side="right") / self.m

    def lower_tail(self, alpha: np.ndarray) -> np.ndarray:
        """P(V <= alpha) under the empirical law."""
        return np.searchsorted(self.values, alpha, side="right") / self.m

    def summary(self) -> Dict[str, Any]:
        q = np.quantile(self.values, [0.0, 0.25, 0.5, 0.75, 1.0])
        return {
            "label": self.label,
            "m": self.m,
            "mean": self.mean,
            "stderr": self.stderr,
            "quantiles": q.tolist(),
            "systematic": self.systematic,
            "theory_supported": self.theory_supported,
            "digest": self.digest,
        }


@dataclass
class DominanceReport:
    """Survival curves of A and B on a shared alpha grid with the verdict."""
    direction: str
    delta: float
    alpha: np.ndarray
    survival_a: np.ndarray
    survival_b: np.ndarray
    margin: np.ndarray
    epsilon_a: float
    epsilon_b: float
    verdict: str
    violations: List[float]
    label_a: str = "A"
    label_b: str = "B"
    systematic_a: float = 0.0
    systematic_b: float = 0.0
    theory_supported: bool = True
    summary_a: Dict[str, Any] = field(default_factory=dict)
    summary_b: Dict[str, Any] = field(default_factory=dict)
    companions: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        return self.epsilon_a + self.epsilon_b

    @property
    def min_margin(self) -> float:
        return float(self.margin.min()) if self.margin.size else 0.0

    def curves(self) -> List[Dict[str, float]]:
        return [
            {"alpha": float(a), "survivalA": float(sa), "survivalB": float(sb), "margin": float(mg)}
            for a, sa, sb, mg in zip(self.alpha, self.survival_a, self.survival_b, self.margin)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "direction": self.direction,
            "label_a": self.label_a,
            "label_b": self.label_b,
            "delta": self.delta,
            "epsilon_a": self.epsilon_a,
            "epsilon_b": self.epsilon_b,
            "threshold": self.threshold,
            "min_margin": self.min_margin,
            "violations": list(self.violations),
            "systematic_a": self.systematic_a,
            "systematic_b": self.systematic_b,
            "theory_supported": self.theory_supported,
            "distribution_a": self.summary_a,
            "distribution_b": self.summary_b,
            "companions": self.companions,
        }


def alpha_grid(dA: EmpiricalDistribution, dB: EmpiricalDistribution, size: int = MAX_ALPHA_GRID) -> np.ndarray:
    """Merged sample values, thinned to at most `size` quantiles."""
    merged = np.unique(np.concatenate([dA.values, dB.values]))
    if merged.size <= size:
        return merged
    probs = np.linspace(0.0, 1.0, size)
    return np.unique(np.quantile(merged, probs, method="inverted_cdf"))


def _margin(dA, dB, alpha, direction, shift_a=0.0, shift_b=0.0):
    # shifts move each curve in its favorable direction
    if direction == "A>=B":
        return dA.survival(alpha - shift_a) - dB.survival(alpha + shift_b)
    return dB.survival(alpha - shift_b) - dA.survival(alpha + shift_a)


def check_dominance(dA: EmpiricalDistribution, dB: EmpiricalDistribution, direction: str = "A>=B",
                    delta: float = 0.01) -> DominanceReport:
    """
    Compare survival curves of A and B.

    Verdicts:
        consistent    no margin below -(eps_A + eps_B)
        violated      some margin below the threshold, also after shifting
                      both curves by their systematic bands
        inconclusive  the crossing disappears once the systematic bands are
                      taken into account

    Raises:
        LabError: If the direction or delta is invalid
    """
    if direction not in DIRECTIONS:
        raise LabError(f"Direction must be one of {DIRECTIONS}, got '{direction}'")
    if not 0 < delta < 1:
        raise LabError(f"delta must lie in (0, 1), got {delta}")
    alpha = alpha_grid(dA, dB)
    eps_a, eps_b = dkw_epsilon(dA.m, delta), dkw_epsilon(dB.m, delta)
    threshold = eps_a + eps_b
    margin = _margin(dA, dB, alpha, direction)
    crossing = margin < -threshold
    if not np.any(crossing):
        verdict = "consistent"
        violations: List[float] = []
    else:
        violations = alpha[crossing].tolist()
        shifted = _margin(dA, dB, alpha, direction, dA.systematic, dB.systematic)
        verdict = "violated" if np.any(shifted < -threshold) else "inconclusive"
        logger.warning(f"Dominance {dA.label} {direction} {dB.label}: {verdict} at "
                       f"{len(violations)} grid points (min margin {margin.min():.4g}, threshold {threshold:.4g})")
    return DominanceReport(
        direction=direction,
        delta=delta,
        alpha=alpha,
        survival_a=dA.survival(alpha),
        survival_b=dB.survival(alpha),
        margin=margin,
        epsilon_a=eps_a,
        epsilon_b=eps_b,
        verdict=verdict,
        violations=violations,
        label_a=dA.label or "A",
        label_b=dB.label or "B",
        systematic_a=dA.systematic,
        systematic_b=dB.systematic,
        theory_supported=dA.theory_supported and dB.theory_supported,
        summary_a=dA.summary(),
        summary_b=dB.summary(),
    )


def expectation_check(dA: EmpiricalDistribution, dB: EmpiricalDistribution,
                      multiplier: float = 3.0) -> Dict[str, Any]:
    """
    Mean ordering E[A] >= E[B] up to `multiplier` pooled standard errors.
    """
    pooled = float(np.hypot(dA.stderr, dB.stderr))
    passes = dA.mean >= dB.mean - multiplier * pooled
    if not passes:
        logger.warning(f"Expectation ordering failed: {dA.mean:.6g} < {dB.mean:.6g} - {multiplier} x {pooled:.3g}")
    return {
        "verdict": "consistent" if passes else "violated",
        "mean_a": dA.mean,
        "mean_b": dB.mean,
        "pooled_stderr": pooled,
        "multiplier": multiplier,
        "passes": bool(passes),
    }


def combine_verdicts(verdicts: List[Optional[str]]) -> str:
    """violated beats inconclusive beats consistent."""
    if "violated" in verdicts:
        return "violated"
    if "inconclusive" in verdicts:
        return "inconclusive"
    return "consistent"
