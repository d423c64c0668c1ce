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
Functionals of random bodies: which body to build from a sampled matrix and
which number to read off it.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from geometry.bodies import BallIntersection, Body
from geometry.coefficients import CoefficientSet
from geometry.measures import RadialMeasure, measure
from geometry.operations import diameter, mean_width, polar, realize
from geometry.types import DimensionError, Estimate, HypothesisError, LabError, Matrix
from geometry.volumes import intrinsic_volume, volume
from models.operator_norms import NormedSpaceSpec, operator_norm
from utils.rng import RngLike

logger = logging.getLogger(__name__)

KINDS = ("volume", "intrinsic", "diameter", "mean_width", "polar_measure", "operator_norm")
DEFAULT_INNER_SAMPLES = 100_000


@dataclass(frozen=True, eq=False)
class FunctionalSpec:
    """
    A functional phi together with the body constructor: either realize(X, C)
    or the ball intersection of the columns with radius `ball_radius`.
    """
    kind: str
    coefficients: Optional[CoefficientSet] = None
    ball_radius: Optional[float] = None
    j: Optional[int] = None
    nu: Optional[RadialMeasure] = None
    norm: Optional[NormedSpaceSpec] = None
    inner_samples: int = DEFAULT_INNER_SAMPLES

    def __post_init__(self):
        if self.kind not in KINDS:
            raise LabError(f"Unknown functional '{self.kind}', expected one of {KINDS}")

    @property
    def label(self) -> str:
        if self.kind == "intrinsic":
            return f"V_{self.j}"
        if self.kind == "polar_measure":
            return f"{self.nu.kind}(polar)"
        if self.kind == "operator_norm":
            return f"||X:{self.norm.label}->l2||"
        return self.kind

    def validate(self, n: int, N: int) -> None:
        """
        Raises:
            DimensionError: If j or the coefficient dimension is inconsistent
            HypothesisError: If polar_measure is requested for non-symmetric C
        """
        if self.kind == "operator_norm":
            if self.norm is None:
                raise LabError("operator_norm functional needs a normed space")
            if self.norm.dim != N:
                raise DimensionError(f"Normed space dimension {self.norm.dim} does not match N={N}")
            return
        if (self.coefficients is None) == (self.ball_radius is None):
            raise LabError("Exactly one of coefficients or ball_radius must define the body")
        if self.coefficients is not None and self.coefficients.dim != N:
            raise DimensionError(f"Coefficient set dimension {self.coefficients.dim} does not match N={N}")
        if self.kind == "intrinsic" and (self.j is None or not 1 <= self.j <= n):
            raise DimensionError(f"Intrinsic volume index j={self.j} outside [1, {n}]")
        if self.kind == "polar_measure":
            if self.nu is None or self.nu.n != n:
                raise DimensionError("polar_measure needs a radial measure in R^n")
            if self.coefficients is None or not self.coefficients.symmetric:
                raise HypothesisError("polar_measure requires a symmetric coefficient set")

    def body(self, X: Matrix) -> Body:
        if self.ball_radius is not None:
            return BallIntersection(X.columns, float(self.ball_radius))
        return realize(X, self.coefficients)

    def evaluate(self, X: Matrix, rng: RngLike = None) -> Estimate:
        """phi of the body built from X; inner Monte Carlo uses `rng`."""
        if self.kind == "operator_norm":
            return Estimate(operator_norm(X, self.norm), exact=not self.norm.heuristic)
        body = self.body(X)
        if self.kind == "volume":
            return volume(body, rng, self.inner_samples)
        if self.kind == "intrinsic":
            return intrinsic_volume(body, self.j, rng, self.inner_samples)
        if self.kind == "diameter":
            return Estimate(diameter(body))
        if self.kind == "mean_width":
            return Estimate(mean_width(body), exact=False)
        return measure(self.nu, polar(body), rng, self.inner_samples)
