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
Core value types and error hierarchy for the geometry kernels.

Holds the n x N column matrix, the Estimate tuple every measuring routine
returns, and the exceptions raised across the lab.
"""

import logging
from dataclasses import dataclass, field
from math import gamma, pi
from typing import List, NamedTuple, Optional

import numpy as np

logger = logging.getLogger(__name__)

MAX_DIMENSION = 6
MAX_COLUMNS = 30


# ==================== ERRORS ====================

class LabError(ValueError):
    """Base class for every error raised by the lab."""


class DimensionError(LabError):
    """Shapes or dimensions do not agree."""


class CoefficientSetError(LabError):
    """Invalid coefficient set parameters."""


class DegenerateBodyError(LabError):
    """Body has no interior where an interior is required."""


class UnboundedBodyError(LabError):
    """Body has no finite bounding radius."""


class NotInteriorError(LabError):
    """The origin is not an interior point of a body."""

    def __init__(self, message: str, direction: Optional[np.ndarray] = None):
        super().__init__(message)
        self.direction = direction


class SamplingError(LabError):
    """A sampler cannot produce draws at an acceptable rate."""


class HypothesisError(LabError):
    """A theorem hypothesis (sup bound, symmetry, unconditionality) fails."""


class QuadratureError(LabError):
    """Quadrature request outside the supported range."""


class ConfigError(LabError):
    """Experiment configuration is invalid; carries every message found."""

    def __init__(self, errors: List[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


# ==================== VALUES ====================

class Estimate(NamedTuple):
    """A measured quantity with its standard error."""
    value: float
    stderr: float = 0.0
    exact: bool = True
    degenerate: bool = False


def ball_volume(n: int) -> float:
    """Volume omega_n of the Euclidean unit ball in R^n (omega_0 = 1)."""
    return pi ** (n / 2.0) / gamma(n / 2.0 + 1.0)


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1}."""
    return n * ball_volume(n)


@dataclass(frozen=True)
class Matrix:
    """
    The n x N real matrix [x_1, ..., x_N] of sampled column vectors.

    Columns are the points x_i in R^n.
    """
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim == 1:
            entries = entries.reshape(-1, 1)
        if entries.ndim != 2:
            raise DimensionError(f"Matrix entries must be 2-D, got shape {entries.shape}")
        n, N = entries.shape
        if not 1 <= n <= MAX_DIMENSION:
            raise DimensionError(f"Ambient dimension n={n} outside [1, {MAX_DIMENSION}]")
        if not 1 <= N <= MAX_COLUMNS:
            raise DimensionError(f"Column count N={N} outside [1, {MAX_COLUMNS}]")
        if not np.all(np.isfinite(entries)):
            raise DimensionError("Matrix entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_columns(cls, columns) -> "Matrix":
        return cls(np.column_stack([np.asarray(c, dtype=float) for c in columns]))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    @property
    def columns(self) -> np.ndarray:
        """Columns as rows of an (N, n) array."""
        return self.entries.T

    def hstack(self, other: "Matrix") -> "Matrix":
        """Block matrix [self, other]."""
        if other.n != self.n:
            raise DimensionError(f"Cannot stack matrices with n={self.n} and n={other.n}")
        return Matrix(np.hstack([self.entries, other.entries]))
