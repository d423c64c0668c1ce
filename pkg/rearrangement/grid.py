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
Nonnegative functions on centered uniform grids.

A grid has an odd number of cells per axis, cell width h, and cell centers
at (i - (cells - 1) / 2) * h. The text format is a header line "n cells h"
followed by whitespace-separated values in row-major order.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from geometry.types import DimensionError, LabError

logger = logging.getLogger(__name__)

MAX_GRID_DIMENSION = 3


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nonnegative function sampled at cell centers of a centered grid."""
    n: int
    cells: int
    h: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_GRID_DIMENSION:
            raise DimensionError(f"Grid dimension {self.n} outside [1, {MAX_GRID_DIMENSION}]")
        if self.cells < 1 or self.cells % 2 == 0:
            raise DimensionError(f"Cells per axis must be odd, got {self.cells}")
        if not self.h > 0:
            raise DimensionError(f"Cell width must be positive, got {self.h}")
        values = np.array(self.values, dtype=float).reshape((self.cells,) * self.n)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise LabError("Grid values must be finite and nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.h ** self.n)

    @property
    def half_width(self) -> float:
        """Distance from the origin to the outer cell boundary along an axis."""
        return self.cells * self.h / 2.0

    def axis(self) -> np.ndarray:
        return (np.arange(self.cells) - (self.cells - 1) / 2.0) * self.h

    def points(self) -> np.ndarray:
        """Cell centers as rows, in row-major order."""
        grids = np.meshgrid(*([self.axis()] * self.n), indexing="ij")
        return np.column_stack([g.ravel() for g in grids])

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.n, self.cells, self.h, values)

    def normalized(self) -> "GridFunction":
        mass = self.mass
        if mass <= 0:
            raise LabError("Cannot normalize a grid function with zero mass")
        return self.with_values(self.values / mass)

    def norm(self, p: float = 1.0) -> float:
        return float((np.sum(self.values ** p) * self.h ** self.n) ** (1.0 / p))

    def l1_distance(self, other: "GridFunction") -> float:
        return float(np.abs(self.values - other.values).sum() * self.h ** self.n)

    def lookup(self, points: np.ndarray) -> np.ndarray:
        """Piecewise-constant evaluation; zero outside the grid."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        index = np.floor(points / self.h + self.cells / 2.0).astype(int)
        inside = np.all((index >= 0) & (index < self.cells), axis=1)
        out = np.zeros(points.shape[0])
        if np.any(inside):
            out[inside] = self.values[tuple(index[inside].T)]
        return out

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], n: int, cells: int, h: float) -> "GridFunction":
        blank = cls(n, cells, h, np.zeros((cells,) * n))
        return blank.with_values(np.asarray(fn(blank.points()), dtype=float).reshape((cells,) * n))


# ==================== INDICATORS ====================

def box_indicator(lower: Sequence[float], upper: Sequence[float], cells: int, h: float,
                  height: float = 1.0) -> GridFunction:
    """height * 1 of the axis-parallel box [lower, upper] (cell-center rule)."""
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))

    def fn(points):
        return height * np.all((points >= lower) & (points <= upper), axis=1)

    return GridFunction.from_function(fn, lower.shape[0], cells, h)


def interval_indicator(lo: float, hi: float, cells: int, h: float, height: float = 1.0) -> GridFunction:
    return box_indicator([lo], [hi], cells, h, height)


def disk_indicator(center: Sequence[float], radius: float, cells: int, h: float,
                   height: float = 1.0) -> GridFunction:
    center = np.asarray(center, dtype=float)

    def fn(points):
        return height * (np.linalg.norm(points - center, axis=1) <= radius)

    return GridFunction.from_function(fn, center.shape[0], cells, h)


def ellipse_indicator(center: Sequence[float], axes: Sequence[float], angle: float, cells: int, h: float,
                      height: float = 1.0) -> GridFunction:
    """Planar ellipse with semi-axes `axes`, rotated by `angle` radians."""
    center = np.asarray(center, dtype=float)
    a, b = axes
    rot = np.array([[np.cos(angle), np.sin(angle)], [-np.sin(angle), np.cos(angle)]])

    def fn(points):
        local = (points - center) @ rot.T
        return height * ((local[:, 0] / a) ** 2 + (local[:, 1] / b) ** 2 <= 1.0)

    return GridFunction.from_function(fn, 2, cells, h)


# ==================== TEXT FORMAT ====================

def write_grid(g: GridFunction) -> str:
    """Serialize as "n cells h" then row-major values (repr floats round-trip exactly)."""
    lines = [f"{g.n} {g.cells} {float(g.h)!r}"]
    rows = g.values.reshape(-1, g.cells)
    lines.extend(" ".join(repr(float(v)) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def read_grid(text: str) -> GridFunction:
    """
    Parse the "n cells h" format.

    Raises:
        LabError: If the header is malformed or the value count is wrong
    """
    tokens = text.split()
    if len(tokens) < 3:
        raise LabError("Grid text needs a header 'n cells h'")
    try:
        n, cells, h = int(tokens[0]), int(tokens[1]), float(tokens[2])
        values = np.array([float(t) for t in tokens[3:]])
    except ValueError as e:
        raise LabError(f"Malformed grid text: {e}") from e
    if values.size != cells ** n:
        raise LabError(f"Expected {cells ** n} grid values, found {values.size}")
    return GridFunction(n, cells, h, values.reshape((cells,) * n))
