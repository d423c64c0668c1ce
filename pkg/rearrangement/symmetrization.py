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
Symmetric decreasing rearrangement and Steiner symmetrization on grids.

Cells are ranked by squared integer distance of their center to the origin,
ties broken by flat row-major index, so outputs are deterministic.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy import ndimage

from geometry.types import DimensionError, LabError
from rearrangement.grid import GridFunction

logger = logging.getLogger(__name__)


def _offsets(cells: int) -> np.ndarray:
    return np.arange(cells) - (cells - 1) // 2


def radial_order(n: int, cells: int) -> np.ndarray:
    """Flat cell indices sorted by distance to the origin, ties by index."""
    grids = np.meshgrid(*([_offsets(cells)] * n), indexing="ij")
    d2 = sum(g.astype(np.int64) ** 2 for g in grids).ravel()
    return np.lexsort((np.arange(d2.size), d2))


def sdr(g: GridFunction) -> GridFunction:
    """Symmetric decreasing rearrangement: largest values on the cells nearest the origin."""
    order = radial_order(g.n, g.cells)
    flat = np.empty(g.values.size)
    flat[order] = np.sort(g.values.ravel())[::-1]
    return g.with_values(flat.reshape(g.values.shape))


def steiner_symmetral(g: GridFunction, axis: int) -> GridFunction:
    """
    One-dimensional rearrangement of every grid line parallel to `axis`.

    Raises:
        DimensionError: If axis >= n
    """
    if not 0 <= axis < g.n:
        raise DimensionError(f"Axis {axis} outside [0, {g.n})")
    order = radial_order(1, g.cells)
    lines = np.moveaxis(g.values, axis, -1)
    ranked = np.sort(lines, axis=-1)[..., ::-1]
    out = np.empty_like(lines)
    out[..., order] = ranked
    return g.with_values(np.moveaxis(out, -1, axis))


def rotate_grid(g: GridFunction, degrees: float) -> GridFunction:
    """
    Bilinear rotation of a planar grid about the origin; negative
    interpolation artifacts are clipped and the mass is restored.
    """
    if g.n != 2:
        raise DimensionError("Rotated symmetrization steps need a planar grid")
    rotated = ndimage.rotate(np.asarray(g.values), degrees, reshape=False, order=1, mode="constant", cval=0.0)
    rotated = np.clip(rotated, 0.0, None)
    total = rotated.sum()
    if total > 0:
        rotated *= g.values.sum() / total
    return g.with_values(rotated)


@dataclass(frozen=True)
class SymmetrizationStep:
    """Rotate the grid by `angle` degrees (planar only), then symmetrize along `axis`."""
    axis: int
    angle: float = 0.0

    @property
    def resamples(self) -> bool:
        return self.angle % 360.0 != 0.0


@dataclass(frozen=True)
class SymmetrizationResult:
    grid: GridFunction
    history: List[float]
    converged: bool
    resampled_steps: List[int]
    target_mass: float


def iterate_symmetrizations(g: GridFunction, schedule: Sequence[SymmetrizationStep], tol: float,
                            max_iter: int) -> SymmetrizationResult:
    """
    Apply the schedule cyclically until the L1 distance to sdr(g) falls below
    tol * mass(g) or max_iter steps have run.

    The history holds the L1 distance before the first step and after every
    step. Non-convergence is reported through the result, not raised.

    Raises:
        LabError: If the schedule is empty
    """
    if not schedule:
        raise LabError("Symmetrization schedule must be nonempty")
    target = sdr(g)
    threshold = tol * g.mass
    current = g
    history = [current.l1_distance(target)]
    resampled = []
    converged = history[0] < threshold
    step = 0
    while not converged and step < max_iter:
        move = schedule[step % len(schedule)]
        if move.resamples:
            current = rotate_grid(current, move.angle)
            resampled.append(step + 1)
        current = steiner_symmetral(current, move.axis)
        history.append(current.l1_distance(target))
        converged = history[-1] < threshold
        step += 1
    if not converged:
        logger.warning(f"Symmetrization did not reach tol={tol} after {max_iter} steps "
                       f"(final L1 {history[-1]:.4g} of mass {g.mass:.4g})")
    else:
        logger.debug(f"Symmetrization converged after {step} steps")
    return SymmetrizationResult(current, history, converged, resampled, g.mass)
