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
Exact planar geometry of intersections of equal-radius disks.

The boundary of the intersection is a cycle of circular arcs. Each disk
contributes at most one arc, because every other disk cuts its circle in an
arc of angular length at most pi.
"""

import logging
from typing import List, NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


class Arc(NamedTuple):
    """Boundary arc of circle `center` from angle `start` over `length` radians."""
    center: np.ndarray
    start: float
    length: float

    @property
    def end(self) -> float:
        return self.start + self.length


def _intersect_arc(current, start: float, length: float):
    if current is None:
        return start, length
    s1, l1 = current
    offset = (start - s1) % TWO_PI
    for shift in (offset, offset - TWO_PI):
        lo = max(0.0, shift)
        hi = min(l1, shift + length)
        if hi > lo:
            return s1 + lo, hi - lo
    return s1, 0.0


def boundary_arcs(centers: np.ndarray, radius: float) -> List[Arc]:
    """
    Arcs bounding the intersection of disks B(c_i, radius).

    Returns:
        List of arcs with positive length; empty when the intersection has no
        interior
    """
    centers = np.unique(np.atleast_2d(np.asarray(centers, dtype=float)), axis=0)
    arcs = []
    for i, c in enumerate(centers):
        current = None
        empty = False
        for j, other in enumerate(centers):
            if i == j:
                continue
            d = other - c
            dist = float(np.hypot(d[0], d[1]))
            if dist >= 2.0 * radius:
                return []
            half = float(np.arccos(dist / (2.0 * radius)))
            gamma = float(np.arctan2(d[1], d[0]))
            current = _intersect_arc(current, gamma - half, 2.0 * half)
            if current[1] <= 0.0:
                empty = True
                break
        if empty:
            continue
        if current is None:
            current = (0.0, TWO_PI)
        arcs.append(Arc(c, current[0], current[1]))
    return arcs


def arc_area(arcs: List[Arc], radius: float) -> float:
    """Area enclosed by a closed arc cycle (Green's theorem)."""
    total = 0.0
    for arc in arcs:
        cx, cy = arc.center
        p1, p2 = arc.start, arc.end
        total += (radius * cx * (np.sin(p2) - np.sin(p1))
                  - radius * cy * (np.cos(p2) - np.cos(p1))
                  + radius * radius * arc.length)
    return 0.5 * total


def arc_perimeter(arcs: List[Arc], radius: float) -> float:
    return float(radius * sum(arc.length for arc in arcs))


def arc_vertices(arcs: List[Arc], radius: float) -> np.ndarray:
    """Corner points where consecutive arcs meet (empty for a full circle)."""
    points = []
    for arc in arcs:
        if arc.length >= TWO_PI - 1e-15:
            continue
        for phi in (arc.start, arc.end):
            points.append(arc.center + radius * np.array([np.cos(phi), np.sin(phi)]))
    return np.array(points).reshape(-1, 2)


def arc_support(arcs: List[Arc], radius: float, directions: np.ndarray) -> np.ndarray:
    """
    Support function of the disk intersection at unit directions (rows).

    The maximizer is either interior to an arc whose outward normal equals u
    or a corner point.
    """
    directions = np.atleast_2d(directions)
    angles = np.arctan2(directions[:, 1], directions[:, 0])
    best = np.full(directions.shape[0], -np.inf)
    for arc in arcs:
        inside = ((angles - arc.start) % TWO_PI) <= arc.length
        value = directions @ arc.center + radius
        best = np.where(inside, np.maximum(best, value), best)
    corners = arc_vertices(arcs, radius)
    if corners.shape[0]:
        best = np.maximum(best, (directions @ corners.T).max(axis=1))
    return best
