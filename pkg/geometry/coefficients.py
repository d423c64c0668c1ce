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
Coefficient sets C in R^N.

A random body is XC = {X c : c in C}, so everything the geometry layer needs
from C is its support function h_C, its vertices when it is a polytope, and
a membership test. M-combinations of coefficient sets are supported through
the sign-orthant decomposition of their support function.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import ClassVar, Optional, Tuple

import numpy as np
from scipy.optimize import linprog, minimize

from geometry.types import CoefficientSetError, DimensionError

logger = logging.getLogger(__name__)

MAX_CUBE_VERTICES_DIM = 16


# ==================== YOUNG FUNCTIONS ====================

@dataclass(frozen=True)
class YoungFunction:
    """
    Convex, strictly increasing psi: [0, inf) -> [0, inf) with psi(0) = 0.

    Supported families:
        power(p):       psi(x) = x^p
        log_laplace(p): psi(x) = e^{-p} (e^x - 1)
    """
    family: str
    p: float

    def __post_init__(self):
        if self.family not in ("power", "log_laplace"):
            raise CoefficientSetError(f"Unknown Young function family '{self.family}'")
        if self.family == "power" and self.p < 1:
            raise CoefficientSetError(f"power Young function needs p >= 1, got {self.p}")
        if self.family == "log_laplace" and self.p <= 0:
            raise CoefficientSetError(f"log_laplace Young function needs p > 0, got {self.p}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "power":
            return np.power(x, self.p)
        with np.errstate(over="ignore"):
            return np.exp(-self.p) * np.expm1(x)


def validate_young_function(psi, probe_max: float = 20.0) -> None:
    """
    Check psi(0) = 0 and strict increase on a probe grid.

    Raises:
        CoefficientSetError: If psi fails either condition
    """
    grid = np.linspace(0.0, probe_max, 401)
    values = np.asarray(psi(grid), dtype=float)
    if abs(values[0]) > 1e-12:
        raise CoefficientSetError(f"Orlicz psi must satisfy psi(0) = 0, got {values[0]}")
    if not np.all(np.diff(values) > 0):
        raise CoefficientSetError("Orlicz psi must be strictly increasing")


def orlicz_norm(values: np.ndarray, psi, threshold: float = 1.0,
                weights: Optional[np.ndarray] = None, iterations: int = 80) -> np.ndarray:
    """
    Orlicz gauge inf{lambda > 0 : sum_i w_i psi(|t_i| / lambda) <= threshold}.

    Rows of `values` are independent vectors t; weights default to 1/N
    (the normalized Orlicz ball B_{psi,N}). Solved by vectorized bisection
    in log(lambda).

    Args:
        values: (k, N) or (N,) array
        psi: Young function
        threshold: Right-hand side of the defining inequality
        weights: Optional (N,) nonnegative weights
        iterations: Bisection steps

    Returns:
        (k,) array of gauges (scalar input gives a 1-element array)
    """
    t = np.abs(np.atleast_2d(np.asarray(values, dtype=float)))
    k, N = t.shape
    w = np.full(N, 1.0 / N) if weights is None else np.asarray(weights, dtype=float)
    scale = t.max(axis=1)
    result = np.zeros(k)
    active = scale > 0
    if not np.any(active):
        return result
    ta = t[active] / scale[active, None]

    def excess(lam):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(psi(ta / lam[:, None]), dtype=float) @ w - threshold

    lo = np.ones(ta.shape[0])
    hi = np.ones(ta.shape[0])
    for _ in range(200):
        grow = excess(hi) > 0
        if not np.any(grow):
            break
        hi[grow] *= 2.0
    for _ in range(200):
        shrink = excess(lo) <= 0
        if not np.any(shrink):
            break
        lo[shrink] *= 0.5
    for _ in range(iterations):
        mid = np.sqrt(lo * hi)
        above = excess(mid) > 0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    result[active] = hi * scale[active]
    return result


# ==================== COEFFICIENT SETS ====================

def _as_rows(v: np.ndarray, dim: int) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(v, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != dim:
        raise DimensionError(f"Expected vectors of length {dim}, got {arr.shape[1]}")
    return arr, single


def _unwrap(values: np.ndarray, single: bool):
    return values[0] if single else values


def _sign_vectors(m: int) -> np.ndarray:
    return np.array(list(itertools.product((1.0, -1.0), repeat=m)))


class CoefficientSet:
    """
    Compact convex set C in R^dim.

    Subclasses implement `_support` over rows and `_contains` over rows.
    """
    kind: ClassVar[str] = "abstract"
    dim: int

    symmetric: ClassVar[bool] = False
    unconditional: ClassVar[bool] = False
    positive_orthant: ClassVar[bool] = False

    def support(self, v):
        """h_C(v) = sup_{c in C} <c, v>, vectorized over rows."""
        rows, single = _as_rows(v, self.dim)
        return _unwrap(self._support(rows), single)

    def contains(self, c, tol: float = 1e-9):
        rows, single = _as_rows(c, self.dim)
        return _unwrap(self._contains(rows, tol), single)

    def vertices(self) -> Optional[np.ndarray]:
        return None

    def coordinate_bound(self) -> np.ndarray:
        """sup_{c in C} |c_i| for every coordinate i."""
        eye = np.eye(self.dim)
        return np.maximum(self.support(eye), self.support(-eye))

    def scale_interval(self, b: np.ndarray, tol: float = 1e-9) -> Tuple[float, float]:
        """
        The interval {t >= 0 : b in tC} as (lo, hi); empty when lo > hi.
        """
        raise CoefficientSetError(f"{self.kind} does not provide scale intervals")

    def _support(self, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _contains(self, rows: np.ndarray, tol: float) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Simplex(CoefficientSet):
    """conv{e_1, ..., e_N}."""
    dim: int
    kind: ClassVar[str] = "simplex"
    positive_orthant: ClassVar[bool] = True

    def vertices(self):
        return np.eye(self.dim)

    def _support(self, rows):
        return rows.max(axis=1)

    def _contains(self, rows, tol):
        return np.all(rows >= -tol, axis=1) & (np.abs(rows.sum(axis=1) - 1.0) <= tol)

    def scale_interval(self, b, tol=1e-9):
        b = np.asarray(b, dtype=float)
        if np.any(b < -tol):
            return np.inf, -np.inf
        s = float(b.sum())
        return s, s


@dataclass(frozen=True)
class SimplexWithOrigin(CoefficientSet):
    """conv{0, e_1, ..., e_N}."""
    dim: int
    kind: ClassVar[str] = "simplex_with_origin"
    positive_orthant: ClassVar[bool] = True

    def vertices(self):
        return np.vstack([np.zeros(self.dim), np.eye(self.dim)])

    def _support(self, rows):
        return np.maximum(rows.max(axis=1), 0.0)

    def _contains(self, rows, tol):
        return np.all(rows >= -tol, axis=1) & (rows.sum(axis=1) <= 1.0 + tol)

    def scale_interval(self, b, tol=1e-9):
        b = np.asarray(b, dtype=float)
        if np.any(b < -tol):
            return np.inf, -np.inf
        return float(b.sum()), np.inf


@dataclass(frozen=True)
class CrossPolytope(CoefficientSet):
    """B_1^N."""
    dim: int
    kind: ClassVar[str] = "cross_polytope"
    symmetric: ClassVar[bool] = True
    unconditional: ClassVar[bool] = True

    def vertices(self):
        eye = np.eye(self.dim)
        return np.vstack([eye, -eye])

    def _support(self, rows):
        return np.abs(rows).max(axis=1)

    def _contains(self, rows, tol):
        return np.abs(rows).sum(axis=1) <= 1.0 + tol

    def scale_interval(self, b, tol=1e-9):
        return float(np.abs(b).sum()), np.inf


@dataclass(frozen=True)
class Cube(CoefficientSet):
    """B_inf^N."""
    dim: int
    kind: ClassVar[str] = "cube"
    symmetric: ClassVar[bool] = True
    unconditional: ClassVar[bool] = True

    def vertices(self):
        if self.dim > MAX_CUBE_VERTICES_DIM:
            return None
        return _sign_vectors(self.dim)

    def _support(self, rows):
        return np.abs(rows).sum(axis=1)

    def _contains(self, rows, tol):
        return np.abs(rows).max(axis=1) <= 1.0 + tol

    def scale_interval(self, b, tol=1e-9):
        return float(np.abs(b).max()), np.inf


@dataclass(frozen=True)
class LqBall(CoefficientSet):
    """
    B_q^N for 1 <= q <= inf; `positive=True` keeps only the part in the
    positive orthant (used for L_p-type M-additions).
    """
    dim: int
    q: float
    positive: bool = False
    kind: ClassVar[str] = "lq_ball"

    def __post_init__(self):
        if not self.q >= 1:
            raise CoefficientSetError(f"LqBall needs q >= 1, got {self.q}")

    @property
    def symmetric(self):
        return not self.positive

    @property
    def unconditional(self):
        return not self.positive

    @property
    def positive_orthant(self):
        return self.positive

    @property
    def dual_exponent(self) -> float:
        if self.q == 1:
            return np.inf
        if np.isinf(self.q):
            return 1.0
        return self.q / (self.q - 1.0)

    def vertices(self):
        if self.positive:
            return None
        if self.q == 1:
            return CrossPolytope(self.dim).vertices()
        if np.isinf(self.q):
            return Cube(self.dim).vertices()
        return None

    def _support(self, rows):
        if self.positive:
            rows = np.maximum(rows, 0.0)
        return np.linalg.norm(rows, ord=self.dual_exponent, axis=1)

    def _contains(self, rows, tol):
        inside = np.linalg.norm(rows, ord=self.q, axis=1) <= 1.0 + tol
        if self.positive:
            inside &= np.all(rows >= -tol, axis=1)
        return inside

    def scale_interval(self, b, tol=1e-9):
        b = np.asarray(b, dtype=float)
        if self.positive and np.any(b < -tol):
            return np.inf, -np.inf
        return float(np.linalg.norm(b, ord=self.q)), np.inf


@dataclass(frozen=True)
class OrliczBallPolar(CoefficientSet):
    """
    Polar of the normalized Orlicz ball
    B_{psi,N} = {t : (1/N) sum psi(|t_i|) <= threshold}.

    Its support function is the Orlicz norm ||.||_{B_{psi/N}}.
    """
    dim: int
    psi: YoungFunction
    threshold: float = 1.0
    kind: ClassVar[str] = "orlicz_polar"
    symmetric: ClassVar[bool] = True
    unconditional: ClassVar[bool] = True

    def __post_init__(self):
        validate_young_function(self.psi)
        if self.threshold <= 0:
            raise CoefficientSetError(f"Orlicz threshold must be positive, got {self.threshold}")

    def _support(self, rows):
        return orlicz_norm(rows, self.psi, self.threshold)

    def dual_norm(self, c: np.ndarray) -> float:
        """sup{<c, t> : t in B_{psi,N}}, the gauge of the polar body."""
        a = np.abs(np.asarray(c, dtype=float))
        if not np.any(a > 0):
            return 0.0
        budget = self.dim * self.threshold
        start = np.full(self.dim, 0.5)
        result = minimize(
            lambda s: -float(a @ s),
            start,
            jac=lambda s: -a,
            bounds=[(0.0, None)] * self.dim,
            constraints=[{"type": "ineq", "fun": lambda s: budget - float(np.sum(self.psi(s)))}],
            method="SLSQP",
            options={"ftol": 1e-12, "maxiter": 500},
        )
        if not result.success:
            logger.warning(f"Orlicz dual norm optimization did not converge: {result.message}")
        return float(-result.fun)

    def _contains(self, rows, tol):
        return np.array([self.dual_norm(r) <= 1.0 + tol for r in rows])

    def scale_interval(self, b, tol=1e-9):
        return self.dual_norm(b), np.inf


@dataclass(frozen=True)
class GenericV(CoefficientSet):
    """conv of an explicit vertex list (rows)."""
    points: np.ndarray = field(repr=False)
    kind: ClassVar[str] = "generic_v"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] == 0:
            raise CoefficientSetError("GenericV needs at least one vertex")
        if not np.all(np.isfinite(pts)):
            raise CoefficientSetError("GenericV vertices must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __hash__(self):
        return hash(self.points.tobytes())

    def __eq__(self, other):
        return isinstance(other, GenericV) and np.array_equal(self.points, other.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def symmetric(self) -> bool:
        return bool(np.all(self.contains(-self.points)))

    @property
    def unconditional(self) -> bool:
        flips = _sign_vectors(self.dim)
        candidates = (self.points[:, None, :] * flips[None, :, :]).reshape(-1, self.dim)
        return bool(np.all(self.contains(candidates)))

    @property
    def positive_orthant(self) -> bool:
        return bool(np.all(self.points >= 0))

    def vertices(self):
        return self.points

    def _support(self, rows):
        return (rows @ self.points.T).max(axis=1)

    def _feasible(self, b: np.ndarray, tol: float) -> bool:
        k = self.points.shape[0]
        res = linprog(
            np.zeros(k),
            A_eq=np.vstack([self.points.T, np.ones((1, k))]),
            b_eq=np.concatenate([b, [1.0]]),
            bounds=[(0, None)] * k,
            method="highs",
        )
        if res.status != 0:
            return False
        residual = self.points.T @ res.x - b
        return bool(np.max(np.abs(residual)) <= max(tol, 1e-9) * (1 + np.abs(b).max()))

    def _contains(self, rows, tol):
        return np.array([self._feasible(r, tol) for r in rows])

    def scale_interval(self, b, tol=1e-9):
        # {t : b = V^T lam, sum lam = t, lam >= 0}; min and max of t by LP
        b = np.asarray(b, dtype=float)
        k = self.points.shape[0]
        a_eq = self.points.T
        bounds = [(0, None)] * k
        low = linprog(np.ones(k), A_eq=a_eq, b_eq=b, bounds=bounds, method="highs")
        if low.status != 0:
            return np.inf, -np.inf
        high = linprog(-np.ones(k), A_eq=a_eq, b_eq=b, bounds=bounds, method="highs")
        hi = np.inf if high.status == 3 else float(-high.fun)
        return float(low.fun), hi


@dataclass(frozen=True)
class MCombination(CoefficientSet):
    """
    M-combination of coefficient sets placed in consecutive coordinate
    blocks: {(a_1 c_1, ..., a_m c_m) : a in M, c_i in C_i}.
    """
    M: CoefficientSet
    parts: Tuple[CoefficientSet, ...]
    kind: ClassVar[str] = "m_combination"

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if self.M.dim != len(self.parts):
            raise CoefficientSetError(
                f"M lives in R^{self.M.dim} but {len(self.parts)} parts were given"
            )

    @property
    def dim(self) -> int:
        return int(sum(p.dim for p in self.parts))

    @property
    def symmetric(self) -> bool:
        return bool(self.M.symmetric)

    @property
    def unconditional(self) -> bool:
        return bool(self.M.unconditional and all(p.unconditional for p in self.parts))

    @property
    def positive_orthant(self) -> bool:
        return bool(self.M.positive_orthant and all(p.positive_orthant for p in self.parts))

    @property
    def convex_by_construction(self) -> bool:
        """M in the positive orthant, or M unconditional with symmetric parts."""
        if self.M.positive_orthant:
            return True
        return bool(self.M.unconditional and all(p.symmetric for p in self.parts))

    def _blocks(self, rows: np.ndarray):
        offsets = np.cumsum([0] + [p.dim for p in self.parts])
        return [rows[:, offsets[i]:offsets[i + 1]] for i in range(len(self.parts))]

    def _support(self, rows):
        blocks = self._blocks(rows)
        alpha = np.column_stack([p.support(b) for p, b in zip(self.parts, blocks)])
        beta = np.column_stack([p.support(-b) for p, b in zip(self.parts, blocks)])
        vertices = self.M.vertices()
        if vertices is not None:
            totals = np.zeros((rows.shape[0], vertices.shape[0]))
            for i in range(len(self.parts)):
                a = vertices[None, :, i]
                totals += np.maximum(a * alpha[:, i:i + 1], -a * beta[:, i:i + 1])
            return totals.max(axis=1)
        best = np.full(rows.shape[0], -np.inf)
        for signs in _sign_vectors(len(self.parts)):
            w = np.where(signs > 0, alpha, -beta)
            best = np.maximum(best, self.M.support(w))
        return best

    def _contains_one(self, b: np.ndarray, tol: float) -> bool:
        intervals = [p.scale_interval(x, tol) for p, x in zip(self.parts, self._blocks(b[None, :]))]
        lo = np.array([iv[0] for iv in intervals])
        hi = np.array([iv[1] for iv in intervals])
        if np.any(lo > hi + tol):
            return False
        if self.M.unconditional and all(p.symmetric for p in self.parts):
            return bool(self.M.contains(lo, tol))
        if self.M.positive_orthant:
            vertices = self.M.vertices()
            if vertices is not None:
                k = vertices.shape[0]
                res = linprog(
                    np.zeros(k),
                    A_ub=np.vstack([-vertices.T, vertices.T]),
                    b_ub=np.concatenate([-lo + tol, np.where(np.isinf(hi), 1e300, hi + tol)]),
                    A_eq=np.ones((1, k)),
                    b_eq=[1.0],
                    bounds=[(0, None)] * k,
                    method="highs",
                )
                return res.status == 0
            if isinstance(self.M, LqBall):
                return bool(self.M.contains(lo, tol))
        raise CoefficientSetError(
            "Membership in this M-combination needs M unconditional with symmetric parts "
            "or M in the positive orthant"
        )

    def _contains(self, rows, tol):
        return np.array([self._contains_one(r, tol) for r in rows])
