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
Operator norms ||X : E -> l_2^n|| for concrete N-dimensional spaces E.

    L1    max column norm
    L2    largest singular value
    Linf  max over sign vectors of ||X s||_2 (N <= 24)
    Lq    power iteration over l_q with 32 starts (heuristic)
    VBall max over unit-ball vertices of ||X v||_2
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from geometry.types import DimensionError, LabError, Matrix

logger = logging.getLogger(__name__)

SIGN_ENUMERATION_CAP = 24
MAX_VOLUME_RATIO_DIMENSION = 16
SIGN_CHUNK = 1 << 15
POWER_STARTS = 32
POWER_ITERATIONS = 300
RANDOM_BOUNDARY_POINTS = 10_000
HEURISTIC_SEED = 6101


@dataclass(frozen=True, eq=False)
class NormedSpaceSpec:
    """
    The space E = (R^N, ||.||): an l_q norm or the norm whose unit ball is
    conv of a symmetric vertex list.
    """
    kind: str
    dim: int
    q: float = 2.0
    vertices: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("lq", "vball"):
            raise LabError(f"Unknown normed space kind '{self.kind}'")
        if self.kind == "lq" and not self.q >= 1:
            raise LabError(f"l_q space needs q >= 1, got {self.q}")
        if self.kind == "vball":
            v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
            if v.shape[1] != self.dim:
                raise DimensionError(f"Unit-ball vertices must lie in R^{self.dim}")
            if np.linalg.matrix_rank(v) < self.dim:
                raise LabError("Unit-ball vertices must span R^N")
            gaps = np.min(np.linalg.norm(v[:, None, :] + v[None, :, :], axis=2), axis=1)
            if np.any(gaps > 1e-9):
                raise LabError("Unit-ball vertex list must be symmetric")
            v.setflags(write=False)
            object.__setattr__(self, "vertices", v)

    @classmethod
    def lq(cls, dim: int, q: float) -> "NormedSpaceSpec":
        return cls("lq", dim, float(q))

    @property
    def heuristic(self) -> bool:
        return self.kind == "lq" and self.q not in (1.0, 2.0) and not np.isinf(self.q)

    @property
    def label(self) -> str:
        if self.kind == "vball":
            return f"vball[{self.vertices.shape[0]}]"
        return "Linf" if np.isinf(self.q) else f"L{self.q:g}"


def _sign_vectors(N: int):
    """Sign vectors with first entry +1, in chunks."""
    if N == 1:
        yield np.ones((1, 1))
        return
    tail = itertools.product((1.0, -1.0), repeat=N - 1)
    while True:
        chunk = list(itertools.islice(tail, SIGN_CHUNK))
        if not chunk:
            return
        rows = np.array(chunk)
        yield np.column_stack([np.ones(rows.shape[0]), rows])


def _lq_power(entries: np.ndarray, q: float) -> float:
    p = q / (q - 1.0)
    N = entries.shape[1]
    gen = np.random.default_rng(HEURISTIC_SEED)
    starts = np.vstack([np.eye(N), gen.standard_normal((max(POWER_STARTS - N, 0), N))])[:POWER_STARTS]
    best = 0.0
    for c in starts:
        c = c / np.linalg.norm(c, ord=q)
        for _ in range(POWER_ITERATIONS):
            y = entries @ c
            norm_y = np.linalg.norm(y)
            if norm_y == 0:
                break
            z = entries.T @ (y / norm_y)
            norm_z = np.linalg.norm(z, ord=p)
            if norm_z == 0:
                break
            new = np.sign(z) * (np.abs(z) / norm_z) ** (p - 1.0)
            if np.allclose(new, c, rtol=0, atol=1e-13):
                c = new
                break
            c = new
        best = max(best, float(np.linalg.norm(entries @ c)))
    boundary = gen.standard_normal((RANDOM_BOUNDARY_POINTS, N))
    boundary /= np.linalg.norm(boundary, ord=q, axis=1, keepdims=True)
    sampled = float(np.linalg.norm(boundary @ entries.T, axis=1).max())
    if sampled > best * (1.0 + 1e-9):
        logger.debug(f"Random boundary points beat power iteration for q={q}: {sampled} > {best}")
    return max(best, sampled)


def operator_norm(X: Matrix, E: NormedSpaceSpec) -> float:
    """
    ||X : E -> l_2^n||.

    Raises:
        DimensionError: If E.dim != N, or for Linf with N > 24
    """
    entries = X.entries if isinstance(X, Matrix) else np.asarray(X, dtype=float)
    N = entries.shape[1]
    if E.dim != N:
        raise DimensionError(f"Normed space has dimension {E.dim}, matrix has N={N}")
    if E.kind == "vball":
        return float(np.linalg.norm(E.vertices @ entries.T, axis=1).max())
    if E.q == 1:
        return float(np.linalg.norm(entries, axis=0).max())
    if E.q == 2:
        return float(np.linalg.norm(entries, ord=2))
    if np.isinf(E.q):
        if N > SIGN_ENUMERATION_CAP:
            raise DimensionError(f"sign enumeration cap {SIGN_ENUMERATION_CAP}: N={N}")
        return float(max(np.linalg.norm(s @ entries.T, axis=1).max() for s in _sign_vectors(N)))
    logger.debug(f"Operator norm from l_{E.q:g} is heuristic")
    return _lq_power(entries, E.q)


def batch_operator_norm(stack: np.ndarray, E: NormedSpaceSpec) -> np.ndarray:
    """
    Operator norms of a stack of matrices with shape (m, n, N).
    """
    stack = np.asarray(stack, dtype=float)
    m, n, N = stack.shape
    if E.dim != N:
        raise DimensionError(f"Normed space has dimension {E.dim}, matrices have N={N}")
    if E.kind == "vball":
        return np.linalg.norm(np.einsum("kN,mnN->mkn", E.vertices, stack), axis=2).max(axis=1)
    if E.q == 1:
        return np.linalg.norm(stack, axis=1).max(axis=1)
    if E.q == 2:
        return np.linalg.norm(stack, ord=2, axis=(1, 2))
    if np.isinf(E.q):
        if N > SIGN_ENUMERATION_CAP:
            raise DimensionError(f"sign enumeration cap {SIGN_ENUMERATION_CAP}: N={N}")
        best = np.zeros(m)
        for signs in _sign_vectors(N):
            block = max(1, 4_000_000 // (signs.shape[0] * n))
            for start in range(0, m, block):
                images = np.einsum("sN,mnN->msn", signs, stack[start:start + block])
                best[start:start + block] = np.maximum(
                    best[start:start + block], np.linalg.norm(images, axis=2).max(axis=1)
                )
        return best
    return np.array([_lq_power(stack[k], E.q) for k in range(m)])
