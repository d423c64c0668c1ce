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
Experiment Configuration

TOML experiment configs validated by strict pydantic models. Every problem
found in a config (unknown keys, type errors, dimension mismatches, missing
seed) is collected into one ConfigError.
"""

import logging
import math
import os
from typing import Any, Dict, List, Literal, Optional

import numpy as np
import toml
import xxhash
from pydantic import BaseModel, ConfigDict, ValidationError

import sys
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from geometry.bodies import Body, EuclideanBall, VPolytope
from geometry.coefficients import (
    CoefficientSet,
    CrossPolytope,
    Cube,
    GenericV,
    LqBall,
    OrliczBallPolar,
    Simplex,
    SimplexWithOrigin,
    YoungFunction,
)
from geometry.measures import RadialMeasure
from geometry.types import MAX_COLUMNS, MAX_DIMENSION, ConfigError
from models.densities import Density, GridDensity, PointMass, TruncatedGaussian, UniformOnBody
from models.functionals import KINDS as FUNCTIONAL_KINDS
from models.functionals import FunctionalSpec
from models.operator_norms import MAX_VOLUME_RATIO_DIMENSION, SIGN_ENUMERATION_CAP, NormedSpaceSpec
from rearrangement.grid import read_grid

logger = logging.getLogger(__name__)

EXPERIMENT_KINDS = ("dominance", "lln", "rearrangement", "bll", "kanter", "opnorm", "smallball", "maddition")
SYMMETRIC_COEFFICIENTS = ("cross_polytope", "cube", "lq", "orlicz_polar")
UNIT_TRIANGLE = [[0.0, 0.0], [math.sqrt(2.0), 0.0], [0.0, math.sqrt(2.0)]]

REDUCED_REPLICAS = 200
REDUCED_INNER_SAMPLES = 4000
REDUCED_TRIALS = 2
REDUCED_POLYGONS = 4
REDUCED_SCHEDULE_MAX = 200
REDUCED_ITERATIONS = 20
REDUCED_CELLS = 65
REDUCED_VOLUME_RATIO_SAMPLES = 20_000


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", ser_json_inf_nan="strings")


# ==================== GEOMETRY SPECS ====================

class BodySpec(StrictModel):
    """A convex body: square, rectangle, triangle, cube, box, ball/disk or explicit polytope."""
    type: Literal["square", "rectangle", "triangle", "cube", "box", "ball", "disk", "polytope"]
    side: float = 1.0
    width: float = 1.0
    height: float = 1.0
    radius: float = 1.0
    center: Optional[List[float]] = None
    lower: Optional[List[float]] = None
    upper: Optional[List[float]] = None
    vertices: Optional[List[List[float]]] = None

    def dimension(self, n: Optional[int]) -> Optional[int]:
        if self.type in ("square", "rectangle", "triangle", "disk"):
            return 2
        if self.type == "polytope" and self.vertices:
            return len(self.vertices[0])
        if self.type == "box" and self.lower is not None:
            return len(self.lower)
        if self.center is not None:
            return len(self.center)
        return n

    def build(self, n: int) -> Body:
        dim = self.dimension(n)
        center = np.zeros(dim) if self.center is None else np.asarray(self.center, dtype=float)
        if self.type in ("ball", "disk"):
            return EuclideanBall(center, self.radius)
        if self.type == "polytope":
            return VPolytope(np.asarray(self.vertices, dtype=float))
        if self.type == "triangle":
            return VPolytope(np.asarray(self.vertices or UNIT_TRIANGLE, dtype=float) + center)
        if self.type == "box":
            lower, upper = np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)
        else:
            half = np.full(dim, self.side / 2.0)
            if self.type == "rectangle":
                half = np.array([self.width, self.height]) / 2.0
            lower, upper = center - half, center + half
        corners = np.array(np.meshgrid(*zip(lower, upper), indexing="ij")).reshape(dim, -1).T
        return VPolytope(corners)

    def problems(self, n: Optional[int]) -> List[str]:
        errors = []
        if self.type == "polytope" and not self.vertices:
            errors.append("polytope body needs vertices")
        if self.type == "box" and (self.lower is None or self.upper is None or len(self.lower) != len(self.upper)):
            errors.append("box body needs lower and upper of equal length")
        if self.type in ("ball", "disk") and self.radius <= 0:
            errors.append("ball radius must be positive")
        dim = self.dimension(n)
        if n is not None and dim is not None and dim != n:
            errors.append(f"body of type {self.type} lives in R^{dim}, experiment has n={n}")
        return errors


class DensitySpec(StrictModel):
    """A column density; `count` repeats it in a densities list."""
    type: Literal["uniform", "gaussian", "grid", "point"]
    body: Optional[BodySpec] = None
    sigma: float = 1.0
    radius: Optional[float] = None
    center: Optional[List[float]] = None
    file: Optional[str] = None
    point: Optional[List[float]] = None
    count: int = 1

    def build(self, n: int, base_dir: str = ".") -> Density:
        if self.type == "uniform":
            return UniformOnBody(self.body.build(n))
        if self.type == "gaussian":
            center = None if self.center is None else np.asarray(self.center, dtype=float)
            return TruncatedGaussian(n, self.sigma, self.radius, center)
        if self.type == "point":
            return PointMass(np.asarray(self.point, dtype=float))
        path = self.file if os.path.isabs(self.file) else os.path.join(base_dir, self.file)
        with open(path, encoding="utf-8") as handle:
            return GridDensity.from_grid(read_grid(handle.read()))

    def problems(self, n: Optional[int]) -> List[str]:
        if self.type == "uniform":
            if self.body is None:
                return ["uniform density needs a body"]
            return self.body.problems(n)
        if self.type == "grid" and not self.file:
            return ["grid density needs a file"]
        if self.type == "point":
            if not self.point:
                return ["point density needs a point"]
            if n is not None and len(self.point) != n:
                return [f"point lives in R^{len(self.point)}, experiment has n={n}"]
        if self.type == "gaussian" and self.sigma <= 0:
            return ["gaussian sigma must be positive"]
        return []


class YoungSpec(StrictModel):
    family: Literal["power", "log_laplace"] = "power"
    p: float = 1.0

    def build(self) -> YoungFunction:
        return YoungFunction(self.family, self.p)


class CoefficientSpec(StrictModel):
    """A coefficient set C in R^N."""
    type: Literal["simplex", "simplex_origin", "cross_polytope", "cube", "lq", "orlicz_polar", "generic"]
    q: float = 2.0
    positive: bool = False
    young: Optional[YoungSpec] = None
    threshold: float = 1.0
    points: Optional[List[List[float]]] = None

    def dimension(self, N: Optional[int]) -> Optional[int]:
        if self.type == "generic" and self.points:
            return len(self.points[0])
        return N

    def build(self, N: int) -> CoefficientSet:
        if self.type == "simplex":
            return Simplex(N)
        if self.type == "simplex_origin":
            return SimplexWithOrigin(N)
        if self.type == "cross_polytope":
            return CrossPolytope(N)
        if self.type == "cube":
            return Cube(N)
        if self.type == "lq":
            return LqBall(N, self.q, self.positive)
        if self.type == "orlicz_polar":
            return OrliczBallPolar(N, (self.young or YoungSpec()).build(), self.threshold)
        return GenericV(np.asarray(self.points, dtype=float))

    @property
    def symmetric(self) -> bool:
        if self.type == "generic":
            return bool(self.points) and bool(self.build(len(self.points[0])).symmetric)
        return self.type in SYMMETRIC_COEFFICIENTS and not (self.type == "lq" and self.positive)


class MeasureSpec(StrictModel):
    kind: Literal["lebesgue", "gaussian", "inverse_power"] = "lebesgue"
    sigma: float = 1.0


class NormSpec(StrictModel):
    """
    The space E: l_q (q may be "inf") or a symmetric vertex list.

    `volume_ratio_samples` > 0 adds the volume ratio of the l_2 -> l_2
    operator ball as a reported companion of opnorm runs.
    """
    kind: Literal["lq", "vball"] = "lq"
    q: float = 2.0
    vertices: Optional[List[List[float]]] = None
    volume_ratio_samples: int = 0

    def build(self, N: int) -> NormedSpaceSpec:
        if self.kind == "vball":
            return NormedSpaceSpec("vball", N, vertices=np.asarray(self.vertices, dtype=float))
        return NormedSpaceSpec.lq(N, self.q)


class FunctionalConfig(StrictModel):
    kind: str
    j: Optional[int] = None
    ball_radius: Optional[float] = None
    measure: Optional[MeasureSpec] = None
    inner_samples: int = 100_000


# ==================== EXPERIMENT SECTIONS ====================

class LlnSection(StrictModel):
    mode: Literal["hull", "Zp", "Orlicz"] = "hull"
    body: BodySpec
    schedule: List[int]
    p: float = 2.0
    young: Optional[YoungSpec] = None
    paths: int = 1
    grid_size: Optional[int] = None
    required_fraction: float = 0.9
    tolerance: float = 0.02


class RearrangementSection(StrictModel):
    cells: int = 129
    half_width: float = 1.0
    center: List[float] = [0.35, 0.2]
    radius: float = 0.3
    grid_file: Optional[str] = None
    schedule: Literal["axis", "axis+rotation"] = "axis+rotation"
    compare_schedules: bool = False
    tol: float = 0.02
    max_iter: int = 200


class BllSection(StrictModel):
    trials: int = 100
    N: int = 2
    M: int = 3
    h: float = 0.005
    cells: Optional[int] = None
    max_relative_error: float = 0.01


class KanterSection(StrictModel):
    trials: int = 5
    polygons: int = 50
    cube: bool = True
    cells: Optional[int] = None


class SmallBallSection(StrictModel):
    eps: List[float]
    c: Optional[float] = None
    confidence: float = 0.99
    marginal: bool = False
    k: int = 1


class MAdditionSection(StrictModel):
    N1: int
    N2: int
    j: int
    M: CoefficientSpec
    K: DensitySpec
    L: DensitySpec


class ExperimentConfig(StrictModel):
    """A complete experiment: kind, seed, sizes and the kind's own section."""
    kind: Literal["dominance", "lln", "rearrangement", "bll", "kanter", "opnorm", "smallball", "maddition"]
    seed: Optional[int] = None
    name: str = ""
    m: int = 10_000
    delta: float = 0.01
    n: Optional[int] = None
    N: Optional[int] = None
    direction: Optional[Literal["A>=B", "A<=B"]] = None
    compare_z: bool = False
    expectation: bool = False
    workers: Optional[int] = None
    output_dir: Optional[str] = None
    density: Optional[DensitySpec] = None
    densities: Optional[List[DensitySpec]] = None
    coefficients: Optional[CoefficientSpec] = None
    functional: Optional[FunctionalConfig] = None
    norm: Optional[NormSpec] = None
    lln: Optional[LlnSection] = None
    rearrangement: Optional[RearrangementSection] = None
    bll: Optional[BllSection] = None
    kanter: Optional[KanterSection] = None
    smallball: Optional[SmallBallSection] = None
    maddition: Optional[MAdditionSection] = None

    @property
    def digest(self) -> str:
        """xxh64 of the canonical JSON of the validated config, seed included."""
        return xxhash.xxh64(self.model_dump_json()).hexdigest()

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude_none=True)

    def column_count(self) -> Optional[int]:
        if self.densities is not None:
            return sum(d.count for d in self.densities)
        return self.N

    def build_densities(self, base_dir: str = ".") -> List[Density]:
        """Column densities, expanding `count` repetitions."""
        if self.densities is not None:
            fs = []
            for spec in self.densities:
                built = spec.build(self.n, base_dir)
                fs.extend([built] * spec.count)
            return fs
        return [self.density.build(self.n, base_dir)] * self.N

    def build_functional(self) -> FunctionalSpec:
        f = self.functional
        nu = None
        if f.measure is not None:
            nu = RadialMeasure(f.measure.kind, self.n, f.measure.sigma)
        C = self.coefficients.build(self.N) if self.coefficients is not None else None
        return FunctionalSpec(f.kind, coefficients=C, ball_radius=f.ball_radius, j=f.j, nu=nu,
                              inner_samples=f.inner_samples)

    def default_direction(self) -> str:
        if self.direction is not None:
            return self.direction
        # polar measures reverse the order
        if self.functional is not None and self.functional.kind == "polar_measure":
            return "A<=B"
        if self.functional is not None and self.functional.ball_radius is not None:
            return "A<=B"
        return "A>=B"

    def reduced(self) -> "ExperimentConfig":
        """Smaller replica counts, trials and grids for smoke runs."""
        update: Dict[str, Any] = {"m": min(self.m, REDUCED_REPLICAS)}
        if self.functional is not None:
            update["functional"] = self.functional.model_copy(
                update={"inner_samples": min(self.functional.inner_samples, REDUCED_INNER_SAMPLES)})
        if self.lln is not None:
            update["lln"] = self.lln.model_copy(update={
                "schedule": [min(s, REDUCED_SCHEDULE_MAX) for s in self.lln.schedule],
                "paths": min(self.lln.paths, REDUCED_TRIALS),
                "grid_size": min(self.lln.grid_size or 512, 512),
            })
        if self.rearrangement is not None:
            update["rearrangement"] = self.rearrangement.model_copy(update={
                "cells": min(self.rearrangement.cells, REDUCED_CELLS),
                "max_iter": min(self.rearrangement.max_iter, REDUCED_ITERATIONS),
            })
        if self.bll is not None:
            update["bll"] = self.bll.model_copy(update={
                "trials": min(self.bll.trials, REDUCED_TRIALS), "h": max(self.bll.h, 0.02), "cells": 60})
        if self.kanter is not None:
            update["kanter"] = self.kanter.model_copy(update={
                "trials": min(self.kanter.trials, REDUCED_TRIALS),
                "polygons": min(self.kanter.polygons, REDUCED_POLYGONS), "cells": 60})
        if self.norm is not None and self.norm.volume_ratio_samples:
            update["norm"] = self.norm.model_copy(update={
                "volume_ratio_samples": min(self.norm.volume_ratio_samples, REDUCED_VOLUME_RATIO_SAMPLES)})
        return self.model_copy(update=update)


# ==================== VALIDATION ====================

def _pydantic_messages(error: ValidationError) -> List[str]:
    messages = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        messages.append(f"{location}: {item['msg']}")
    return messages


def _dimension_problems(config: ExperimentConfig) -> List[str]:
    errors = []
    n, N = config.n, config.N
    if n is not None and not 1 <= n <= MAX_DIMENSION:
        errors.append(f"n={n} outside [1, {MAX_DIMENSION}]")
    if N is not None and not 1 <= N <= MAX_COLUMNS:
        errors.append(f"N={N} outside [1, {MAX_COLUMNS}]")
    if config.m < 100:
        errors.append(f"m={config.m} below the minimum of 100 replicas")
    if not 0 < config.delta < 1:
        errors.append(f"delta={config.delta} outside (0, 1)")
    return errors


def _column_problems(config: ExperimentConfig, need_n: bool = True) -> List[str]:
    errors = []
    if need_n and config.n is None:
        errors.append("n required")
    if config.density is None and config.densities is None:
        errors.append("density or densities required")
    if config.density is not None and config.densities is not None:
        errors.append("give either density or densities, not both")
    if config.densities is not None:
        count = config.column_count()
        if config.N is not None and count != config.N:
            errors.append(f"densities give {count} columns, N={config.N}")
        for k, spec in enumerate(config.densities):
            errors.extend(f"densities.{k}: {p}" for p in spec.problems(config.n))
    elif config.N is None:
        errors.append("N required")
    if config.density is not None:
        errors.extend(f"density: {p}" for p in config.density.problems(config.n))
    for spec in ([config.density] if config.density else []) + (config.densities or []):
        if spec.type == "point":
            errors.append("point densities are only allowed in maddition experiments")
    return errors


def _dominance_problems(config: ExperimentConfig) -> List[str]:
    errors = _column_problems(config)
    f = config.functional
    if f is None:
        return errors + ["functional required"]
    if f.kind not in FUNCTIONAL_KINDS or f.kind == "operator_norm":
        errors.append(f"functional.kind '{f.kind}' not available for dominance runs")
    if (config.coefficients is None) == (f.ball_radius is None):
        errors.append("exactly one of coefficients or functional.ball_radius defines the body")
    if config.coefficients is not None:
        dim = config.coefficients.dimension(config.column_count())
        if dim is not None and config.column_count() is not None and dim != config.column_count():
            errors.append(f"coefficient set lives in R^{dim}, N={config.column_count()}")
    if f.kind == "intrinsic" and (f.j is None or config.n is None or not 1 <= f.j <= config.n):
        errors.append(f"functional.j={f.j} outside [1, n]")
    if f.kind == "polar_measure":
        if f.measure is None:
            errors.append("polar_measure needs functional.measure")
        if config.coefficients is not None and not config.coefficients.symmetric:
            errors.append("polar_measure requires a symmetric coefficient set")
    return errors


def _norm_problems(config: ExperimentConfig) -> List[str]:
    if config.norm is None:
        return ["norm required"]
    errors = []
    N = config.column_count()
    if config.norm.volume_ratio_samples < 0:
        errors.append("norm.volume_ratio_samples must be >= 0")
    elif config.norm.volume_ratio_samples and config.kind == "opnorm":
        if config.n is not None and N is not None and config.n * N > MAX_VOLUME_RATIO_DIMENSION:
            errors.append(f"volume ratio limited to nN <= {MAX_VOLUME_RATIO_DIMENSION}, got {config.n * N}")
    if config.norm.kind == "lq":
        if config.norm.q < 1:
            errors.append(f"norm.q={config.norm.q} below 1")
        if math.isinf(config.norm.q) and N is not None and N > SIGN_ENUMERATION_CAP:
            errors.append(f"sign enumeration cap {SIGN_ENUMERATION_CAP}: N={N} with q=inf")
    elif not config.norm.vertices:
        errors.append("vball norm needs vertices")
    elif N is not None and len(config.norm.vertices[0]) != N:
        errors.append(f"norm vertices live in R^{len(config.norm.vertices[0])}, N={N}")
    return errors


def _kind_problems(config: ExperimentConfig) -> List[str]:
    kind = config.kind
    if kind == "dominance":
        return _dominance_problems(config)
    if kind == "opnorm":
        return _column_problems(config) + _norm_problems(config)
    if kind == "smallball":
        section = config.smallball
        if section is None:
            return ["smallball section required"]
        errors = [f"smallball.eps value {e} outside (0, 1]" for e in section.eps if not 0 < e <= 1]
        if not section.eps:
            errors.append("smallball.eps must be nonempty")
        if section.marginal:
            errors.extend(_column_problems(config, need_n=False))
            if config.n not in (None, 1):
                errors.append("marginal small-ball coordinates are one-dimensional (n=1)")
            N = config.column_count()
            if N is not None and not 1 <= section.k <= N:
                errors.append(f"smallball.k={section.k} outside [1, N]")
            return errors
        if config.n is None or config.N is None:
            errors.append("n and N required")
        return errors + _norm_problems(config)
    if kind == "lln":
        section = config.lln
        if section is None:
            return ["lln section required"]
        errors = [f"lln.body: {p}" for p in section.body.problems(config.n)]
        if any(s < 1 for s in section.schedule):
            errors.append("lln.schedule entries must be positive")
        if section.mode == "Zp" and section.p < 1:
            errors.append(f"lln.p={section.p} below 1")
        if section.mode == "Orlicz" and section.young is None:
            errors.append("Orlicz mode needs lln.young")
        return errors
    if kind == "maddition":
        section = config.maddition
        if section is None:
            return ["maddition section required"]
        errors = []
        if config.n is None:
            errors.append("n required")
        if section.M.dimension(2) != 2:
            errors.append("maddition.M must live in R^2")
        errors.extend(f"maddition.K: {p}" for p in section.K.problems(config.n))
        errors.extend(f"maddition.L: {p}" for p in section.L.problems(config.n))
        if config.n is not None and not 1 <= section.j <= config.n:
            errors.append(f"maddition.j={section.j} outside [1, n]")
        if section.N1 < 1 or section.N2 < 1 or section.N1 + section.N2 > MAX_COLUMNS:
            errors.append("maddition.N1 and N2 must be positive with N1 + N2 <= 30")
        return errors
    if kind == "rearrangement":
        section = config.rearrangement or RearrangementSection()
        return [] if section.cells % 2 == 1 else [f"rearrangement.cells={section.cells} must be odd"]
    if kind == "bll":
        section = config.bll or BllSection()
        errors = []
        if section.N > 3:
            errors.append(f"bll.N={section.N} above the quadrature limit 3")
        if not section.N <= section.M <= 4:
            errors.append(f"bll.M={section.M} must lie in [N, 4]")
        return errors
    return []


def validate_config(data: Dict[str, Any]) -> ExperimentConfig:
    """
    Validate a raw config mapping.

    Raises:
        ConfigError: With every problem found
    """
    errors: List[str] = []
    if data.get("seed") is None:
        errors.append("seed required")
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(errors + _pydantic_messages(e)) from e
    errors.extend(_dimension_problems(config))
    errors.extend(_kind_problems(config))
    if errors:
        raise ConfigError(errors)
    logger.debug(f"Validated {config.kind} config with digest {config.digest}")
    return config


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse TOML text into a validated ExperimentConfig.

    Raises:
        ConfigError: If the text is not TOML or the config is invalid
    """
    try:
        data = toml.loads(text)
    except toml.TomlDecodeError as e:
        raise ConfigError([f"invalid TOML: {e}"]) from e
    return validate_config(data)


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as handle:
        return parse_config(handle.read())
