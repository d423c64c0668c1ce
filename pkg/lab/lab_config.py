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
Lab Operations Configuration

This module defines every experiment kind the lab runs, the sections its
config needs and the curve columns it emits.
"""

from typing import Any, Dict, List, Optional


class LabOperations:
    """
    Centralized definition of all experiment kinds available in the lab.
    """

    # ==================== DOMINANCE EXPERIMENTS ====================
    DOMINANCE = {
        "dominance": {
            "description": "Survival curves of a body functional for X against X* (and Z)",
            "parameters": ["n", "N", "m", "delta", "density | densities", "coefficients", "functional",
                           "direction = auto", "compare_z = false", "expectation = false"],
            "columns": ["alpha", "survivalA", "survivalB", "margin"],
            "example": "cookbook/simplex_dominance.toml",
        },
        "maddition": {
            "description": "V_j of M-additions of random hulls against the rearranged ensemble",
            "parameters": ["n", "m", "delta", "maddition.N1", "maddition.N2", "maddition.j",
                           "maddition.M", "maddition.K", "maddition.L"],
            "columns": ["alpha", "survivalA", "survivalB", "margin"],
            "example": "cookbook/m_addition.toml",
        },
        "lln": {
            "description": "Distance of K_N or Z_{p,N}(K) to its limit along an N schedule",
            "parameters": ["n", "lln.mode", "lln.body", "lln.schedule", "lln.p", "lln.young", "lln.paths"],
            "columns": ["path", "N", "distance"],
            "example": "cookbook/lln_hull.toml",
        },
    }

    # ==================== REARRANGEMENT EXPERIMENTS ====================
    REARRANGEMENT = {
        "rearrangement": {
            "description": "Iterated Steiner symmetrization of a grid function towards its rearrangement",
            "parameters": ["rearrangement.cells", "rearrangement.center", "rearrangement.radius",
                           "rearrangement.schedule", "rearrangement.tol", "rearrangement.max_iter"],
            "columns": ["schedule", "step", "distance", "resampled"],
            "example": "cookbook/symmetrization.toml",
        },
        "bll": {
            "description": "Randomized quadrature instances of the BLL inequality",
            "parameters": ["bll.trials", "bll.N", "bll.M", "bll.h"],
            "columns": ["instance", "lhs", "rhs", "error", "holds"],
            "example": "cookbook/bll.toml",
        },
        "kanter": {
            "description": "Peakedness margins for Kanter products and cube domination",
            "parameters": ["kanter.trials", "kanter.polygons", "kanter.cube"],
            "columns": ["check", "trial", "body", "margin", "error"],
            "example": "cookbook/kanter.toml",
        },
    }

    # ==================== OPERATOR NORM EXPERIMENTS ====================
    OPERATOR_NORM = {
        "opnorm": {
            "description": "Lower-tail chain ||X|| <= ||X*|| <= ||Z|| for ||X : E -> l_2^n||",
            "parameters": ["n", "N", "m", "delta", "density | densities", "norm", "norm.volume_ratio_samples"],
            "columns": ["alpha", "survivalA", "survivalB", "margin"],
            "example": "cookbook/operator_norm.toml",
        },
        "smallball": {
            "description": "Small-ball curves of ||Z|| or of random marginals against their bounds",
            "parameters": ["n", "N", "m", "norm", "smallball.eps", "smallball.c",
                           "smallball.marginal", "smallball.k"],
            "columns": ["eps", "pX", "pZ", "bound", "wilsonLo", "wilsonHi"],
            "example": "cookbook/marginal_small_ball.toml",
        },
    }

    @classmethod
    def get_all_operations(cls) -> Dict[str, Dict]:
        """Get all experiment kinds organized by category"""
        return {
            "dominance": cls.DOMINANCE,
            "rearrangement": cls.REARRANGEMENT,
            "operator_norm": cls.OPERATOR_NORM,
        }

    @classmethod
    def get_operation_list(cls) -> List[str]:
        """Get flat list of all experiment kinds"""
        operations = []
        for category in cls.get_all_operations().values():
            operations.extend(category.keys())
        return operations

    @classmethod
    def find_operation(cls, operation_name: str) -> Optional[Dict[str, Any]]:
        """Find experiment details by kind"""
        for category_name, category in cls.get_all_operations().items():
            if operation_name in category:
                result = category[operation_name].copy()
                result["category"] = category_name
                return result
        return None

    @classmethod
    def columns(cls, operation_name: str) -> List[str]:
        details = cls.find_operation(operation_name)
        return list(details["columns"]) if details else []
