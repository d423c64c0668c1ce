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
Validation Node for the Experiment Workflow
Parses the TOML config, applies the seed override and collects every error.
"""

import logging
import os
import sys

import toml

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from geometry.types import ConfigError
from lab.experiment_config import validate_config
from state import ExperimentState

logger = logging.getLogger(__name__)

EXIT_INVALID = 2


async def validate_experiment(state: ExperimentState) -> ExperimentState:
    """
    Turn config text into a validated ExperimentConfig.

    A seed override replaces the config seed before validation, so a
    config without a seed is valid when an override is given.
    """
    state["current_process"] = "validate"
    try:
        data = toml.loads(state["config_text"])
        if state.get("seed_override") is not None:
            data["seed"] = int(state["seed_override"])
        config = validate_config(data)
        if state.get("reduced"):
            config = config.reduced()
            logger.info("Running with reduced replica counts and grids")
        state["config"] = config
        state["errors"] = []
        state["current_process"] = "execute"
        logger.info(f"Validated {config.kind} experiment (seed {config.seed}, digest {config.digest})")
    except toml.TomlDecodeError as e:
        state["errors"] = [f"invalid TOML: {e}"]
    except ConfigError as e:
        state["errors"] = e.errors
    if state["current_process"] != "execute":
        for message in state["errors"]:
            logger.error(f"Config error: {message}")
        state["exit_code"] = EXIT_INVALID
        state["current_process"] = "error"
    return state
