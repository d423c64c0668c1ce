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
Execution Node for the Experiment Workflow
Runs a validated config through the lab client.
"""

import logging
import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from artifacts import artifact_store
from lab.lab_client import lab_client
from state import ExperimentState

logger = logging.getLogger(__name__)

# failures that mean the config or a theorem hypothesis was wrong
INVALID_INPUT_ERRORS = ("ConfigError", "HypothesisError", "DimensionError", "CoefficientSetError")
EXIT_UNEXPECTED = 1
EXIT_INVALID = 2


async def execute_experiment(state: ExperimentState) -> ExperimentState:
    """Dispatch to the experiment named by the config kind."""
    state["current_process"] = "execute"
    config = state["config"]
    result = lab_client.run_experiment(
        config,
        workers=max(1, int(state.get("workers") or config.workers or artifact_store.default_workers)),
        base_dir=state.get("base_dir") or ".",
        progress=state.get("progress"),
    )
    state["result"] = result
    if result["success"]:
        logger.info(result["message"])
        state["current_process"] = "emit"
    else:
        state["errors"] = [result["message"]]
        state["exit_code"] = EXIT_INVALID if result.get("error") in INVALID_INPUT_ERRORS else EXIT_UNEXPECTED
        state["current_process"] = "error"
    return state
