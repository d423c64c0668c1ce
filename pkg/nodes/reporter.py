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
Report Node for the Experiment Workflow
Writes the run artifacts and turns the verdict into an exit code.
"""

import logging
import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from artifacts import artifact_store, verdict_exit_code
from state import ExperimentState

logger = logging.getLogger(__name__)

EXIT_IO = 1


async def emit_artifacts(state: ExperimentState) -> ExperimentState:
    state["current_process"] = "emit"
    try:
        config = state["config"]
        output_dir = state.get("output_dir") or config.output_dir or None
        written = artifact_store.write(config, state["result"], output_dir)
        state["report"] = written["report"]
        state["artifacts"] = written["paths"]
        state["exit_code"] = verdict_exit_code(state["result"]["verdict"])
        state["current_process"] = "done"
    except OSError as e:
        logger.error(f"Could not write artifacts: {e}")
        state["errors"] = [f"I/O failure: {e}"]
        state["exit_code"] = EXIT_IO
        state["current_process"] = "error"
    return state
