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
Experiment workflow: validate -> execute -> emit, with every failure routed
to END carrying its exit code.
"""

import asyncio
import logging
import os
from typing import Callable, Optional

from langgraph.graph import END, StateGraph

from nodes.executor import execute_experiment
from nodes.reporter import emit_artifacts
from nodes.validator import validate_experiment
from state import ExperimentState

logger = logging.getLogger(__name__)


def route_by_current_process(state: ExperimentState) -> str:
    process = state.get("current_process", "")
    if process in ("execute", "emit"):
        return process
    return "end"


workflow = StateGraph(ExperimentState)

workflow.add_node("validate", validate_experiment)
workflow.add_node("execute", execute_experiment)
workflow.add_node("emit", emit_artifacts)

workflow.set_entry_point("validate")

workflow.add_conditional_edges(
    "validate",
    route_by_current_process,
    {
        "execute": "execute",
        "end": END,
    }
)

workflow.add_conditional_edges(
    "execute",
    route_by_current_process,
    {
        "emit": "emit",
        "end": END,
    }
)

workflow.add_edge("emit", END)

graph = workflow.compile(
    debug=False,
    checkpointer=None,
    store=None,
)


def initial_state(config_text: str, base_dir: str = ".", seed_override: Optional[int] = None,
                  workers: Optional[int] = None, output_dir: Optional[str] = None, reduced: bool = False,
                  progress: Optional[Callable[[int], None]] = None) -> ExperimentState:
    return {
        "config_text": config_text,
        "base_dir": base_dir,
        "seed_override": seed_override,
        "workers": workers,
        "output_dir": output_dir,
        "reduced": reduced,
        "config": None,
        "result": {},
        "report": {},
        "artifacts": {},
        "errors": [],
        "exit_code": 1,
        "current_process": "",
        "progress": progress,
    }


async def run_async(state: ExperimentState) -> ExperimentState:
    return await graph.ainvoke(state)


def run(config_text: str, base_dir: str = ".", seed_override: Optional[int] = None,
        workers: Optional[int] = None, output_dir: Optional[str] = None, reduced: bool = False,
        progress: Optional[Callable[[int], None]] = None) -> ExperimentState:
    """
    Run one experiment config end to end.

    Returns:
        Final state; "exit_code" follows 0 consistent, 1 I/O or unexpected,
        2 invalid config or hypothesis, 3 violated, 4 inconclusive
    """
    state = initial_state(config_text, base_dir, seed_override, workers, output_dir, reduced, progress)
    return asyncio.run(run_async(state))


def run_file(path: str, **kwargs) -> ExperimentState:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    return run(text, base_dir=os.path.dirname(os.path.abspath(path)), **kwargs)
