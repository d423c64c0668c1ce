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
from typing import Any, Callable, Dict, List, Optional, TypedDict


class ExperimentState(TypedDict):
    config_text: str                  # raw TOML
    base_dir: str                     # relative grid files resolve here
    seed_override: Optional[int]
    workers: Optional[int]           # overrides config and STOCHLAB_WORKERS
    output_dir: Optional[str]        # overrides config and STOCHLAB_OUTPUT_DIR
    reduced: bool                     # smoke-run sizes
    config: Optional[Any]             # validated ExperimentConfig
    result: Dict[str, Any]            # LabClient response
    report: Dict[str, Any]            # report.json contents
    artifacts: Dict[str, str]         # artifact name -> path
    errors: List[str]
    exit_code: int
    current_process: str
    progress: Optional[Callable[[int], None]]
