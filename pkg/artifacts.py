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
Artifact Store
Assembles report.json, curves.csv and summary.txt for a finished run.

Only the "timestamp" field of report.json depends on wall-clock time; the
rest is a function of the config and seed.
"""

import logging
import os
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from dotenv import load_dotenv

# GitPython must not fail at import when no git executable is installed
os.environ.setdefault("GIT_PYTHON_REFRESH", "quiet")
import git

from lab.experiment_config import ExperimentConfig
from lab.lab_config import LabOperations
from utils.report_formatter import FLOAT_FORMATS, emit_report

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "runs"
EXIT_CODES = {"consistent": 0, "violated": 3, "inconclusive": 4}


def verdict_exit_code(verdict: Optional[str]) -> int:
    """0 consistent, 3 violated, 4 inconclusive."""
    return EXIT_CODES.get(verdict, 1)


class ArtifactStore:
    """
    Writes run artifacts under the output directory
    """

    def __init__(self):
        """Initialize artifact store from the environment"""
        self.default_output_dir = os.getenv("STOCHLAB_OUTPUT_DIR", DEFAULT_OUTPUT_DIR)
        self.default_workers = int(os.getenv("STOCHLAB_WORKERS", "1"))
        self._build: Optional[str] = None
        logger.info("Artifact store initialized")

    @property
    def build(self) -> str:
        """git describe of the checkout, "unknown" outside a repository."""
        if self._build is None:
            try:
                repo = git.Repo(os.path.dirname(os.path.abspath(__file__)), search_parent_directories=True)
                self._build = repo.git.describe("--always", "--dirty", "--tags")
            except (git.exc.InvalidGitRepositoryError, git.exc.NoSuchPathError, git.exc.GitCommandError,
                    git.exc.GitCommandNotFound) as e:
                logger.debug(f"No git build description: {e}")
                self._build = "unknown"
        return self._build

    def assemble(self, config: ExperimentConfig, result: Dict[str, Any],
                 timestamp: Optional[str] = None) -> Dict[str, Any]:
        """Ordered report.json contents; the timestamp is always the last key."""
        return {
            "verdict": result["verdict"],
            "kind": config.kind,
            "seed": config.seed,
            "config_digest": config.digest,
            "build": self.build,
            "float_format": dict(FLOAT_FORMATS),
            "config": config.echo(),
            "results": {"message": result["message"], "report": result["report"]},
            "curves": result["curves"],
            "timestamp": timestamp or datetime.now(timezone.utc).isoformat(),
        }

    def run_directory(self, config: ExperimentConfig, output_dir: Optional[str] = None) -> str:
        name = f"{config.name or config.kind}-{config.digest[:12]}"
        return os.path.join(output_dir or self.default_output_dir, name)

    def write(self, config: ExperimentConfig, result: Dict[str, Any],
              output_dir: Optional[str] = None) -> Dict[str, Any]:
        """
        Write all three artifacts.

        Returns:
            Dict with the assembled report and the artifact paths

        Raises:
            OSError: If the directory or a file cannot be written
        """
        directory = self.run_directory(config, output_dir)
        os.makedirs(directory, exist_ok=True)
        report = self.assemble(config, result)
        paths = {
            "report": os.path.join(directory, "report.json"),
            "curves": os.path.join(directory, "curves.csv"),
            "summary": os.path.join(directory, "summary.txt"),
        }
        with open(paths["report"], "wb") as handle:
            handle.write(emit_report(report, "json"))
        with open(paths["curves"], "wb") as handle:
            handle.write(emit_report(report, "csv", LabOperations.columns(config.kind) or None))
        with open(paths["summary"], "wb") as handle:
            handle.write(emit_report(report, "text"))
        logger.info(f"Wrote report to {directory}")
        return {"report": report, "paths": paths}


# Global artifact store instance
artifact_store = ArtifactStore()
