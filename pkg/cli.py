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
Command line entry point.

    stochlab run CONFIG [--seed-override S] [--workers W] [--out DIR] [--reduced]
    stochlab validate CONFIG
    stochlab cookbook list
"""

import glob
import logging
import os
import sys
from typing import Optional

import click
import coloredlogs
import toml
from dotenv import load_dotenv
from tqdm import tqdm

from geometry.types import ConfigError
from lab.experiment_config import ExperimentConfig, load_config
from lab.lab_config import LabOperations
from workflow import run_file

load_dotenv()

logger = logging.getLogger(__name__)

COOKBOOK_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "cookbook")
EXIT_INVALID = 2


def expected_replicas(config: ExperimentConfig) -> Optional[int]:
    """Progress bar total; None when a kind does not report replica progress."""
    if config.kind == "dominance":
        return config.m * (3 if config.compare_z else 2)
    if config.kind == "opnorm":
        return config.m * 3
    if config.kind == "maddition":
        return config.m * 2
    return None


@click.group()
@click.option("--log-level", default=lambda: os.getenv("STOCHLAB_LOG_LEVEL", "INFO"), show_default="INFO",
              help="Logging level (also STOCHLAB_LOG_LEVEL)")
def main(log_level: str):
    """Stochastic convex geometry lab."""
    coloredlogs.install(level=log_level.upper(), fmt="%(asctime)s %(name)s %(levelname)s %(message)s")


@main.command("run")
@click.argument("config_path", metavar="CONFIG", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed-override", type=int, default=None, help="Replace the seed in CONFIG")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes")
@click.option("--out", "output_dir", type=click.Path(file_okay=False), default=None, help="Output directory")
@click.option("--reduced", is_flag=True, help="Smaller replica counts and grids for smoke runs")
def run_command(config_path: str, seed_override: Optional[int], workers: Optional[int],
                output_dir: Optional[str], reduced: bool):
    """Run one experiment and write report.json, curves.csv and summary.txt."""
    total = None
    try:
        config = load_config(config_path)
        total = expected_replicas(config.reduced() if reduced else config)
    except (ConfigError, OSError):
        # the workflow reports these with the right exit code
        pass

    with tqdm(total=total, unit="replica", disable=not sys.stderr.isatty(), leave=False) as bar:
        state = run_file(config_path, seed_override=seed_override, workers=workers, output_dir=output_dir,
                         reduced=reduced, progress=bar.update)

    for message in state.get("errors") or []:
        click.echo(f"error: {message}", err=True)
    result = state.get("result") or {}
    if state.get("artifacts"):
        click.echo(f"{result.get('verdict')}: {result.get('message')}")
        for name, path in state["artifacts"].items():
            click.echo(f"  {name}: {path}")
    sys.exit(state.get("exit_code", 1))


@main.command("validate")
@click.argument("config_path", metavar="CONFIG", type=click.Path(exists=True, dir_okay=False))
def validate_command(config_path: str):
    """Validate CONFIG and print its digest."""
    try:
        config = load_config(config_path)
    except ConfigError as e:
        for message in e.errors:
            click.echo(f"error: {message}", err=True)
        sys.exit(EXIT_INVALID)
    click.echo(f"{config.kind} config OK, digest {config.digest}")


@main.group("cookbook")
def cookbook():
    """Bundled example configs."""


@cookbook.command("list")
def cookbook_list():
    """List the bundled configs with their experiment kind."""
    for path in sorted(glob.glob(os.path.join(COOKBOOK_DIR, "*.toml"))):
        try:
            data = toml.load(path)
        except (toml.TomlDecodeError, OSError) as e:
            logger.warning(f"Skipping {path}: {e}")
            continue
        kind = data.get("kind", "?")
        operation = LabOperations.find_operation(kind) or {}
        click.echo(f"{os.path.basename(path):<28} {kind:<14} {data.get('name', '')}")
        if operation.get("description"):
            click.echo(f"{'':<28} {operation['description']}")


if __name__ == "__main__":
    main()
