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
"""End-to-end runs through the validate -> execute -> emit graph."""

import math
import os

import orjson
import pandas as pd
from click.testing import CliRunner

from cli import expected_replicas, main
from lab.experiment_config import parse_config
from workflow import run

# half perimeter of hulls in a long thin rectangle against the area-one disk
LONG_RECTANGLE = """
kind = "dominance"
name = "long-rectangle"
seed = 11
n = 2
N = 3
m = 300

[density]
type = "uniform"
body = { type = "rectangle", width = 4.0, height = 0.25 }

[coefficients]
type = "simplex"

[functional]
kind = "intrinsic"
j = 1
"""


def _report(state):
    with open(state["artifacts"]["report"], "rb") as handle:
        return orjson.loads(handle.read())


def test_consistent_run_writes_artifacts(tmp_path):
    state = run(LONG_RECTANGLE, output_dir=str(tmp_path))
    assert state["exit_code"] == 0
    assert set(state["artifacts"]) == {"report", "curves", "summary"}
    report = _report(state)
    assert report["verdict"] == "consistent"
    assert list(report)[-1] == "timestamp"
    curves = pd.read_csv(state["artifacts"]["curves"])
    assert len(curves) == len(report["curves"])
    assert os.path.getsize(state["artifacts"]["summary"]) > 0


def test_reversed_direction_is_violated(tmp_path):
    state = run(LONG_RECTANGLE.replace("m = 300", "m = 300\ndirection = \"A<=B\""), output_dir=str(tmp_path))
    assert state["exit_code"] == 3
    assert _report(state)["verdict"] == "violated"


def test_reports_repeat_except_timestamp(tmp_path):
    first = _report(run(LONG_RECTANGLE, output_dir=str(tmp_path / "a")))
    second = _report(run(LONG_RECTANGLE, output_dir=str(tmp_path / "b")))
    first.pop("timestamp")
    second.pop("timestamp")
    assert first == second


def test_seed_override_changes_digest(tmp_path):
    state = run(LONG_RECTANGLE, seed_override=12, output_dir=str(tmp_path))
    assert state["config"].seed == 12
    assert state["config"].digest != parse_config(LONG_RECTANGLE).digest


def test_invalid_config_exits_with_two(tmp_path):
    state = run(LONG_RECTANGLE.replace("seed = 11\n", ""), output_dir=str(tmp_path))
    assert state["exit_code"] == 2
    assert "seed required" in state["errors"]
    assert not os.listdir(tmp_path)


def test_hypothesis_failure_exits_with_two(tmp_path):
    text = LONG_RECTANGLE.replace("m = 300", "m = 300\ncompare_z = true").replace(
        'type = "uniform"\nbody = { type = "rectangle", width = 4.0, height = 0.25 }',
        'type = "gaussian"\nsigma = 0.1')
    state = run(text, output_dir=str(tmp_path))
    assert state["exit_code"] == 2


def test_expected_replicas():
    config = parse_config(LONG_RECTANGLE)
    assert expected_replicas(config) == 600


# ==================== CLI ====================

def test_cli_validate(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(LONG_RECTANGLE)
    result = CliRunner().invoke(main, ["validate", str(path)])
    assert result.exit_code == 0
    assert "dominance config OK" in result.output


def test_cli_validate_reports_errors(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(LONG_RECTANGLE.replace("j = 1", "j = 9"))
    result = CliRunner().invoke(main, ["validate", str(path)])
    assert result.exit_code == 2


def test_cli_run_exit_code(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(LONG_RECTANGLE)
    result = CliRunner().invoke(main, ["run", str(path), "--out", str(tmp_path / "runs")])
    assert result.exit_code == 0
    assert "consistent" in result.output


def test_cli_cookbook_list():
    result = CliRunner().invoke(main, ["cookbook", "list"])
    assert result.exit_code == 0
    assert "simplex_dominance.toml" in result.output
    assert "opnorm" in result.output


OPNORM_WITH_RATIO = """
kind = "opnorm"
name = "opnorm-ratio"
seed = 5
n = 1
N = 2
m = 500

[density]
type = "gaussian"
sigma = 0.45

[norm]
q = 2.0
{ratio}
"""


def test_opnorm_reports_volume_ratio_without_changing_verdict(tmp_path):
    plain = _report(run(OPNORM_WITH_RATIO.format(ratio=""), output_dir=str(tmp_path / "plain")))
    with_ratio = _report(run(OPNORM_WITH_RATIO.format(ratio="volume_ratio_samples = 20000"),
                             output_dir=str(tmp_path / "ratio")))
    companion = with_ratio["results"]["report"]["companions"]["volume_ratio"]
    # the 1 x 2 operator ball is the unit disk
    assert math.isclose(companion["volume"], math.pi)
    assert math.isclose(companion["ratio"], math.sqrt(2.0 * math.pi))
    assert "volume_ratio" not in plain["results"]["report"]["companions"]
    assert with_ratio["verdict"] == plain["verdict"]


def test_report_records_float_formats(tmp_path):
    report = _report(run(LONG_RECTANGLE, output_dir=str(tmp_path)))
    assert report["float_format"] == {"json": "shortest round-trip", "csv": "%.17g"}
