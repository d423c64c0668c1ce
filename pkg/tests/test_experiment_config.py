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
"""TOML experiment configs."""

import glob
import math
import os

import pytest

from conftest import COOKBOOK_DIR
from geometry.coefficients import Simplex
from geometry.types import ConfigError
from lab.experiment_config import load_config, parse_config

MINIMAL = """
kind = "dominance"
seed = 7
n = 2
N = 3
m = 500

[density]
type = "uniform"
body = { type = "square" }

[coefficients]
type = "simplex"

[functional]
kind = "intrinsic"
j = 1
"""

OPNORM = """
kind = "opnorm"
seed = 1
n = 2
N = {N}

[density]
type = "gaussian"
sigma = 0.45

[norm]
q = "inf"
"""


def test_minimal_dominance_config():
    config = parse_config(MINIMAL)
    assert config.kind == "dominance"
    assert config.default_direction() == "A>=B"
    assert len(config.build_densities()) == 3
    spec = config.build_functional()
    assert isinstance(spec.coefficients, Simplex)
    assert spec.label == "V_1"


def test_seed_is_required():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace("seed = 7\n", ""))
    assert "seed required" in info.value.errors


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "\ncolour = \"blue\"\n")
    assert any("colour" in message for message in info.value.errors)


def test_all_problems_are_collected():
    text = MINIMAL.replace("m = 500", "m = 10").replace("j = 1", "j = 5")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert len(info.value.errors) == 2


def test_infinite_q_and_sign_enumeration_cap():
    config = parse_config(OPNORM.format(N=4))
    assert math.isinf(config.norm.q)
    with pytest.raises(ConfigError, match="sign enumeration cap 24"):
        parse_config(OPNORM.format(N=30))


def test_invalid_toml():
    with pytest.raises(ConfigError, match="invalid TOML"):
        parse_config("kind = ")


def test_polar_measure_reverses_direction():
    text = MINIMAL.replace('type = "simplex"', 'type = "cube"').replace(
        'kind = "intrinsic"\nj = 1', 'kind = "polar_measure"\nmeasure = { kind = "gaussian" }')
    assert parse_config(text).default_direction() == "A<=B"


def test_polar_measure_needs_symmetric_coefficients():
    text = MINIMAL.replace('kind = "intrinsic"\nj = 1', 'kind = "polar_measure"\nmeasure = { kind = "lebesgue" }')
    with pytest.raises(ConfigError, match="symmetric"):
        parse_config(text)


def test_digest_is_stable_and_seed_sensitive():
    assert parse_config(MINIMAL).digest == parse_config(MINIMAL).digest
    assert parse_config(MINIMAL).digest != parse_config(MINIMAL.replace("seed = 7", "seed = 8")).digest


def test_reduced_config_shrinks_sizes():
    config = parse_config(MINIMAL).reduced()
    assert config.m == 200
    assert config.functional.inner_samples == 4000


@pytest.mark.parametrize("path", sorted(glob.glob(os.path.join(COOKBOOK_DIR, "*.toml"))),
                         ids=os.path.basename)
def test_cookbook_configs_validate(path):
    config = load_config(path)
    assert config.seed is not None


def test_volume_ratio_samples_are_checked_against_dimension_cap():
    text = OPNORM.format(N=4) + "volume_ratio_samples = 1000\n"
    assert parse_config(text).norm.volume_ratio_samples == 1000
    assert parse_config(text.replace("= 1000", "= 500000")).reduced().norm.volume_ratio_samples == 20_000
    with pytest.raises(ConfigError, match="volume ratio limited to nN <= 16"):
        parse_config(OPNORM.format(N=9) + "volume_ratio_samples = 1000\n")
    with pytest.raises(ConfigError, match="volume_ratio_samples must be >= 0"):
        parse_config(text.replace("= 1000", "= -1"))


def test_symmetrization_cookbook_uses_odd_grid():
    config = load_config(os.path.join(COOKBOOK_DIR, "symmetrization.toml"))
    assert config.rearrangement.cells == 129
    assert config.rearrangement.cells % 2 == 1
