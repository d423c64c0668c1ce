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
"""Empirical distributions, DKW bands and dominance verdicts."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from geometry.types import LabError
from models.empirical import (
    EmpiricalDistribution,
    alpha_grid,
    check_dominance,
    combine_verdicts,
    dkw_epsilon,
    expectation_check,
    wilson_interval,
)

BASE = np.linspace(0.0, 1.0, 2000)


def test_dkw_epsilon_value():
    assert_allclose(dkw_epsilon(20_000, 0.01), math.sqrt(math.log(200.0) / 40_000.0))


def test_needs_enough_samples():
    with pytest.raises(LabError):
        EmpiricalDistribution(np.arange(10.0))


def test_survival_and_lower_tail_are_complementary():
    d = EmpiricalDistribution(BASE)
    alpha = np.array([-1.0, 0.25, 2.0])
    assert_allclose(d.survival(alpha) + d.lower_tail(alpha), 1.0)
    assert_allclose(d.survival(np.array([-1.0, 2.0])), [1.0, 0.0])


def test_alpha_grid_is_capped():
    d = EmpiricalDistribution(BASE)
    assert alpha_grid(d, EmpiricalDistribution(BASE + 0.001)).size <= 512


def test_shifted_distribution_dominates():
    report = check_dominance(EmpiricalDistribution(BASE + 0.2, label="A"), EmpiricalDistribution(BASE, label="B"))
    assert report.verdict == "consistent"
    assert report.violations == []
    assert len(report.curves()) == report.alpha.size


def test_reversed_direction_is_violated():
    report = check_dominance(EmpiricalDistribution(BASE + 0.2), EmpiricalDistribution(BASE), "A<=B")
    assert report.verdict == "violated"
    assert report.violations


def test_systematic_band_makes_crossing_inconclusive():
    dA = EmpiricalDistribution(BASE - 0.2, systematic=0.3)
    report = check_dominance(dA, EmpiricalDistribution(BASE))
    assert report.verdict == "inconclusive"


def test_identical_samples_are_consistent_both_ways():
    d = EmpiricalDistribution(BASE)
    assert check_dominance(d, d, "A>=B").verdict == "consistent"
    assert check_dominance(d, d, "A<=B").verdict == "consistent"


def test_bad_direction_rejected():
    d = EmpiricalDistribution(BASE)
    with pytest.raises(LabError):
        check_dominance(d, d, "A>B")


def test_report_dict_carries_threshold():
    report = check_dominance(EmpiricalDistribution(BASE), EmpiricalDistribution(BASE))
    data = report.to_dict()
    assert_allclose(data["threshold"], 2.0 * dkw_epsilon(2000, 0.01))
    assert data["distribution_a"]["m"] == 2000


def test_expectation_check_ordering():
    assert expectation_check(EmpiricalDistribution(BASE + 0.1), EmpiricalDistribution(BASE))["passes"]
    result = expectation_check(EmpiricalDistribution(BASE), EmpiricalDistribution(BASE + 0.5))
    assert result["verdict"] == "violated"


def test_combine_verdicts_priority():
    assert combine_verdicts(["consistent", "inconclusive"]) == "inconclusive"
    assert combine_verdicts(["inconclusive", "violated"]) == "violated"
    assert combine_verdicts([]) == "consistent"


def test_wilson_interval_covers_estimate():
    lo, hi = wilson_interval(30, 1000, 0.99)
    assert lo < 0.03 < hi


def test_digest_depends_on_config():
    assert EmpiricalDistribution(BASE, "a").digest != EmpiricalDistribution(BASE, "b").digest
