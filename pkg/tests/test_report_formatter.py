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
"""Report serialization."""

import io

import numpy as np
import orjson
import pandas as pd
import pytest

from utils.report_formatter import emit_report

REPORT = {
    "verdict": "consistent",
    "kind": "dominance",
    "seed": 3,
    "config_digest": "abc",
    "build": "unknown",
    "config": {"kind": "dominance"},
    "results": {"message": "ok", "report": {"threshold": 0.1, "violations": []}},
    "curves": [
        {"alpha": 0.1, "survA": 1.0, "survB": 0.9},
        {"alpha": 1.0 / 3.0, "survA": 0.5, "survB": np.float64(0.25)},
    ],
    "timestamp": "2025-01-01T00:00:00+00:00",
}


def test_json_keeps_key_order_and_floats():
    data = orjson.loads(emit_report(REPORT, "json"))
    assert list(data) == list(REPORT)
    assert data["curves"][1]["alpha"] == 1.0 / 3.0


def test_empty_curves_still_give_valid_outputs():
    report = dict(REPORT, curves=[])
    assert orjson.loads(emit_report(report, "json"))["curves"] == []
    assert emit_report(report, "csv", ["alpha", "survA"]).decode().strip() == "alpha,survA"


def test_csv_rows_and_precision():
    frame = pd.read_csv(io.BytesIO(emit_report(REPORT, "csv")))
    assert list(frame.columns) == ["alpha", "survA", "survB"]
    assert len(frame) == 2
    assert frame["alpha"][1] == 1.0 / 3.0


def test_text_summary_lists_verdict():
    text = emit_report(REPORT, "text").decode()
    assert text.startswith("verdict:       consistent")
    assert "curve rows:    2" in text


def test_unknown_format():
    with pytest.raises(ValueError):
        emit_report(REPORT, "xml")
