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
Report Formatter - Final Output Stage
Serializes a finished report as JSON, CSV curves or a plain-text summary.
"""

import logging
from typing import Any, Dict, List, Optional

import orjson
import pandas as pd

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "text")
CSV_FLOAT_FORMAT = "%.17g"
# orjson writes the shortest decimal that parses back to the same double
FLOAT_FORMATS = {"json": "shortest round-trip", "csv": CSV_FLOAT_FORMAT}
JSON_OPTIONS = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_INDENT_2 | orjson.OPT_APPEND_NEWLINE
SUMMARY_KEYS = (
    "direction", "label_a", "label_b", "delta", "threshold", "min_margin", "epsilon_a", "epsilon_b",
    "systematic_a", "systematic_b", "theory_supported", "slope", "exponent", "dkw_epsilon",
    "max_relative_error", "decreasing_fraction", "relative_final_gaps",
)


def _summary_lines(report: Dict[str, Any]) -> List[str]:
    lines = [
        f"verdict:       {report.get('verdict')}",
        f"kind:          {report.get('kind')}",
        f"seed:          {report.get('seed')}",
        f"config digest: {report.get('config_digest')}",
        f"build:         {report.get('build')}",
    ]
    results = report.get("results") or {}
    if results.get("message"):
        lines.append(f"message:       {results['message']}")
    details = results.get("report") or {}
    for key in SUMMARY_KEYS:
        if key in details:
            lines.append(f"{key + ':':<15}{details[key]}")
    violations = details.get("violations")
    if violations:
        shown = ", ".join(f"{a:.6g}" for a in violations[:10])
        more = f" (+{len(violations) - 10} more)" if len(violations) > 10 else ""
        lines.append(f"violations:    {shown}{more}")
    for name, companion in (details.get("companions") or {}).items():
        if isinstance(companion, dict) and "verdict" in companion:
            lines.append(f"{name + ':':<15}{companion['verdict']}")
    lines.append(f"curve rows:    {len(report.get('curves') or [])}")
    lines.append(f"timestamp:     {report.get('timestamp')}")
    return lines


def emit_report(report: Dict[str, Any], fmt: str, columns: Optional[List[str]] = None) -> bytes:
    """
    Serialize a report.

    Args:
        report: Ordered report mapping (curves under "curves")
        fmt: "json", "csv" or "text"
        columns: CSV column order; defaults to the keys of the first curve row

    Returns:
        Encoded bytes; JSON keeps insertion order and shortest round-trip floats,
        CSV writes floats with 17 significant digits
    """
    if fmt == "json":
        return orjson.dumps(report, option=JSON_OPTIONS)
    if fmt == "csv":
        curves = report.get("curves") or []
        if columns is None:
            columns = list(curves[0].keys()) if curves else []
        frame = pd.DataFrame(curves, columns=columns)
        return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT).encode("utf-8")
    if fmt == "text":
        return ("\n".join(_summary_lines(report)) + "\n").encode("utf-8")
    raise ValueError(f"Unknown report format '{fmt}', expected one of {FORMATS}")
