"""Serialized experiment output.

Reals are written with 17 significant digits (enough to round-trip a
double) and complex numbers as ``"re,im"`` strings, identically in JSON and
CSV.  Non-finite reals become JSON ``null`` / empty CSV cells.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

__all__ = ["Report", "emit_report", "render", "format_real", "format_value"]

RESULT_COLUMNS = ("predicted", "estimate", "stderr", "residuals", "verdict", "diagnostics")


@dataclass
class Report:
    command: str
    config: dict
    results: list = field(default_factory=list)
    runtime_seconds: Optional[float] = None

    @property
    def passed(self):
        return all(r.get("verdict") != "fail" for r in self.results)


def format_real(x):
    x = float(x) + 0.0  # drops the sign of -0.0
    if not math.isfinite(x):
        return None
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def format_value(v):
    """Scalar to its serialized text (``None`` for missing/non-finite)."""
    if v is None:
        return None
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, complex):
        re, im = format_real(v.real), format_real(v.imag)
        return None if re is None or im is None else f"{re},{im}"
    if isinstance(v, float):
        return format_real(v)
    return str(v)


def _json(obj):
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        text = format_value(obj)
        return "null" if text is None else text
    if isinstance(obj, complex):
        text = format_value(obj)
        return "null" if text is None else json.dumps(text)
    return json.dumps(str(obj))


def _cell(v):
    if isinstance(v, dict):
        return ";".join(f"{k}={_cell(x)}" for k, x in v.items())
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    text = format_value(v)
    return "" if text is None else text


def render(report, fmt="json"):
    if fmt == "json":
        doc = {
            "command": report.command,
            "config": report.config,
            "results": report.results,
            "runtime_seconds": report.runtime_seconds,
        }
        return _json(doc) + "\n"
    if fmt == "csv":
        key = "z"
        if report.results:
            key = next(iter(report.results[0]))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("command", key) + RESULT_COLUMNS)
        for row in report.results:
            w.writerow([report.command, _cell(row.get(key))]
                       + [_cell(row.get(c)) for c in RESULT_COLUMNS])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report, fmt="json", out=None):
    """Write ``report`` to ``out`` (a path) or standard output."""
    text = render(report, fmt)
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc.strerror}") from exc
