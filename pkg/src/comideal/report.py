"""Run reports: a list of named checks plus free-form data.

A report is a plain dict

    {"command": ..., "config": {...}, "checks": [{"name", "pass", "detail"}], "data": {...}}

serialised with sorted keys so identical runs give identical bytes.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .exactseq import Dyadic, format_int

__all__ = ["Report", "to_jsonable", "dumps", "render_table", "ReportError"]


class ReportError(ValueError):
    """The object is not a well-formed report."""


def to_jsonable(x):
    """Exact numbers become strings, numpy scalars and arrays plain values."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, int):
        return format_int(x) if abs(x) >= 1 << 53 else x
    if isinstance(x, (Dyadic, Fraction)):
        return str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        return f if math.isfinite(f) else str(f)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot serialise {type(x).__name__}")


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.checks: list[dict] = []
        self.data: dict = {}

    def check(self, name: str, ok: bool, detail=None) -> bool:
        self.checks.append({"name": name, "pass": bool(ok), "detail": detail})
        return bool(ok)

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "checks": self.checks,
            "data": self.data,
            "failed": sum(not c["pass"] for c in self.checks),
        }


def dumps(report: dict | Report) -> str:
    d = report.as_dict() if isinstance(report, Report) else report
    return json.dumps(to_jsonable(d), sort_keys=True, indent=2) + "\n"


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return json.dumps(to_jsonable(x), sort_keys=True, separators=(",", ":"))


def render_table(report: dict | Report) -> str:
    """Aligned ``check | pass | detail`` table of the report's checks."""
    d = report.as_dict() if isinstance(report, Report) else report
    checks = d.get("checks") if isinstance(d, dict) else None
    if not isinstance(checks, list):
        raise ReportError("report has no check list")
    rows = [("check", "pass", "detail")]
    for c in checks:
        if not isinstance(c, dict) or "name" not in c or "pass" not in c:
            raise ReportError(f"malformed check entry {c!r}")
        rows.append((str(c["name"]), "yes" if c["pass"] else "NO", _cell(c.get("detail"))))
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    lines = [f"{a:<{w0}}  {b:<{w1}}  {c}".rstrip() for a, b, c in rows]
    return "\n".join(lines) + "\n"
