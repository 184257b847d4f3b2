"""Verification records and their JSON/CSV serialisation."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

PROVENANCE = ("paper", "trivial", "derived", "measured")


def _plain(obj):
    """Convert numpy containers and scalars to JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = "%.17g" % x
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int | None = 2) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits.

    Non-finite floats are written as the strings ``"inf"``, ``"-inf"``, ``"nan"``.
    """
    obj = _plain(obj)
    out = io.StringIO()
    _write(obj, out, indent, 0)
    return out.getvalue()


def _write(obj, out, indent, level):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{")
        for i, key in enumerate(sorted(obj)):
            out.write((sep if i else "") + pad + json.dumps(key) + ": ")
            _write(obj[key], out, indent, level + 1)
        out.write(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.write("[]")
            return
        out.write("[")
        for i, v in enumerate(obj):
            out.write((sep if i else "") + pad)
            _write(v, out, indent, level + 1)
        out.write(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.write(json.dumps(obj))
    elif isinstance(obj, int):
        out.write(str(obj))
    elif isinstance(obj, float):
        if math.isfinite(obj):
            out.write(format_float(obj))
        else:
            out.write(json.dumps("nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")))
    else:
        out.write(json.dumps(obj))


def digest(obj) -> str:
    """sha256 over the canonical compact JSON of ``obj``."""
    return hashlib.sha256(dumps(obj, indent=None).encode()).hexdigest()


@dataclass
class VerificationReport:
    """One check's outcome.

    ``measured`` maps names to reals, ``provenance`` tags the reference value
    behind each name (paper | trivial | derived | measured). A failing report
    must carry at least one witness.
    """

    check: str
    passed: bool
    measured: dict[str, float] = field(default_factory=dict)
    tolerance: float = 0.0
    provenance: dict[str, str] = field(default_factory=dict)
    witnesses: dict[str, Any] = field(default_factory=dict)
    inputs_digest: str = ""
    details: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.measured = {k: float(v) for k, v in self.measured.items()}
        for tag in self.provenance.values():
            if tag not in PROVENANCE:
                raise ValueError(f"unknown provenance tag {tag!r}")
        if not self.passed and not self.witnesses:
            raise ValueError(f"failing report {self.check!r} carries no witness")

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "check": self.check,
            "passed": self.passed,
            "measured": self.measured,
            "tolerance": float(self.tolerance),
            "provenance": self.provenance,
            "witnesses": _plain(self.witnesses),
            "inputs_digest": self.inputs_digest,
            "details": _plain(self.details),
        }
        if timing:
            d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(
            check=d["check"], passed=d["passed"], measured=d.get("measured", {}),
            tolerance=d.get("tolerance", 0.0), provenance=d.get("provenance", {}),
            witnesses=d.get("witnesses", {}), inputs_digest=d.get("inputs_digest", ""),
            details=d.get("details", {}), wall_time=d.get("wall_time", 0.0),
        )

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.check}"


@contextmanager
def timed():
    """Yield a one-element list that receives the elapsed seconds."""
    box = [0.0]
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = time.perf_counter() - t0


def to_json(reports, config_digest: str = "", timing: bool = False) -> str:
    return dumps({
        "config_digest": config_digest,
        "reports": [r.to_dict(timing) for r in reports],
    }) + "\n"


CSV_COLUMNS = ("check", "name", "value", "tolerance", "pass", "provenance")


def to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        for name in sorted(r.measured):
            writer.writerow([
                r.check, name, format_float(r.measured[name]), format_float(float(r.tolerance)),
                "true" if r.passed else "false", r.provenance.get(name, "measured"),
            ])
    return buf.getvalue()


def emit(reports, format: str = "json", path=None, config_digest: str = "",
         timing: bool = False) -> str:
    """Serialise reports; write to ``path`` when given, and return the text."""
    if format == "json":
        text = to_json(reports, config_digest, timing)
    elif format == "csv":
        text = to_csv(reports)
    else:
        raise ValueError(f"unknown format {format!r}")
    if path is not None and str(path) != "-":
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text
