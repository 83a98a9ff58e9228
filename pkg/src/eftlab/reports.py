"""Check reports and their JSON / text rendering."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, List, Optional

STATUSES = ("pass", "fail", "error")


@dataclass
class Report:
    name: str
    status: str
    details: dict = field(default_factory=dict)
    runtime_ms: Optional[float] = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self, timings: bool = False) -> dict:
        out = {"check": self.name, "status": self.status, "details": _clean(self.details)}
        if timings and self.runtime_ms is not None:
            out["runtime_ms"] = round(self.runtime_ms, 3)
        return out

    def line(self, timings: bool = False) -> str:
        summary = _summary(self.details)
        t = f" [{self.runtime_ms:.0f} ms]" if timings and self.runtime_ms is not None else ""
        return f"{self.status.upper():5} {self.name}{': ' + summary if summary else ''}{t}"


def _clean(x: Any):
    """Make a payload JSON-safe and stable: tuples to lists, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.6e}")
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    if isinstance(x, (str, int, bool)) or x is None:
        return x
    return str(x)


def _summary(details: dict) -> str:
    keys = ("deviation", "max_deviation", "ratio", "verdict", "message", "detail")
    bits = []
    for k in keys:
        if k in details and details[k] is not None:
            v = details[k]
            if isinstance(v, float):
                v = f"{v:.3g}"
            bits.append(f"{k}={v}")
    return ", ".join(bits)


def status_of(statuses: Iterable[str]) -> str:
    s = list(statuses)
    if "error" in s:
        return "error"
    if "fail" in s:
        return "fail"
    return "pass"


def dumps(reports: List[Report], timings: bool = False) -> str:
    payload = {
        "status": status_of(r.status for r in reports),
        "reports": [r.to_json(timings) for r in reports],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def render_text(reports: List[Report], timings: bool = False) -> str:
    lines = [r.line(timings) for r in reports]
    n_pass = sum(r.passed for r in reports)
    lines.append(f"{n_pass}/{len(reports)} checks passed")
    return "\n".join(lines) + "\n"
