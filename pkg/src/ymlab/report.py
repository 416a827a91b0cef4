"""Check records and deterministic JSON reports."""
from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np


@dataclass
class Check:
    name: str
    passed: bool
    residual: float | None = None
    paper_ref: str = ""
    detail: str | None = None

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        out = {"name": self.name, "status": self.status, "residual": _num(self.residual),
               "paper_ref": self.paper_ref}
        if self.detail is not None:
            out["detail"] = self.detail
        return out


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else str(x)


def versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"artifact": own, "numpy": np.__version__, "python": platform.python_version()}


@dataclass
class Report:
    suite: str
    checks: list[Check] = field(default_factory=list)
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, residual=None, paper_ref: str = "", detail: str | None = None) -> Check:
        c = Check(name, bool(passed), residual, paper_ref, detail)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        out = {"suite": self.suite, "checks": [c.to_dict() for c in self.checks],
               "versions": versions(), "seed": self.seed}
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"suite: {self.suite}"]
        for c in self.checks:
            res = "" if c.residual is None else f"  residual={float(c.residual):.3e}"
            det = "" if c.detail is None else f"  ({c.detail})"
            lines.append(f"  {c.status}  {c.name}{res}{det}")
        lines.append(f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"
