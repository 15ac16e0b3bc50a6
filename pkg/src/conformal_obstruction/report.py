"""Identity reports and the versioned JSON/CSV report format."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA = 1


def artifact_version() -> str:
    from importlib.metadata import PackageNotFoundError, version

    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "0.0.0"


CONVENTIONS = {
    "mean_curvature": "H = (k1 + k2)/2 with the outward normal; round sphere of radius R has H = +1/R",
    "conformal_field": "X(x) = a - (a.x) x + A x on S^2, beta = -(a.x), div X = 2 beta",
    "dirac_1d": "e.psi = -i psi, D = -i d/dt, nu outward, <u, v> = Re(u conj(v))",
    "laplacian": "Delta = -sum d^2/dx_i^2 (radial problem u'' + (n-1)u'/r + u^(p-1) = 0)",
    "relative_residual": "|residual| / normaliser; integrals below 1e-9 of their absolute scale count as exact zero",
}


@dataclass
class IdentityReport:
    """Terms of a discretised integral identity with its residual."""

    check: str
    terms: dict
    residual: float
    normalizer: float
    discretization: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def relative(self) -> float:
        if self.normalizer == 0:
            return 0.0 if self.residual == 0 else math.inf
        return abs(self.residual) / self.normalizer


def _clean(obj):
    """JSON-safe copy with numpy scalars unwrapped and non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def make_report(
    check: str,
    params: dict,
    terms: dict,
    residual,
    relative,
    tolerance: float,
    passed: bool,
    discretization: dict | None = None,
    extra: dict | None = None,
    timestamp: str | None = None,
) -> dict:
    report = {
        "schema": SCHEMA,
        "check": check,
        "params": params,
        "terms": terms,
        "residual": residual,
        "relative_residual": relative,
        "tolerance": tolerance,
        "pass": bool(passed),
        "discretization": discretization or {},
        "conventions": CONVENTIONS,
        "version": artifact_version(),
        "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        report["extra"] = extra
    return _clean(report)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def flatten(obj, prefix: str = "") -> dict:
    out = {}
    if isinstance(obj, dict):
        for k in sorted(obj):
            out.update(flatten(obj[k], f"{prefix}{k}."))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out.update(flatten(v, f"{prefix}{i}."))
    else:
        out[prefix[:-1]] = obj
    return out


def to_csv(rows: list[dict]) -> str:
    """Flat projection of one or more reports, one row each."""
    flat = [flatten(r) for r in rows]
    keys = sorted({k for r in flat for k in r})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in flat:
        w.writerow(r)
    return buf.getvalue()


def vertex_csv(vertices: np.ndarray, H: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["vertex_index", "x", "y", "z", "H"])
    for i, (p, h) in enumerate(zip(vertices.tolist(), H.tolist())):
        w.writerow([i, repr(p[0]), repr(p[1]), repr(p[2]), repr(h)])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
