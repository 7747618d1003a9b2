"""JSON state files, report files and preset parsing."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .activation import ActivationReport
from .linalg import DensityMatrix, DimensionError, ValidationError
from .states import isotropic, phi_plus, pure_schmidt, random_density

SCHEMA = "steerscope.report/1"


def fmt_float(x: float | None) -> str | None:
    """Decimal string with 17 significant digits (round-trips a double)."""
    if x is None:
        return None
    return format(float(x), ".17g")


def parse_float(s) -> float | None:
    if s is None:
        return None
    return float(s)


# -- state files ---------------------------------------------------------


def state_to_json(rho: DensityMatrix) -> str:
    rows = [[[fmt_float(z.real), fmt_float(z.imag)] for z in row] for row in rho.matrix]
    return json.dumps({"dims": [rho.dim_a, rho.dim_b], "matrix": rows}, indent=1)


def state_from_dict(obj: dict) -> DensityMatrix:
    try:
        da, db = (int(x) for x in obj["dims"])
        rows = obj["matrix"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionError(f"state file needs 'dims': [dA, dB] and 'matrix': {exc}") from exc
    n = da * db
    if len(rows) != n or any(len(r) != n for r in rows):
        raise DimensionError(f"matrix must be {n}x{n} for dims {da}x{db}")
    try:
        m = np.array([[complex(float(re), float(im)) for re, im in row] for row in rows])
    except (TypeError, ValueError) as exc:
        raise ValidationError("entries are [re, im] pairs", float("nan"), f"bad matrix entry: {exc}") from exc
    return DensityMatrix(da, db, m)


def load_state(path: str | Path) -> DensityMatrix:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError("valid JSON", float("nan"), f"{path}: {exc}") from exc
    return state_from_dict(obj)


# -- presets -------------------------------------------------------------


def _kv(body: str) -> dict[str, str]:
    out = {}
    for part in body.split(","):
        if "=" not in part:
            raise ValueError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_preset(text: str) -> DensityMatrix:
    """Build a state from ``phi+:d=N``, ``iso:d=N,F=X``, ``schmidt:c1,c2,...``
    or ``random:dA,dB,rank,seed``.

    Schmidt coefficients are rescaled to unit norm.
    """
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "phi+":
            return phi_plus(int(_kv(body)["d"])).density()
        if kind == "iso":
            kv = _kv(body)
            return isotropic(int(kv["d"]), float(kv["F"]))
        if kind == "schmidt":
            c = np.array([float(x) for x in body.split(",")])
            if np.any(c < 0) or not np.any(c > 0):
                raise ValidationError("nonnegative coefficients", float(-c.min()))
            return pure_schmidt(c / np.linalg.norm(c))
        if kind == "random":
            da, db, rank, seed = (int(x) for x in body.split(","))
            return random_density(da, db, rank, seed)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("preset syntax", float("nan"), f"cannot parse preset {text!r}: {exc}") from exc
    raise ValidationError("preset syntax", float("nan"), f"unknown preset kind {kind!r}")


# -- report files --------------------------------------------------------

_FLOAT_FIELDS = {"F", "reduction_min_eig", "filtered_fidelity", "hashing_margin", "fraction_unfiltered"}


@dataclass
class ReportFile:
    report: ActivationReport
    source: str
    flags: dict = field(default_factory=dict)
    version: str = __version__

    def __eq__(self, other):
        if not isinstance(other, ReportFile):
            return NotImplemented
        return (
            self.source == other.source
            and self.flags == other.flags
            and self.version == other.version
            and _report_key(self.report) == _report_key(other.report)
        )


def _report_key(r: ActivationReport) -> dict:
    # NaN-safe comparison key
    d = dataclasses.asdict(r)
    return {k: ("nan" if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}


def report_to_dict(r: ActivationReport) -> dict:
    out = {}
    for f in dataclasses.fields(r):
        v = getattr(r, f.name)
        if f.name in _FLOAT_FIELDS:
            v = fmt_float(v)
        elif f.name == "window":
            v = None if v is None else [fmt_float(v[0]), fmt_float(v[1])]
        elif f.name == "bootstrap":
            v = None if v is None else [int(v[0]), int(v[1])]
        elif isinstance(v, list):
            v = list(v)
        out[f.name] = v
    return out


def report_from_dict(obj: dict) -> ActivationReport:
    kwargs = {}
    for f in dataclasses.fields(ActivationReport):
        if f.name not in obj:
            continue
        v = obj[f.name]
        if f.name in _FLOAT_FIELDS:
            v = parse_float(v)
        elif f.name == "window":
            v = None if v is None else (parse_float(v[0]), parse_float(v[1]))
        elif f.name == "bootstrap":
            v = None if v is None else (int(v[0]), int(v[1]))
        kwargs[f.name] = v
    return ActivationReport(**kwargs)


def serialize(rf: ReportFile) -> str:
    obj = {
        "schema": SCHEMA,
        "tool": "steerscope",
        "version": rf.version,
        "source": rf.source,
        "flags": rf.flags,
        "report": report_to_dict(rf.report),
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def parse(text: str) -> ReportFile:
    obj = json.loads(text)
    if obj.get("schema") != SCHEMA:
        raise ValueError(f"unsupported report schema {obj.get('schema')!r}")
    return ReportFile(
        report=report_from_dict(obj["report"]),
        source=obj["source"],
        flags=obj["flags"],
        version=obj["version"],
    )
