"""CSV curve files and JSON fit reports.

Curve files are plain CSV with a ``x,y,sigma`` header. Metadata sits in
``#`` comment lines above it::

    # echofit curve
    # axis_kind: time_delay
    # x_unit: s
    # y_unit: arb
    # meta: {"field_b": 2.2, "kind": "pe2_decay"}
    x,y,sigma
    0.0,1.0,

Floats are written with ``repr`` (shortest round-trip form, always ``.`` as
decimal separator), so reading a file back reproduces every value exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .estimation import FitResult
from .sequences import AxisKind, Curve

HEADER = ["x", "y", "sigma"]


class DataFormatError(ConfigError):
    """A data file does not follow the curve or report format."""


def _y_unit(curve: Curve) -> str:
    kind = curve.meta.get("kind", "")
    if kind in ("power_series", "linewidth_series") or curve.axis_kind in (AxisKind.FIELD, AxisKind.TEMPERATURE):
        return "Hz"
    return "arb"


def _fmt(v: float) -> str:
    return repr(float(v))


def curve_to_text(curve: Curve) -> str:
    buf = io.StringIO()
    buf.write("# echofit curve\n")
    buf.write(f"# axis_kind: {curve.axis_kind.value}\n")
    buf.write(f"# x_unit: {curve.axis_kind.unit}\n")
    buf.write(f"# y_unit: {_y_unit(curve)}\n")
    buf.write(f"# meta: {json.dumps(curve.meta, sort_keys=True)}\n")
    buf.write(",".join(HEADER) + "\n")
    sigma = curve.sigma
    for i in range(len(curve)):
        s = "" if sigma is None else _fmt(sigma[i])
        buf.write(f"{_fmt(curve.x[i])},{_fmt(curve.y[i])},{s}\n")
    return buf.getvalue()


def write_curve(curve: Curve, path) -> Path:
    path = Path(path)
    path.write_text(curve_to_text(curve), encoding="utf-8", newline="\n")
    return path


def curve_from_text(text: str, source: str = "<string>") -> Curve:
    comments = {}
    errors = []
    rows = []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, value = body.split(":", 1)
                comments[key.strip()] = value.strip()
            continue
        fields = next(csv.reader([line]))
        if not header_seen:
            if [f.strip() for f in fields] != HEADER:
                errors.append(f"line {lineno}: expected header 'x,y,sigma', got {line!r}")
            header_seen = True
            continue
        if len(fields) != 3:
            errors.append(f"line {lineno}: expected 3 fields, got {len(fields)}")
            continue
        try:
            x, y = float(fields[0]), float(fields[1])
            s = float(fields[2]) if fields[2].strip() else None
        except ValueError:
            errors.append(f"line {lineno}: unparsable number in {line!r}")
            continue
        if not all(math.isfinite(v) for v in (x, y) + (() if s is None else (s,))):
            errors.append(f"line {lineno} (row {len(rows)}): non-finite value in {line!r}")
            continue
        rows.append((x, y, s))
    if not header_seen:
        errors.append("missing 'x,y,sigma' header")
    has_sigma = {r[2] is not None for r in rows}
    if len(has_sigma) > 1:
        errors.append("sigma column must be filled on every row or on none")
    try:
        axis = AxisKind(comments.get("axis_kind", AxisKind.TIME_DELAY.value))
    except ValueError:
        errors.append(f"axis_kind: unknown value {comments.get('axis_kind')!r}")
        axis = AxisKind.TIME_DELAY
    meta = {}
    if "meta" in comments:
        try:
            meta = json.loads(comments["meta"])
        except json.JSONDecodeError as exc:
            errors.append(f"meta comment: {exc.msg}")
    if errors:
        raise DataFormatError([f"{source}: {e}" for e in errors])
    if not rows:
        raise DataFormatError(f"{source}: no data rows")
    arr = np.array([(r[0], r[1]) for r in rows], dtype=float)
    sigma = None if None in {r[2] for r in rows} else np.array([r[2] for r in rows], dtype=float)
    try:
        return Curve(arr[:, 0], arr[:, 1], sigma, axis, meta)
    except ConfigError as exc:
        raise DataFormatError([f"{source}: {e}" for e in exc.errors]) from None


def read_curve(path) -> Curve:
    path = Path(path)
    return curve_from_text(path.read_text(encoding="utf-8"), str(path))


def curve_digest(curve: Curve) -> str:
    """SHA-256 over the numeric content and metadata of a curve."""
    h = hashlib.sha256()
    for arr in (curve.x, curve.y, curve.sigma):
        h.update(b"\x00" if arr is None else np.ascontiguousarray(arr, dtype="<f8").tobytes())
    h.update(curve.axis_kind.value.encode())
    h.update(json.dumps(curve.meta, sort_keys=True).encode())
    return "sha256:" + h.hexdigest()


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def _unnum(v):
    return float(v)


def fit_report_dict(result: FitResult, fit: str = "", input_digest: str = "") -> dict:
    cov = result.covariance
    two = result.two_sigma
    return {
        "tool": "echofit",
        "version": __version__,
        "fit": fit,
        "input_digest": input_digest,
        "converged": bool(result.converged),
        "iterations": int(result.iterations),
        "residual_rms": _num(result.residual_rms),
        "flags": list(result.flags),
        "fixed": list(result.fixed),
        "names": list(result.names),
        "values": [_num(v) for v in result.values],
        "two_sigma": [_num(v) for v in two],
        "covariance": [[_num(v) for v in row] for row in cov],
        "parameters": {
            n: {"value": _num(result.values[i]), "two_sigma": _num(two[i]), "unit": result.units[n],
                "fixed": n in result.fixed}
            for i, n in enumerate(result.names)
        },
    }


def write_fit_report(result: FitResult, path, fit: str = "", input_digest: str = "") -> Path:
    path = Path(path)
    text = json.dumps(fit_report_dict(result, fit, input_digest), indent=2) + "\n"
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write fit report to {path}: {exc.strerror}") from exc
    return path


def read_fit_report(path) -> FitResult:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        names = doc["names"]
        values = [_unnum(v) for v in doc["values"]]
        if "covariance" in doc:
            cov = [[_unnum(v) for v in row] for row in doc["covariance"]]
            result = FitResult(names, values, cov)
        else:
            result = FitResult.from_values(names, values, [_unnum(v) for v in doc["two_sigma"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: not a fit report ({exc})") from None
    result.converged = bool(doc.get("converged", True))
    result.iterations = int(doc.get("iterations", 0))
    result.residual_rms = _unnum(doc.get("residual_rms", 0.0))
    result.flags = list(doc.get("flags", []))
    result.fixed = list(doc.get("fixed", []))
    return result
