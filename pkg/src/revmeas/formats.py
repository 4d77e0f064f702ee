"""JSON state/measurement files and CSV/JSON report emission.

State file::

    {"dim": 4, "re": [[...], ...], "im": [[...], ...], "dims": [2, 2]}

``im`` may be omitted for real matrices; ``dims`` is optional and turns the
result into a :class:`~revmeas.core.BipartiteState`.

Measurement file::

    {"type": "projective" | "reversible", "projectors": [<state-format matrix>, ...], "a": 0.1}
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .core import BipartiteState, DensityMatrix, make_density
from .errors import SchemaError
from .measurement import Povm, ProjectiveMeasurement, construct_reversible, make_projective

SIG_DIGITS = 9


def _matrix_from_json(obj: Any, where: str) -> np.ndarray:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object with 'dim' and 're'")
    for key in ("dim", "re"):
        if key not in obj:
            raise SchemaError(f"{where}: missing field '{key}'")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise SchemaError(f"{where}: 'dim' must be a positive integer, got {dim!r}")
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj.get("im", np.zeros((dim, dim))), dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: 're'/'im' must be numeric matrices ({exc})") from None
    for name, part in (("re", re), ("im", im)):
        if part.shape != (dim, dim):
            raise SchemaError(f"{where}: '{name}' has shape {part.shape}, expected ({dim}, {dim})")
    return re + 1j * im


def _matrix_to_json(matrix: np.ndarray) -> dict:
    m = np.asarray(matrix, dtype=complex)
    return {"dim": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}


def _load_json(path: str | os.PathLike) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"{path}: malformed JSON at byte offset {exc.pos} (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from None


def parse_state(obj: Any, where: str = "state") -> DensityMatrix | BipartiteState:
    matrix = _matrix_from_json(obj, where)
    rho = make_density(matrix)
    dims = obj.get("dims")
    if dims is None:
        return rho
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(d, int) for d in dims)):
        raise SchemaError(f"{where}: 'dims' must be [d_A, d_B], got {dims!r}")
    if dims[0] * dims[1] != rho.dim:
        raise SchemaError(f"{where}: dims {dims} do not multiply to dim {rho.dim}")
    return BipartiteState(rho, dims[0], dims[1])


def parse_state_file(path: str | os.PathLike) -> DensityMatrix | BipartiteState:
    """Read and validate a state file; validation errors propagate unchanged."""
    return parse_state(_load_json(path), where=str(path))


def state_to_json(state: DensityMatrix | BipartiteState) -> dict:
    out = _matrix_to_json(state.matrix)
    if isinstance(state, BipartiteState):
        out["dims"] = [state.dim_a, state.dim_b]
    return out


def parse_measurement(obj: Any, where: str = "measurement") -> Povm:
    if not isinstance(obj, dict) or obj.get("type") not in ("projective", "reversible"):
        raise SchemaError(f"{where}: 'type' must be 'projective' or 'reversible'")
    projectors = obj.get("projectors")
    if not isinstance(projectors, list) or not projectors:
        raise SchemaError(f"{where}: 'projectors' must be a nonempty list")
    base = make_projective(
        [_matrix_from_json(p, f"{where}.projectors[{k}]") for k, p in enumerate(projectors)]
    )
    if obj["type"] == "projective":
        return base
    if not isinstance(obj.get("a"), (int, float)):
        raise SchemaError(f"{where}: reversible measurement needs a numeric 'a'")
    return construct_reversible(base, float(obj["a"]))


def parse_measurement_file(path: str | os.PathLike) -> Povm:
    return parse_measurement(_load_json(path), where=str(path))


def measurement_to_json(meas: Povm) -> dict:
    base = getattr(meas, "base", None)
    if isinstance(meas, ProjectiveMeasurement):
        return {"type": "projective", "projectors": [_matrix_to_json(p) for p in meas.elements]}
    if base is None:
        raise SchemaError("only projective and reversible measurements are serialisable")
    return {
        "type": "reversible",
        "projectors": [_matrix_to_json(p) for p in base.elements],
        "a": meas.a,
    }


def _render(value: Any) -> Any:
    """Value as it appears in a report: 9 significant digits, booleans as true/false."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{SIG_DIGITS}g}")
    return value


def _csv_cell(value: Any) -> str:
    value = _render(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{SIG_DIGITS}g}"
    return str(value)


def report_text(rows: Sequence, fmt: str) -> str:
    if not rows:
        raise ValueError("refusing to write an empty report")
    names = [f.name for f in dataclasses.fields(rows[0])]
    records = [[getattr(r, n) for n in names] for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        writer.writerows([_csv_cell(v) for v in rec] for rec in records)
        return buf.getvalue()
    if fmt == "json":
        payload = [{n: _render(v) for n, v in zip(names, rec)} for rec in records]
        return json.dumps(payload, indent=1) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(rows: Sequence, fmt: str, path: str | os.PathLike) -> None:
    """Write dataclass rows as CSV or JSON. Nothing is written if ``rows`` is empty."""
    text = report_text(rows, fmt)
    Path(path).write_text(text)
