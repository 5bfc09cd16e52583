"""Deterministic CSV/JSON emitters and run manifests."""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError

SIG_DIGITS = 9


def fmt(x) -> str:
    """Locale-independent 9-significant-digit rendering; ``-0`` prints as ``0``."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x) + 0.0, f".{SIG_DIGITS}g")


def _check_finite(columns: Sequence[Sequence], names: Sequence[str]):
    for name, col in zip(names, columns):
        for i, v in enumerate(col):
            if isinstance(v, str):
                continue
            if not math.isfinite(float(v)):
                raise DomainError(f"non-finite value in column '{name}' at row {i}")


def emit_table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    rows = [list(r) for r in rows]
    if rows:
        _check_finite(list(zip(*rows)), header)
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in r) for r in rows)
    return "\n".join(lines) + "\n"


def emit_csv(curve=None, *, tau=None, values=None, stderr=None, x_name: str = "tau") -> str:
    """Curve as ``tau,value[,stderr]`` text.  Pass a CorrelationCurve or the arrays."""
    if curve is not None:
        tau, values, stderr = curve.tau, curve.values, curve.stderr
    tau = np.asarray(tau if tau is not None else [], dtype=float)
    values = np.asarray(values if values is not None else [], dtype=float)
    header = [x_name, "value"]
    cols = [tau, values]
    if stderr is not None:
        header.append("stderr")
        cols.append(np.asarray(stderr, dtype=float))
    return emit_table(header, zip(*cols))


def emit_map(row_name: str, row_values, col_values, matrix) -> str:
    """2-d map: first column is the row coordinate, one column per ``col_values`` entry."""
    m = np.asarray(matrix, dtype=float)
    header = [row_name] + [fmt(c) for c in col_values]
    rows = [[r, *m[i]] for i, r in enumerate(row_values)]
    return emit_table(header, rows)


def emit_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            raise DomainError("non-finite value in JSON output")
        return float(fmt(v))
    return obj


def table_as_json(text_csv: str) -> str:
    """Re-express an emitted CSV table as a JSON object of columns."""
    lines = text_csv.rstrip("\n").split("\n")
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    cols = {h: [_parse_cell(r[i]) for r in rows] for i, h in enumerate(header)}
    return json.dumps({"columns": header, "data": cols}, indent=2) + "\n"


def _parse_cell(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> tuple[list[str], np.ndarray]:
    text = Path(path).read_text()
    lines = text.rstrip("\n").split("\n")
    header = lines[0].split(",")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]]) if len(lines) > 1 else np.empty((0, len(header)))
    return header, data


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def make_manifest(version: str, config: dict, seed: int, outputs: dict[str, bytes], results: Optional[dict] = None) -> dict:
    return {
        "tool": "cohsim",
        "tool_version": version,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "seed": seed,
        "config": config,
        "outputs": {name: sha256(data) for name, data in sorted(outputs.items())},
        "results": results or {},
    }
