"""CSV and JSON file formats.

CSV files are comma separated with a mandatory header whose column names
carry a unit suffix (``f01_GHz``, ``T1_s``). JSON objects always carry a
``schema_version`` field.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import DataError

SCHEMA_VERSION = 1

TRANSITION_COLUMNS = ("phi_ext_Phi0", "f01_GHz")
TRANSITION_OPTIONAL = ("sigma_GHz",)
COHERENCE_COLUMNS = ("phi_ext_Phi0", "f01_GHz")
COHERENCE_OPTIONAL = ("T1_s", "T2e_s", "T1_err_s", "T2e_err_s")


def _parse_float(text, column, line):
    text = text.strip()
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise DataError(f"line {line}: column {column!r} is not a number: {text!r}") from None


def read_table(path, columns, optional=(), text_columns=()):
    """Read a headed CSV into a list of dicts.

    ``columns`` must be present; ``optional`` columns default to NaN. Columns
    listed in ``text_columns`` are kept as strings, all others parsed as
    floats. Errors name the offending line (1-based, header is line 1).
    """
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise DataError(f"{path} line 1: missing column(s) {', '.join(missing)}")
        wanted = [c for c in (*columns, *optional) if c in header]
        where = {c: header.index(c) for c in wanted}
        rows = []
        for fields in reader:
            line = reader.line_num
            if not fields or all(not f.strip() for f in fields):
                continue
            if len(fields) != len(header):
                raise DataError(
                    f"{path} line {line}: expected {len(header)} fields, got {len(fields)}"
                )
            row = {}
            for c in wanted:
                raw = fields[where[c]]
                row[c] = raw.strip() if c in text_columns else _parse_float(raw, c, line)
            for c in columns:
                if c not in text_columns and math.isnan(row[c]):
                    raise DataError(f"{path} line {line}: column {c!r} is empty")
            for c in optional:
                row.setdefault(c, math.nan)
            row["_line"] = line
            rows.append(row)
    return rows


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _fmt(value):
    # missing values (None, NaN) are written as empty cells
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value)) if math.isfinite(value) else ""
    return value


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"schema_version": SCHEMA_VERSION, **_jsonable(obj)}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} line {exc.lineno}: invalid JSON ({exc.msg})") from None


def _opt(value):
    return None if math.isnan(value) else value


def read_transitions(path, default_sigma=1e-3):
    """Transition CSV; rows without ``sigma_GHz`` get ``default_sigma`` (1 MHz)."""
    from .extraction import TransitionPoint

    rows = read_table(path, TRANSITION_COLUMNS, TRANSITION_OPTIONAL)
    out = []
    for r in rows:
        sigma = r["sigma_GHz"]
        try:
            out.append(TransitionPoint(r["phi_ext_Phi0"], r["f01_GHz"], default_sigma if math.isnan(sigma) else sigma))
        except ValueError as exc:
            raise DataError(f"{path} line {r['_line']}: {exc}") from None
    return out


def read_coherence(path, env, device_id="device"):
    """Coherence CSV; empty T1/T2 cells mean the quantity was not measured."""
    from .extraction import CoherenceDataset, CoherencePoint

    rows = read_table(path, COHERENCE_COLUMNS, COHERENCE_OPTIONAL)
    points = []
    for r in rows:
        try:
            points.append(
                CoherencePoint(
                    phi_ext=r["phi_ext_Phi0"], f01=r["f01_GHz"], t1=_opt(r["T1_s"]),
                    t2_echo=_opt(r["T2e_s"]), t1_err=_opt(r["T1_err_s"]), t2_err=_opt(r["T2e_err_s"]),
                )
            )
        except ValueError as exc:
            raise DataError(f"{path} line {r['_line']}: {exc}") from None
    return CoherenceDataset(device_id=device_id, points=tuple(points), env=env)


def write_coherence(path, dataset):
    rows = [(p.phi_ext, p.f01, p.t1, p.t2_echo, p.t1_err, p.t2_err) for p in dataset.points]
    return write_csv(path, (*COHERENCE_COLUMNS, *COHERENCE_OPTIONAL), rows)


def write_transitions(path, points):
    rows = [(p.phi_ext, p.f01_meas, p.sigma_f) for p in points]
    return write_csv(path, (*TRANSITION_COLUMNS, *TRANSITION_OPTIONAL), rows)
