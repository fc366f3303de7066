"""Readers for the delimited outputs of the benchmark runs.

These consume the documented CSV schemas only (campaign tables, trajectory
files, spectrum files, matrix JSON); nothing is recomputed.
"""

from __future__ import annotations

import csv
import json

import numpy as np

TRAJECTORY_COLUMNS = ("l", "t_wall", "rod", "tr_re", "tr_im", "tr2_re", "tr2_im")


class SchemaError(ValueError):
    """Input file does not follow the documented schema."""


def read_campaign(path) -> list[dict]:
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty campaign table")
    required = {"model", "scheme", "seed", "converged", "c_conv_l", "c_conv_t"}
    missing = required - set(rows[0])
    if missing:
        raise SchemaError(f"{path}: missing columns {sorted(missing)}")
    return rows


def read_trajectory(path) -> dict:
    with open(path) as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(TRAJECTORY_COLUMNS) - set(reader.fieldnames):
            raise SchemaError(f"{path}: expected columns {TRAJECTORY_COLUMNS}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: empty trajectory")
    out = {c: np.array([float(r[c]) for r in rows]) for c in TRAJECTORY_COLUMNS}
    return out


def read_spectrum(path) -> np.ndarray:
    with open(path) as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or {"re", "im"} - set(reader.fieldnames):
            raise SchemaError(f"{path}: expected columns re,im")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: empty spectrum")
    return np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])


def read_matrix_json(path) -> np.ndarray:
    with open(path) as fh:
        obj = json.load(fh)
    try:
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: not a matrix JSON object") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise SchemaError(f"{path}: matrix fields do not match dim={dim}")
    return re + 1j * im


def numeric(rows: list[dict], column: str) -> np.ndarray:
    out = []
    for r in rows:
        v = r.get(column, "")
        out.append(float(v) if v not in ("", None) else np.nan)
    return np.array(out)
