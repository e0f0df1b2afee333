"""Plain-text sample files, result tables and diagnostics records."""

import csv
import json
import math

import numpy as np

from .errors import InvalidInputError
from .weyl_system import WeylSample

SAMPLE_HEADER = ("Re_z", "Im_z", "Re_M", "Im_M", "is_infinite")


def fmt(v):
    return "%.15g" % v


def _data_rows(path):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise InvalidInputError(f"{path}: no data")
    return rows


def read_table(path):
    """Header names and float columns of a comma-separated table."""
    rows = _data_rows(path)
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None
    if data.size == 0:
        data = data.reshape(0, len(header))
    if data.shape[1] != len(header):
        raise InvalidInputError(f"{path}: rows do not match the header")
    return header, data


def write_table(path, header, columns, comments=()):
    columns = [np.asarray(c) for c in columns]
    with open(path, "w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_samples(path):
    header, data = read_table(path)
    if tuple(header) != SAMPLE_HEADER:
        raise InvalidInputError(f"{path}: expected header {','.join(SAMPLE_HEADER)}")
    samples = []
    for re_z, im_z, re_m, im_m, flag in data:
        if flag not in (0.0, 1.0):
            raise InvalidInputError(f"{path}: is_infinite must be 0 or 1")
        if flag:
            samples.append(WeylSample(complex(re_z, im_z), math.inf, True))
        else:
            samples.append(WeylSample(complex(re_z, im_z), complex(re_m, im_m)))
    return samples


def write_samples(path, samples, comments=()):
    cols = [[], [], [], [], []]
    for s in samples:
        cols[0].append(s.z.real)
        cols[1].append(s.z.imag)
        cols[2].append(0.0 if s.is_infinite else s.M.real)
        cols[3].append(0.0 if s.is_infinite else s.M.imag)
        cols[4].append(1 if s.is_infinite else 0)
    write_table(path, SAMPLE_HEADER, cols, comments)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return float(fmt(v)) if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, record):
    with open(path, "w") as fh:
        json.dump(_jsonable(record), fh, indent=2, sort_keys=True)
        fh.write("\n")
