"""CSV exchange: provenance headers, round-trip number formatting, point and matrix ingest."""
from __future__ import annotations

import csv
import datetime as _dt
import math
from importlib import metadata

import numpy as np

from .errors import DomainError

INF_TOKEN = "+infinity"
NEG_INF_TOKEN = "-infinity"


def package_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def format_real(x):
    """Shortest round-trip decimal for ``x``; infinities become tagged sentinels."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return INF_TOKEN if x > 0 else NEG_INF_TOKEN
    if math.isnan(x):
        return "nan"
    return repr(x)


def parse_real(token):
    token = token.strip()
    if token == INF_TOKEN:
        return math.inf
    if token == NEG_INF_TOKEN:
        return -math.inf
    return float(token)


def provenance_lines(command=None, seed=None, extra=None, timestamp=True):
    """Comment lines naming the command, version and seed behind an output file."""
    lines = []
    if command is not None:
        lines.append(f"command: {command}")
    lines.append(f"version: {package_version()}")
    if seed is not None:
        lines.append(f"seed: {seed}")
    for key, value in (extra or {}).items():
        lines.append(f"{key}: {value}")
    if timestamp:
        lines.append(f"created: {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}")
    return lines


def write_csv(path, columns, rows, header_lines=()):
    """Write ``rows`` under ``columns``, preceded by ``# `` comment lines.

    Cells are formatted with :func:`format_real` unless already strings.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else ("" if c is None else format_real(c))
                             for c in row])


def read_csv(path):
    """Return ``(comments, columns, rows)`` with rows as lists of strings."""
    comments, rows, columns = [], [], None
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            if not line.strip():
                continue
            cells = next(csv.reader([line]))
            if columns is None:
                columns = [c.strip() for c in cells]
            else:
                rows.append(cells)
    if columns is None:
        raise DomainError(f"{path}: no header row")
    return comments, columns, rows


def read_points(path):
    """Point cloud from ``id,c0,...,c{d-1}``; rows are returned in id order."""
    _, columns, rows = read_csv(path)
    if not columns or columns[0] != "id" or any(c != f"c{i}" for i, c in enumerate(columns[1:])):
        raise DomainError(f"{path}: expected header id,c0,...; got {','.join(columns)}")
    if len(columns) < 2:
        raise DomainError(f"{path}: no coordinate columns")
    ids = np.array([int(r[0]) for r in rows], dtype=np.int64)
    coords = np.array([[float(v) for v in r[1:]] for r in rows], dtype=float).reshape(len(rows), -1)
    if coords.shape[1] != len(columns) - 1:
        raise DomainError(f"{path}: ragged rows")
    return coords[np.argsort(ids, kind="stable")]


def write_points(path, coords, header_lines=()):
    coords = np.asarray(coords, dtype=float)
    cols = ["id"] + [f"c{i}" for i in range(coords.shape[1])]
    write_csv(path, cols, ([i, *row] for i, row in enumerate(coords.tolist())), header_lines)


def read_matrix(path):
    """Square distance matrix, row-major, no header; ``#`` lines are comments."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            rows.append([parse_real(v) for v in line.split(",")])
    mat = np.array(rows, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DomainError(f"{path}: distance matrix must be square, got shape {mat.shape}")
    return mat
