"""CSV and JSON plumbing for the command line.

Coordinate files carry a header ``x0,...,x{d-1}``; distance matrices are
square numeric CSVs with an optional header row. Sample and base files add a
label column (``y`` or ``value``) and may reference points of a separately
loaded space through an ``index`` column instead of coordinates.
"""
import csv
import io
import json
import subprocess
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .metric import MetricAccessor


def _read(path):
    text = Path(path).read_text()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParameterError(f"{path}: empty file")
    return rows


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_table(path):
    """Header names and a float matrix; a missing header yields ``None`` for names."""
    rows = _read(path)
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as e:
        raise ParameterError(f"{path}: non-numeric entry ({e})") from None
    if data.ndim != 2 or (header is not None and data.shape[1] != len(header)):
        raise ParameterError(f"{path}: ragged rows")
    return header, data


def _coord_columns(header):
    cols = [i for i, h in enumerate(header) if h.startswith("x") and h[1:].isdigit()]
    cols.sort(key=lambda i: int(header[i][1:]))
    if [int(header[i][1:]) for i in cols] != list(range(len(cols))):
        raise ParameterError("coordinate columns must be x0,...,x{d-1}")
    return cols


def load_space(path, metric="euclidean", p=2.0):
    header, data = read_table(path)
    if metric == "matrix":
        return MetricAccessor.from_matrix(data)
    if metric != "euclidean":
        raise ParameterError(f"unknown metric kind {metric!r}")
    cols = _coord_columns(header) if header else list(range(data.shape[1]))
    if not cols:
        raise ParameterError(f"{path}: no coordinate columns")
    return MetricAccessor.from_coords(data[:, cols], p=p)


def load_column(path, names):
    """A single numeric column, found by one of ``names`` or as the only column."""
    header, data = read_table(path)
    if header:
        for name in names:
            if name in header:
                return data[:, header.index(name)]
    if data.shape[1] != 1:
        raise ParameterError(f"{path}: expected a column named one of {names}")
    return data[:, 0]


def load_labeled(path, label_names, space=None, p=2.0):
    """Points and labels from a CSV.

    With an ``index`` column the points refer to ``space``; otherwise the
    coordinate columns define a fresh euclidean space, one point per row.
    Returns ``(metric, points, labels, coords_or_None)``.
    """
    header, data = read_table(path)
    if header is None:
        raise ParameterError(f"{path}: a header row is required")
    label_col = next((header.index(n) for n in label_names if n in header), None)
    if label_col is None:
        raise ParameterError(f"{path}: missing label column {label_names[0]!r}")
    labels = data[:, label_col]
    if "index" in header:
        if space is None:
            raise ParameterError(f"{path}: index columns need --space")
        idx = data[:, header.index("index")]
        if not np.all(idx == np.round(idx)):
            raise ParameterError(f"{path}: indices must be integers")
        return space, idx.astype(np.int64), labels, None
    cols = _coord_columns(header)
    if not cols:
        raise ParameterError(f"{path}: no coordinate or index columns")
    coords = data[:, cols]
    return MetricAccessor.from_coords(coords, p=p), np.arange(len(coords)), labels, coords


def load_targets(path, space=None):
    """Target rows: an ``index`` column into ``space`` or coordinate columns."""
    header, data = read_table(path)
    if header and "index" in header:
        if space is None:
            raise ParameterError(f"{path}: index columns need --space")
        return data[:, header.index("index")].astype(np.int64), None
    cols = _coord_columns(header) if header else list(range(data.shape[1]))
    return None, data[:, cols]


def write_csv(rows, fieldnames, out=None):
    """Write dict rows; ``out=None`` prints to stdout."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    if out is None:
        print(buf.getvalue(), end="")
    else:
        Path(out).write_text(buf.getvalue())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dump_json(obj, path=None):
    text = json.dumps(obj, indent=2, default=_json_default, allow_nan=True)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")


def version_string():
    """``git describe`` of the working tree when available, else the package version."""
    from . import __version__
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_sidecar(out, config):
    """Store run config and version next to a CSV output as ``<out>.json``."""
    if out is None:
        return None
    path = Path(str(out) + ".json")
    dump_json({"version": version_string(), "config": config}, path)
    return path
