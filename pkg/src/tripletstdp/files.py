"""Dataset files, CSV output and run manifests.

Dataset files are comma-separated text. Lines starting with ``#`` are
comments, except ``# name: <dataset name>``. The header row is::

    protocol,dt_ms,dt2_ms,T_ms,rho_hz,n,dw_exp,sem

``protocol`` is ``pair`` (uses ``dt_ms``), ``quad`` (uses ``dt_ms`` and
``T_ms``) or one of the six triplet orderings (uses ``dt_ms`` as dt1 and
``dt2_ms`` as dt2). Empty ``rho_hz``/``n`` fall back to 1 Hz and 60
repetitions, or 0.2 Hz for the four orderings other than pre-post-pre and
post-pre-post.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .fitting import DataPoint, Dataset
from .spikes import TRIPLET_KINDS, Pairing, Quadruplet, SixTriplet, TripletPattern

__all__ = [
    "DatasetFormatError",
    "DATASET_COLUMNS",
    "parse_dataset",
    "read_dataset",
    "write_dataset",
    "dataset_bytes",
    "dataset_row",
    "format_float",
    "csv_bytes",
    "atomic_write",
    "sha256_bytes",
    "json_bytes",
]

DATASET_COLUMNS = ("protocol", "dt_ms", "dt2_ms", "T_ms", "rho_hz", "n", "dw_exp", "sem")


class DatasetFormatError(ValueError):
    pass


def _num(row, key, line, default=None):
    raw = (row.get(key) or "").strip()
    if raw == "":
        if default is None:
            raise DatasetFormatError(f"line {line}: column {key!r} is required")
        return default
    try:
        return float(raw)
    except ValueError:
        raise DatasetFormatError(f"line {line}: column {key!r} is not a number: {raw!r}") from None


def _protocol(row, line):
    tag = (row.get("protocol") or "").strip()
    if tag == "pair":
        return Pairing(_num(row, "dt_ms", line) / 1000.0, _num(row, "rho_hz", line, 1.0),
                       int(_num(row, "n", line, 60)))
    if tag == "quad":
        return Quadruplet(_num(row, "dt_ms", line) / 1000.0, _num(row, "T_ms", line) / 1000.0,
                          _num(row, "rho_hz", line, 1.0), int(_num(row, "n", line, 60)))
    if tag in TRIPLET_KINDS:
        dt1 = _num(row, "dt_ms", line) / 1000.0
        dt2 = _num(row, "dt2_ms", line) / 1000.0
        if tag in TRIPLET_KINDS[:2]:
            return TripletPattern(tag, dt1, dt2, _num(row, "rho_hz", line, 1.0),
                                  int(_num(row, "n", line, 60)))
        return SixTriplet(tag, dt1, dt2, _num(row, "rho_hz", line, 0.2),
                          int(_num(row, "n", line, 60)))
    raise DatasetFormatError(f"line {line}: unknown protocol {tag!r}")


def parse_dataset(text, default_name="dataset"):
    name = default_name
    header = None
    points = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.lower().startswith("name:"):
                name = body[5:].strip()
            continue
        cells = next(csv.reader([line]))
        if header is None:
            header = [c.strip() for c in cells]
            missing = {"protocol", "dw_exp", "sem"} - set(header)
            unknown = set(header) - set(DATASET_COLUMNS)
            if missing or unknown:
                raise DatasetFormatError(
                    f"line {line_no}: bad header (missing {sorted(missing)}, "
                    f"unknown {sorted(unknown)})"
                )
            continue
        if len(cells) != len(header):
            raise DatasetFormatError(
                f"line {line_no}: expected {len(header)} fields, got {len(cells)}"
            )
        row = dict(zip(header, cells))
        try:
            protocol = _protocol(row, line_no)
            # build the trains now so timing errors carry the line number
            protocol.generate()
            point = DataPoint(protocol, _num(row, "dw_exp", line_no), _num(row, "sem", line_no))
        except DatasetFormatError:
            raise
        except ValueError as err:
            raise DatasetFormatError(f"line {line_no}: {err}") from None
        points.append(point)
    if header is None:
        raise DatasetFormatError("no header row")
    try:
        return Dataset(name, points)
    except ValueError as err:
        raise DatasetFormatError(str(err)) from None


def read_dataset(path):
    path = Path(path)
    return parse_dataset(path.read_text(encoding="utf-8"), default_name=path.stem)


def dataset_row(point):
    """Dataset-file cells for one point, formatted as written."""
    p = point.protocol
    cells = dict.fromkeys(DATASET_COLUMNS, "")
    if isinstance(p, Pairing):
        cells.update(protocol="pair", dt_ms=p.dt * 1000.0, rho_hz=p.rho, n=p.n_pairs)
    elif isinstance(p, Quadruplet):
        cells.update(protocol="quad", dt_ms=p.dt * 1000.0, T_ms=p.T * 1000.0, rho_hz=p.rho,
                     n=p.n_quads)
    elif isinstance(p, TripletPattern):
        cells.update(protocol=p.kind, dt_ms=p.dt1 * 1000.0, dt2_ms=p.dt2 * 1000.0, rho_hz=p.rho,
                     n=p.n_triplets)
    elif isinstance(p, SixTriplet):
        cells.update(protocol=p.kind, dt_ms=p.dt1 * 1000.0, dt2_ms=p.dt2 * 1000.0, rho_hz=p.rho,
                     n=p.n_reps)
    else:
        raise TypeError(f"cannot serialise protocol {p!r}")
    cells.update(dw_exp=point.dw_exp, sem=point.sem)
    return [format_float(v) if isinstance(v, float) else str(v) for v in cells.values()]


def dataset_bytes(dataset, comment=None):
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append(f"# name: {dataset.name}")
    return "\n".join(lines).encode() + b"\n" + csv_bytes(
        DATASET_COLUMNS, (dataset_row(p) for p in dataset.points)
    )


def write_dataset(path, dataset, comment=None):
    atomic_write(path, dataset_bytes(dataset, comment))


def format_float(value):
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(value))


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return str(value)


def csv_bytes(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue().encode("utf-8")


def atomic_write(path, data):
    """Write ``data`` to ``path`` via a temporary file and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def sha256_bytes(data):
    return hashlib.sha256(data).hexdigest()


def json_bytes(obj):
    return (json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n").encode()


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")
