"""Grid function files and CSV series.

Binary container layout (little-endian)::

    magic    4 bytes   b"LPGF"
    version  uint8     1
    dim      uint32
    n        uint32
    domain   uint8     0 = torus, 1 = window
    spectral uint8     0 = physical samples, 1 = centered frequency lattice
    period   float64   torus period or window side length
    values   n^d pairs of float64 (re, im), row-major
"""

from __future__ import annotations

import csv
import io
import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import PreconditionError
from .grid import TORUS, WINDOW, Grid, GridFunction

MAGIC = b"LPGF"
VERSION = 1
_HEADER = struct.Struct("<4sBIIBBd")
_DOMAIN_TAGS = {TORUS: 0, WINDOW: 1}
_TAG_DOMAINS = {v: k for k, v in _DOMAIN_TAGS.items()}


def to_bytes(f: GridFunction) -> bytes:
    g = f.grid
    header = _HEADER.pack(MAGIC, VERSION, g.dim, g.n, _DOMAIN_TAGS[g.domain],
                          int(f.spectral), g.length)
    body = np.ascontiguousarray(f.values.ravel(), dtype="<c16").tobytes()
    return header + body


def from_bytes(data: bytes) -> GridFunction:
    if len(data) < _HEADER.size:
        raise PreconditionError("truncated grid function container")
    magic, version, dim, n, tag, spectral, period = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise PreconditionError("not a grid function container")
    if version != VERSION:
        raise PreconditionError(f"unsupported container version {version}")
    if tag not in _TAG_DOMAINS:
        raise PreconditionError(f"unknown domain tag {tag}")
    grid = Grid(dim, n, _TAG_DOMAINS[tag], period)
    body = data[_HEADER.size:]
    if len(body) != 16 * grid.size:
        raise PreconditionError("container payload does not match its header")
    values = np.frombuffer(body, dtype="<c16").reshape(grid.shape)
    return GridFunction(grid, values, spectral=bool(spectral))


def save(f: GridFunction, path) -> Path:
    path = Path(path)
    path.write_bytes(to_bytes(f))
    return path


def load(path) -> GridFunction:
    return from_bytes(Path(path).read_bytes())


def to_csv(f: GridFunction) -> str:
    """One row per sample: index coordinates, physical coordinates, re, im."""
    g = f.grid
    d = g.dim
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    coord = "xi" if f.spectral else "x"
    w.writerow([f"i{k}" for k in range(d)] + [f"{coord}{k}" for k in range(d)] + ["re", "im"])
    axis = g.axis_frequencies() if f.spectral else g.axis_coordinates()
    for idx in np.ndindex(*g.shape):
        v = f.values[idx]
        w.writerow(list(idx) + [repr(float(axis[i])) for i in idx]
                   + [repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def write_series(path, header, rows) -> Path:
    """Write an RFC-4180 CSV file with a header row."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating, Fraction)):
        return repr(float(v))
    return v
