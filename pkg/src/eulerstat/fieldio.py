"""Binary on-disk format for time-stamped fields.

Layout (little-endian):

    bytes 0..3    magic "EULF"
    u32           format version (currently 1)
    u32           n1
    u32           n2
    u32           component count (1 scalar, 2 vector)
    f64           time stamp
    f64[...]      components in order (u then v), row-major cell values

Round trips are bitwise lossless.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FieldFormatError
from .grid import GridSpec, ScalarField, VectorField

MAGIC = b"EULF"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIId")


def write_field(path, field: VectorField | ScalarField, time: float) -> None:
    g = field.grid
    if isinstance(field, ScalarField):
        components = (field.values,)
    else:
        components = (field.u, field.v)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, g.n1, g.n2, len(components), float(time)))
        for comp in components:
            fh.write(np.ascontiguousarray(comp, dtype="<f8").tobytes())


def read_field(path) -> tuple[VectorField | ScalarField, float]:
    """Read a field file; returns (field, time)."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldFormatError(f"{path}: truncated header")
    magic, version, n1, n2, ncomp, time = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FieldFormatError(f"{path}: unsupported format version {version}")
    if ncomp not in (1, 2):
        raise FieldFormatError(f"{path}: unsupported component count {ncomp}")
    expected = _HEADER.size + 8 * ncomp * n1 * n2
    if len(raw) != expected:
        raise FieldFormatError(f"{path}: size {len(raw)} does not match header (expected {expected})")
    grid = GridSpec(n1, n2)
    payload = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    comps = payload.reshape(ncomp, n1, n2).astype(np.float64)
    if ncomp == 1:
        return ScalarField(grid, comps[0]), time
    return VectorField(grid, comps[0], comps[1]), time
