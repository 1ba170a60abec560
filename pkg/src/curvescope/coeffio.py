"""CVL1 binary coefficient files.

Layout (all integers little-endian u32)::

    b"CVL1" m n J n_theta finest        finest: 0 = curvelets, 1 = wavelets
    for each scale j = 1..J, angle l = 1..N(j):
        rows cols  then rows*cols complex samples as (re, im) float64 LE pairs

Scales and angles are stored in ascending 1-based order; scale 1 is the
single lowpass block.
"""
from __future__ import annotations

import os
import struct

import numpy as np

from .fdct import FINEST_MODES, CurveletCoeffs, angle_counts

__all__ = ["MAGIC", "CVLFormatError", "dumps", "loads", "save_coeffs", "load_coeffs"]

MAGIC = b"CVL1"
_HEADER = struct.Struct("<4s5I")
_DIMS = struct.Struct("<2I")
_SAMPLE = np.dtype("<c16")


class CVLFormatError(ValueError):
    pass


def dumps(coeffs: CurveletCoeffs) -> bytes:
    parts = [
        _HEADER.pack(MAGIC, coeffs.m, coeffs.n, coeffs.J, coeffs.n_theta, FINEST_MODES.index(coeffs.finest))
    ]
    for _, _, c in coeffs:
        rows, cols = c.shape
        parts.append(_DIMS.pack(rows, cols))
        parts.append(np.ascontiguousarray(c, dtype=_SAMPLE).tobytes())
    return b"".join(parts)


def loads(buf: bytes) -> CurveletCoeffs:
    if len(buf) < _HEADER.size:
        raise CVLFormatError("truncated header")
    magic, m, n, J, n_theta, finest = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise CVLFormatError(f"bad magic {magic!r}")
    if finest >= len(FINEST_MODES):
        raise CVLFormatError(f"bad finest mode {finest}")
    mode = FINEST_MODES[finest]
    offset = _HEADER.size
    data = []
    for count in angle_counts(J, n_theta, mode):
        scale = []
        for _ in range(count):
            if offset + _DIMS.size > len(buf):
                raise CVLFormatError("truncated wedge header")
            rows, cols = _DIMS.unpack_from(buf, offset)
            offset += _DIMS.size
            nbytes = rows * cols * _SAMPLE.itemsize
            if offset + nbytes > len(buf):
                raise CVLFormatError("truncated wedge payload")
            arr = np.frombuffer(buf, dtype=_SAMPLE, count=rows * cols, offset=offset)
            scale.append(arr.reshape(rows, cols).astype(np.complex128))
            offset += nbytes
        data.append(scale)
    if offset != len(buf):
        raise CVLFormatError(f"{len(buf) - offset} trailing bytes")
    return CurveletCoeffs(m, n, J, n_theta, mode, data)


def save_coeffs(coeffs: CurveletCoeffs, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(coeffs))


def load_coeffs(path: str | os.PathLike) -> CurveletCoeffs:
    with open(path, "rb") as fh:
        return loads(fh.read())
