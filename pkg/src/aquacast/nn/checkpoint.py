"""Binary checkpoint container.

Layout, all integers little-endian::

    b"AQCK"  magic
    u32      format version
    u64      header length in bytes
    header   UTF-8 JSON, keys sorted
    payload  float64 little-endian arrays, concatenated in header["arrays"] order

The header lists each array as ``{"name": ..., "shape": [...]}``. Output is
a pure function of its inputs, so equal models give identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import DataError

MAGIC = b"AQCK"
VERSION = 1
_PREFIX = struct.Struct("<4sIQ")


def dumps(header: dict, arrays: dict) -> bytes:
    header = dict(header)
    header["arrays"] = [{"name": k, "shape": list(np.shape(v))} for k, v in arrays.items()]
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(v, dtype="<f8").tobytes() for v in arrays.values())
    return _PREFIX.pack(MAGIC, VERSION, len(blob)) + blob + payload


def loads(data: bytes):
    """Inverse of :func:`dumps`; returns ``(header, arrays)``."""
    if len(data) < _PREFIX.size:
        raise DataError("checkpoint is truncated")
    magic, version, n = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise DataError("not an aquacast checkpoint")
    if version != VERSION:
        raise DataError(f"unsupported checkpoint version {version}")
    start = _PREFIX.size
    try:
        header = json.loads(data[start : start + n].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"corrupt checkpoint header: {exc}") from None
    offset = start + n
    arrays = {}
    for entry in header.pop("arrays"):
        shape = tuple(entry["shape"])
        size = int(np.prod(shape, dtype=np.int64))
        end = offset + 8 * size
        if end > len(data):
            raise DataError("checkpoint payload is truncated")
        arrays[entry["name"]] = np.frombuffer(data, dtype="<f8", count=size, offset=offset).reshape(shape).copy()
        offset = end
    if offset != len(data):
        raise DataError("trailing bytes after checkpoint payload")
    return header, arrays


def save(path, header: dict, arrays: dict) -> None:
    Path(path).write_bytes(dumps(header, arrays))


def load(path):
    return loads(Path(path).read_bytes())
