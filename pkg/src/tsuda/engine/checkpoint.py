"""Binary checkpoint format: named float64 arrays behind a magic header.

Layout: 4-byte magic "LGRA", 1 version byte, then records of
(u16 name length, UTF-8 name, u8 ndim, u32 dims..., float64 payload),
all little-endian, until end of file.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError

MAGIC = b"LGRA"
VERSION = 1


def write_checkpoint(path, entries: dict[str, np.ndarray]) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes([VERSION]))
        for name, arr in entries.items():
            arr = np.asarray(arr, dtype="<f8")
            raw_name = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw_name)))
            fh.write(raw_name)
            fh.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(arr.tobytes())


def read_checkpoint(path) -> dict[str, np.ndarray]:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise FormatError(f"bad checkpoint magic in {path}")
    if len(blob) < 5 or blob[4] != VERSION:
        raise FormatError(f"unsupported checkpoint version in {path}")
    entries: dict[str, np.ndarray] = {}
    pos = 5
    try:
        while pos < len(blob):
            (name_len,) = struct.unpack_from("<H", blob, pos)
            pos += 2
            name = blob[pos:pos + name_len].decode("utf-8")
            pos += name_len
            (ndim,) = struct.unpack_from("<B", blob, pos)
            pos += 1
            shape = struct.unpack_from(f"<{ndim}I", blob, pos) if ndim else ()
            pos += 4 * ndim
            count = int(np.prod(shape)) if ndim else 1
            end = pos + 8 * count
            if end > len(blob):
                raise FormatError(f"truncated payload for entry '{name}' in {path}")
            entries[name] = np.frombuffer(blob[pos:end], dtype="<f8").reshape(shape).copy()
            pos = end
    except struct.error as exc:
        raise FormatError(f"truncated checkpoint {path}") from exc
    return entries
