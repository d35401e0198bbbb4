"""Versioned binary checkpoints.

Layout: magic ``ICKP`` + uint32 version + uint64 manifest length +
manifest JSON + concatenated raw float64 little-endian tensor payloads.
The manifest records each tensor's name, shape, and CRC32, plus arbitrary
caller metadata (e.g. the layer list).
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import DataError

MAGIC = b"ICKP"
VERSION = 1


def save_checkpoint(path: str | Path, params: dict[str, np.ndarray], meta: dict | None = None) -> None:
    payloads = {}
    tensors = []
    for name, value in params.items():
        raw = np.ascontiguousarray(value, dtype="<f8").tobytes()
        payloads[name] = raw
        tensors.append({"name": name, "shape": list(np.shape(value)), "crc32": zlib.crc32(raw)})
    manifest = json.dumps({"meta": meta or {}, "tensors": tensors}).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(manifest)))
        fh.write(manifest)
        for item in tensors:
            fh.write(payloads[item["name"]])


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    """Read a checkpoint, verifying magic, version, and per-tensor CRCs."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise DataError(f"{path}: not a checkpoint file (bad magic {data[:4]!r})")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    (manifest_len,) = struct.unpack_from("<Q", data, 8)
    try:
        manifest = json.loads(data[16 : 16 + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: corrupt manifest: {exc}") from exc
    params: dict[str, np.ndarray] = {}
    offset = 16 + manifest_len
    for item in manifest["tensors"]:
        count = int(np.prod(item["shape"])) if item["shape"] else 1
        nbytes = 8 * count
        raw = data[offset : offset + nbytes]
        if len(raw) != nbytes:
            raise DataError(f"{path}: truncated payload for tensor {item['name']!r}")
        if zlib.crc32(raw) != item["crc32"]:
            raise DataError(f"{path}: checksum mismatch for tensor {item['name']!r}")
        params[item["name"]] = np.frombuffer(raw, dtype="<f8").reshape(item["shape"]).copy()
        offset += nbytes
    return params, manifest["meta"]
