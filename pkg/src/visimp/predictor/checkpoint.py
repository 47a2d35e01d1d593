"""Checkpoint file format.

Layout:  magic "VISIMP1\\0" | uint32-LE header length | UTF-8 JSON header
         | raw little-endian float32 tensor blob.

The header carries the architecture descriptor, training metadata, and a
tensor directory of (name, shape, byte offset) entries in blob order.
Parameters are float64 in memory and rounded to float32 on disk; loading
widens back to float64, so save(load(path)) is byte-stable and a loaded
checkpoint always reproduces identical forward outputs.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from .model import Architecture

MAGIC = b"VISIMP1\x00"
_MAX_HEADER = 1 << 24


@dataclass
class ModelCheckpoint:
    """Named parameter tensors plus the architecture that shapes them."""

    architecture: Architecture
    params: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = self.architecture.param_shapes()
        if set(self.params) != set(expected):
            missing = set(expected) - set(self.params)
            extra = set(self.params) - set(expected)
            raise CheckpointError(
                f"parameter names do not match architecture "
                f"(missing={sorted(missing)}, extra={sorted(extra)})"
            )
        for name, shape in expected.items():
            if tuple(self.params[name].shape) != shape:
                raise CheckpointError(
                    f"tensor {name} has shape {self.params[name].shape}, "
                    f"expected {shape}"
                )


def save_checkpoint(ckpt: ModelCheckpoint, path: str | Path) -> None:
    names = sorted(ckpt.params)
    tensors = []
    blob = bytearray()
    for name in names:
        arr = np.ascontiguousarray(ckpt.params[name], dtype="<f4")
        tensors.append(
            {"name": name, "shape": list(arr.shape), "offset": len(blob)}
        )
        blob.extend(arr.tobytes())
    header = json.dumps(
        {
            "architecture": ckpt.architecture.to_dict(),
            "metadata": ckpt.metadata,
            "tensors": tensors,
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        f.write(bytes(blob))


def load_checkpoint(path: str | Path) -> ModelCheckpoint:
    try:
        raw = Path(path).read_bytes()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(raw) < len(MAGIC) + 4 or raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path} is not a VISIMP1 checkpoint")
    (header_len,) = struct.unpack_from("<I", raw, len(MAGIC))
    header_start = len(MAGIC) + 4
    if header_len > _MAX_HEADER or header_start + header_len > len(raw):
        raise CheckpointError(f"{path}: header length out of range")
    try:
        header = json.loads(raw[header_start : header_start + header_len])
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: malformed header JSON") from exc
    arch = Architecture.from_dict(header.get("architecture", {}))
    blob = raw[header_start + header_len :]
    params: dict[str, np.ndarray] = {}
    try:
        entries = list(header["tensors"])
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"{path}: missing tensor directory") from exc
    for entry in entries:
        try:
            name = str(entry["name"])
            shape = tuple(int(s) for s in entry["shape"])
            offset = int(entry["offset"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"{path}: bad tensor entry {entry}") from exc
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        end = offset + 4 * count
        if offset < 0 or end > len(blob):
            raise CheckpointError(f"{path}: tensor {name} overruns blob")
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
        params[name] = arr.reshape(shape).astype(np.float64)
    return ModelCheckpoint(
        architecture=arch, params=params, metadata=header.get("metadata", {})
    )
