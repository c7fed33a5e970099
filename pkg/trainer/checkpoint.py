"""Versioned binary checkpoint container.

Layout (all integers little-endian):
    b"GHLCKPT1"
    u64  metadata length
    UTF-8 JSON {format_version, config, epoch, rng_state, layers}
    per layer, in the order listed in metadata["layers"]:
        u32 layer id, u32 ndim, ndim × u64 extents, float64 data (C order)
"""

import json
import logging
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from models.schemas import TrainConfig
from tensor_core import FormatError, Tensor

logger = logging.getLogger(__name__)

MAGIC = b"GHLCKPT1"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    weights: Dict[int, Tensor]
    config: TrainConfig
    rng_state: Dict[str, Any]
    epoch: int


def save_checkpoint(path: Union[str, Path], checkpoint: Checkpoint) -> Path:
    path = Path(path)
    layer_ids = sorted(checkpoint.weights)
    metadata = {
        "format_version": FORMAT_VERSION,
        "config": checkpoint.config.model_dump(mode="json"),
        "epoch": checkpoint.epoch,
        "rng_state": checkpoint.rng_state,
        "layers": layer_ids,
    }
    blob = json.dumps(metadata, sort_keys=True).encode("utf-8")

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for lid in layer_ids:
            w = np.ascontiguousarray(checkpoint.weights[lid], dtype="<f8")
            f.write(struct.pack("<II", lid, w.ndim))
            f.write(struct.pack(f"<{w.ndim}Q", *w.shape))
            f.write(w.tobytes(order="C"))
    os.replace(tmp, path)
    logger.debug(f"Wrote checkpoint {path} (epoch {checkpoint.epoch})")
    return path


def _unpack(fmt: str, data: bytes, offset: int, path: Path) -> tuple:
    try:
        return struct.unpack_from(fmt, data, offset)
    except struct.error:
        raise FormatError(f"{path}: truncated checkpoint at byte {offset}") from None


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    data = path.read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: bad checkpoint magic {data[:len(MAGIC)]!r}, expected {MAGIC!r}")
    offset = len(MAGIC)
    (meta_len,) = _unpack("<Q", data, offset, path)
    offset += 8
    if offset + meta_len > len(data):
        raise FormatError(f"{path}: truncated checkpoint metadata")
    try:
        metadata = json.loads(data[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable checkpoint metadata: {exc}") from exc
    offset += meta_len
    if metadata.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {metadata.get('format_version')!r}")

    weights: Dict[int, Tensor] = {}
    for expected_id in metadata["layers"]:
        lid, ndim = _unpack("<II", data, offset, path)
        offset += 8
        if lid != expected_id:
            raise FormatError(f"{path}: expected layer {expected_id}, found {lid}")
        shape = _unpack(f"<{ndim}Q", data, offset, path)
        offset += 8 * ndim
        count = int(np.prod(shape, dtype=np.int64))
        if offset + 8 * count > len(data):
            raise FormatError(f"{path}: truncated data for layer {lid}")
        weights[lid] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(np.float64).reshape(shape)
        offset += 8 * count
    if offset != len(data):
        raise FormatError(f"{path}: {len(data) - offset} trailing bytes after the last layer")

    return Checkpoint(
        weights=weights,
        config=TrainConfig.model_validate(metadata["config"]),
        rng_state=metadata["rng_state"],
        epoch=int(metadata["epoch"]),
    )
