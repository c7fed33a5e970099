"""Parsers for the MNIST IDX and CIFAR binary formats, plus a CIFAR writer."""

import gzip
import logging
import struct
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np

from datasets.dataset import LabeledDataset
from tensor_core import DataError, DatasetIOError, DatasetMissingError, FormatError, ParameterError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
CIFAR_SIDE = 32
CIFAR_PIXELS = 3 * CIFAR_SIDE * CIFAR_SIDE


def _read_bytes(path: PathLike) -> bytes:
    """Whole file; `.gz` files are decompressed transparently."""
    path = Path(path)
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rb") as f:
                return f.read()
        return path.read_bytes()
    except FileNotFoundError:
        raise DatasetMissingError(f"{path} not found") from None
    except (OSError, EOFError) as exc:
        raise DatasetIOError(f"{path}: {exc}") from exc


def _read_idx(path: PathLike, expected_magic: int, ndim: int) -> Tuple[Tuple[int, ...], np.ndarray]:
    data = _read_bytes(path)
    header = 4 + 4 * ndim
    if len(data) < 4:
        raise DatasetIOError(f"{path}: truncated IDX header ({len(data)} bytes)")
    (magic,) = struct.unpack_from(">I", data, 0)
    if magic != expected_magic:
        raise FormatError(f"{path}: bad IDX magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    if len(data) < header:
        raise DatasetIOError(f"{path}: truncated IDX header ({len(data)} bytes)")
    dims = struct.unpack_from(f">{ndim}I", data, 4)
    count = int(np.prod(dims, dtype=np.int64))
    if len(data) - header < count:
        raise DatasetIOError(f"{path}: truncated, expected {count} data bytes, found {len(data) - header}")
    return dims, np.frombuffer(data, dtype=np.uint8, count=count, offset=header)


def load_mnist_idx(images_path: PathLike, labels_path: PathLike, split: str = "train") -> LabeledDataset:
    (n, rows, cols), pixels = _read_idx(images_path, IDX_IMAGE_MAGIC, 3)
    (m,), labels = _read_idx(labels_path, IDX_LABEL_MAGIC, 1)
    if n != m:
        raise FormatError(f"{images_path} holds {n} images but {labels_path} holds {m} labels")
    images = pixels.reshape(n, 1, rows, cols).astype(np.float64) / 255.0
    logger.info(f"Loaded MNIST {split}: {n} images of {rows}x{cols}")
    return LabeledDataset(images, labels.astype(np.int64), 10, split)


def _load_cifar(paths: Sequence[PathLike], label_bytes: int, num_classes: int, split: str) -> LabeledDataset:
    if not paths:
        raise DataError("no CIFAR batch files given")
    record = label_bytes + CIFAR_PIXELS
    images, labels = [], []
    for path in paths:
        data = _read_bytes(path)
        if len(data) == 0 or len(data) % record:
            raise FormatError(f"{path}: length {len(data)} is not a positive multiple of {record}")
        raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, record)
        # the last label byte is the fine label for CIFAR-100
        labels.append(raw[:, label_bytes - 1])
        images.append(raw[:, label_bytes:].reshape(-1, 3, CIFAR_SIDE, CIFAR_SIDE))
    pixels = np.concatenate(images).astype(np.float64) / 255.0
    logger.info(f"Loaded CIFAR-{num_classes} {split}: {pixels.shape[0]} images from {len(paths)} file(s)")
    return LabeledDataset(pixels, np.concatenate(labels).astype(np.int64), num_classes, split)


def load_cifar10_bin(batch_paths: Sequence[PathLike], split: str = "train") -> LabeledDataset:
    """Records of 1 label byte + 3072 pixel bytes (R, G, B planes of 32×32)."""
    return _load_cifar(batch_paths, 1, 10, split)


def load_cifar100_bin(batch_paths: Sequence[PathLike], split: str = "train") -> LabeledDataset:
    """Records of 2 label bytes (coarse, fine) + 3072 pixel bytes; the fine label is kept."""
    return _load_cifar(batch_paths, 2, 100, split)


def write_cifar_bin(ds: LabeledDataset, path: PathLike, label_bytes: int = 1) -> Path:
    """Quantize to bytes and write in the CIFAR layout (coarse label written as 0)."""
    if label_bytes not in (1, 2):
        raise ParameterError(f"label_bytes must be 1 or 2, got {label_bytes}")
    if ds.sample_shape != (3, CIFAR_SIDE, CIFAR_SIDE):
        raise DataError(f"CIFAR records hold 3×32×32 images, got {list(ds.sample_shape)}")
    if ds.num_classes > 256:
        raise DataError(f"{ds.num_classes} classes do not fit a label byte")
    n = len(ds)
    pixels = np.clip(np.rint(ds.images * 255.0), 0, 255).astype(np.uint8).reshape(n, CIFAR_PIXELS)
    header = np.zeros((n, label_bytes), dtype=np.uint8)
    header[:, -1] = ds.labels
    path = Path(path)
    path.write_bytes(np.concatenate([header, pixels], axis=1).tobytes())
    return path
