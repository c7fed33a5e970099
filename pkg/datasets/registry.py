"""Resolve a DatasetConfig to train/test splits under the data directory."""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from datasets.dataset import LabeledDataset
from datasets.loaders import load_cifar10_bin, load_cifar100_bin, load_mnist_idx
from datasets.synthetic import blobs_split
from datasets.transforms import standardize
from models.schemas import DatasetConfig, DatasetName
from tensor_core import DatasetMissingError

logger = logging.getLogger(__name__)

FETCH_HINTS: Dict[DatasetName, str] = {
    DatasetName.MNIST: (
        "download train/t10k images and labels (idx-ubyte, optionally .gz) from "
        "http://yann.lecun.com/exdb/mnist/ into <data_dir>/mnist/"
    ),
    DatasetName.CIFAR10: (
        "download cifar-10-binary.tar.gz from https://www.cs.toronto.edu/~kriz/cifar.html "
        "and extract it into <data_dir>/ (creates cifar-10-batches-bin/)"
    ),
    DatasetName.CIFAR100: (
        "download cifar-100-binary.tar.gz from https://www.cs.toronto.edu/~kriz/cifar.html "
        "and extract it into <data_dir>/ (creates cifar-100-binary/)"
    ),
}

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def dataset_signature(cfg: DatasetConfig) -> Tuple[List[int], int]:
    """(sample shape, number of classes) without touching the disk."""
    if cfg.name == DatasetName.BLOBS:
        return list(cfg.image_shape or [cfg.dim]), cfg.classes
    if cfg.name == DatasetName.MNIST:
        return [1, 28, 28], 10
    if cfg.name == DatasetName.CIFAR10:
        return [3, 32, 32], 10
    return [3, 32, 32], 100


def _require(name: DatasetName, path: Path) -> Path:
    if path.exists():
        return path
    gz = path.with_name(path.name + ".gz")
    if gz.exists():
        return gz
    raise DatasetMissingError(f"{name.value} file {path} not found; {FETCH_HINTS[name]}")


def _load_files(cfg: DatasetConfig, root: Path) -> Tuple[LabeledDataset, LabeledDataset]:
    if cfg.name == DatasetName.MNIST:
        splits = []
        for split, (images, labels) in MNIST_FILES.items():
            folder = root / "mnist"
            splits.append(load_mnist_idx(_require(cfg.name, folder / images), _require(cfg.name, folder / labels), split))
        return splits[0], splits[1]
    if cfg.name == DatasetName.CIFAR10:
        folder = root / "cifar-10-batches-bin"
        train_paths = [_require(cfg.name, folder / f"data_batch_{i}.bin") for i in range(1, 6)]
        test_paths = [_require(cfg.name, folder / "test_batch.bin")]
        return load_cifar10_bin(train_paths, "train"), load_cifar10_bin(test_paths, "test")
    folder = root / "cifar-100-binary"
    return (
        load_cifar100_bin([_require(cfg.name, folder / "train.bin")], "train"),
        load_cifar100_bin([_require(cfg.name, folder / "test.bin")], "test"),
    )


def load_dataset(
    cfg: DatasetConfig, data_dir: Union[str, Path, None] = None
) -> Tuple[LabeledDataset, Optional[LabeledDataset]]:
    if cfg.name == DatasetName.BLOBS:
        train, test = blobs_split(cfg)
    else:
        if data_dir is None:
            raise DatasetMissingError(f"no data directory set for {cfg.name.value}; set GHL_DATA_DIR")
        train, test = _load_files(cfg, Path(data_dir))

    if cfg.max_train is not None:
        train = train.subset(cfg.max_train)
    if test is not None and cfg.max_test is not None:
        test = test.subset(cfg.max_test)
    if cfg.standardize:
        train, stats = standardize(train)
        if test is not None:
            test, _ = standardize(test, stats)
    logger.info(f"Dataset {cfg.name.value}: {len(train)} train / {len(test) if test is not None else 0} test samples")
    return train, test
