from datasets.dataset import LabeledDataset
from datasets.loaders import (
    load_cifar10_bin,
    load_cifar100_bin,
    load_mnist_idx,
    write_cifar_bin,
)
from datasets.registry import FETCH_HINTS, dataset_signature, load_dataset
from datasets.synthetic import blobs_split, synthetic_blobs, synthetic_gaussian
from datasets.transforms import ChannelStats, augment_batch, standardize

__all__ = [
    "LabeledDataset",
    "load_mnist_idx",
    "load_cifar10_bin",
    "load_cifar100_bin",
    "write_cifar_bin",
    "ChannelStats",
    "standardize",
    "augment_batch",
    "synthetic_blobs",
    "blobs_split",
    "synthetic_gaussian",
    "load_dataset",
    "dataset_signature",
    "FETCH_HINTS",
]
