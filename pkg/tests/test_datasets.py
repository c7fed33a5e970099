import gzip
import struct

import numpy as np
import pytest

from datasets import (
    LabeledDataset,
    augment_batch,
    blobs_split,
    dataset_signature,
    load_cifar10_bin,
    load_cifar100_bin,
    load_dataset,
    load_mnist_idx,
    standardize,
    synthetic_blobs,
    synthetic_gaussian,
    write_cifar_bin,
)
from models.schemas import DatasetConfig, DatasetName
from tensor_core import DataError, DatasetIOError, DatasetMissingError, FormatError


def _write_idx_images(path, pixels):
    n, rows, cols = pixels.shape
    path.write_bytes(struct.pack(">IIII", 0x803, n, rows, cols) + pixels.astype(np.uint8).tobytes())
    return path


def _write_idx_labels(path, labels):
    path.write_bytes(struct.pack(">II", 0x801, len(labels)) + np.asarray(labels, dtype=np.uint8).tobytes())
    return path


def test_mnist_idx_zero_image(tmp_path):
    """Test a hand-built 1-image IDX pair"""
    images = _write_idx_images(tmp_path / "img", np.zeros((1, 28, 28)))
    labels = _write_idx_labels(tmp_path / "lbl", [5])
    ds = load_mnist_idx(images, labels)
    assert ds.images.shape == (1, 1, 28, 28)
    assert not ds.images.any()
    assert ds.labels.tolist() == [5]
    assert ds.num_classes == 10


def test_mnist_idx_scales_255_to_one(tmp_path):
    """Test byte 255 maps to exactly 1.0"""
    pixels = np.zeros((2, 3, 3))
    pixels[1, 2, 0] = 255
    pixels[0, 0, 1] = 51
    ds = load_mnist_idx(_write_idx_images(tmp_path / "img", pixels), _write_idx_labels(tmp_path / "lbl", [0, 9]))
    assert ds.images[1, 0, 2, 0] == 1.0
    assert ds.images[0, 0, 0, 1] == 0.2


def test_mnist_idx_reads_gzip(tmp_path):
    """Test .gz files decompress transparently"""
    raw = _write_idx_images(tmp_path / "img", np.full((1, 2, 2), 255))
    gz = tmp_path / "img.gz"
    gz.write_bytes(gzip.compress(raw.read_bytes()))
    ds = load_mnist_idx(gz, _write_idx_labels(tmp_path / "lbl", [3]))
    assert np.all(ds.images == 1.0)


def test_mnist_idx_bad_magic_reports_the_value(tmp_path):
    """Test a wrong magic is a format error naming what was read"""
    images = tmp_path / "img"
    images.write_bytes(struct.pack(">IIII", 0x1234, 1, 1, 1) + b"\0")
    with pytest.raises(FormatError, match="0x00001234"):
        load_mnist_idx(images, _write_idx_labels(tmp_path / "lbl", [0]))


def test_mnist_idx_truncated(tmp_path):
    """Test a short pixel block is an I/O error"""
    images = tmp_path / "img"
    images.write_bytes(struct.pack(">IIII", 0x803, 2, 2, 2) + b"\0" * 5)
    with pytest.raises(DatasetIOError, match="truncated"):
        load_mnist_idx(images, _write_idx_labels(tmp_path / "lbl", [0, 1]))


def test_mnist_idx_count_mismatch(tmp_path):
    """Test image and label counts must agree"""
    images = _write_idx_images(tmp_path / "img", np.zeros((2, 2, 2)))
    with pytest.raises(FormatError):
        load_mnist_idx(images, _write_idx_labels(tmp_path / "lbl", [1]))


def test_missing_file_is_dataset_missing(tmp_path):
    """Test absent files raise DatasetMissingError"""
    with pytest.raises(DatasetMissingError):
        load_mnist_idx(tmp_path / "nope", tmp_path / "nope2")


def test_cifar10_single_record(tmp_path):
    """Test one record with label 7 and every pixel 128"""
    path = tmp_path / "batch.bin"
    path.write_bytes(bytes([7]) + bytes([128]) * 3072)
    ds = load_cifar10_bin([path])
    assert len(ds) == 1
    assert ds.labels.tolist() == [7]
    assert ds.images.shape == (1, 3, 32, 32)
    assert np.all(ds.images == 128 / 255)


def test_cifar10_concatenates_batches(tmp_path):
    """Test records from several files are stacked in order"""
    paths = []
    for i in range(3):
        path = tmp_path / f"data_batch_{i}.bin"
        path.write_bytes((bytes([i]) + bytes([i * 10]) * 3072) * 2)
        paths.append(path)
    ds = load_cifar10_bin(paths)
    assert len(ds) == 6
    assert ds.labels.tolist() == [0, 0, 1, 1, 2, 2]


def test_cifar_bad_length(tmp_path):
    """Test a partial record is a format error stating the record size"""
    path = tmp_path / "batch.bin"
    path.write_bytes(bytes(3074))
    with pytest.raises(FormatError, match="3073"):
        load_cifar10_bin([path])


def test_cifar100_keeps_the_fine_label(tmp_path):
    """Test the second label byte becomes the label"""
    path = tmp_path / "train.bin"
    path.write_bytes(bytes([4, 87]) + bytes(3072))
    ds = load_cifar100_bin([path])
    assert ds.labels.tolist() == [87]
    assert ds.num_classes == 100


def test_write_cifar_bin_reloads(tmp_path):
    """Test the writer's output parses back to the same bytes"""
    rng = np.random.Generator(np.random.PCG64(0))
    pixels = rng.integers(0, 256, size=(3, 3, 32, 32)) / 255.0
    ds = LabeledDataset(pixels, np.array([1, 9, 4]), 10)
    path = write_cifar_bin(ds, tmp_path / "out.bin")
    assert path.stat().st_size == 3 * 3073
    again = load_cifar10_bin([path])
    assert again.labels.tolist() == [1, 9, 4]
    assert np.array_equal(np.rint(again.images * 255), np.rint(pixels * 255))


def test_labeled_dataset_validation():
    """Test empty sets, bad labels and unscaled pixels are rejected"""
    with pytest.raises(DataError):
        LabeledDataset(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), 2)
    with pytest.raises(DataError):
        LabeledDataset(np.zeros((2, 2)), np.array([0, 2]), 2)
    with pytest.raises(DataError):
        LabeledDataset(np.full((1, 2), 3.0), np.array([0]), 2)


def test_standardize_channels():
    """Test per-channel zero mean and unit std, and reuse of train stats"""
    rng = np.random.Generator(np.random.PCG64(1))
    images = rng.random((20, 3, 4, 4))
    images[:, 1] *= 0.1
    train = LabeledDataset(images, np.zeros(20, dtype=np.int64), 2)
    standardized, stats = standardize(train)
    assert standardized.normalized
    assert np.allclose(standardized.images.mean(axis=(0, 2, 3)), 0.0, atol=1e-12)
    assert np.allclose(standardized.images.std(axis=(0, 2, 3)), 1.0)

    test = LabeledDataset(images[:5], np.zeros(5, dtype=np.int64), 2, split="test")
    again, same = standardize(test, stats)
    assert same is stats
    assert np.allclose(again.images, standardized.images[:5])


def test_standardize_constant_channel():
    """Test a constant channel becomes zeros instead of dividing by zero"""
    images = np.full((4, 1, 2, 2), 0.5)
    standardized, stats = standardize(LabeledDataset(images, np.zeros(4, dtype=np.int64), 2))
    assert not standardized.images.any()
    assert stats.std[0] > 0


def test_synthetic_blobs_without_spread():
    """Test spread 0 puts every sample on its unit-norm class mean"""
    ds = synthetic_blobs(3, 30, 5, 3, 0.0)
    assert np.allclose(np.linalg.norm(ds.images, axis=1), 1.0)
    for label in range(3):
        members = ds.images[ds.labels == label]
        assert len(members) == 10
        assert np.allclose(members, members[0])


def test_blobs_split_shapes():
    """Test train/test sizes and the optional image reshape"""
    cfg = DatasetConfig(n_train=12, n_test=6, dim=16, classes=2, image_shape=[1, 4, 4])
    train, test = blobs_split(cfg)
    assert train.images.shape == (12, 1, 4, 4)
    assert test.images.shape == (6, 1, 4, 4)
    assert blobs_split(cfg.model_copy(update={"n_test": 0}))[1] is None


def test_synthetic_gaussian_covariance():
    """Test the sample covariance approaches the requested one"""
    cov = np.array([[2.0, 0.6], [0.6, 1.0]])
    samples = synthetic_gaussian(4, 20_000, cov)
    assert np.allclose(np.cov(samples.T), cov, atol=0.08)


def test_augment_batch():
    """Test flip and crop keep shapes, and no-op settings return the input"""
    rng = np.random.Generator(np.random.PCG64(2))
    x = np.arange(2 * 1 * 4 * 4, dtype=float).reshape(2, 1, 4, 4)
    assert augment_batch(x, rng) is x
    out = augment_batch(x, rng, flip=True, crop_pad=1)
    assert out.shape == x.shape
    flipped = augment_batch(x, np.random.Generator(np.random.PCG64(3)), flip=True)
    for b in range(2):
        assert np.array_equal(flipped[b], x[b]) or np.array_equal(flipped[b], x[b][..., ::-1])


def test_dataset_signature():
    """Test shapes and class counts are known without loading"""
    assert dataset_signature(DatasetConfig(dim=8, classes=4)) == ([8], 4)
    assert dataset_signature(DatasetConfig(name=DatasetName.MNIST)) == ([1, 28, 28], 10)
    assert dataset_signature(DatasetConfig(name=DatasetName.CIFAR100)) == ([3, 32, 32], 100)


def test_load_dataset_missing_files_give_a_hint(tmp_path):
    """Test missing MNIST files raise with a download hint"""
    with pytest.raises(DatasetMissingError, match="download"):
        load_dataset(DatasetConfig(name=DatasetName.MNIST), tmp_path)


def test_load_dataset_reads_cifar10_layout(tmp_path):
    """Test the CIFAR-10 folder layout, subsetting and standardization"""
    folder = tmp_path / "cifar-10-batches-bin"
    folder.mkdir()

    def record(label, value):
        return bytes([label]) + bytes([value]) * 3072

    for i in range(1, 6):
        (folder / f"data_batch_{i}.bin").write_bytes(record(i, 10 * i) + record(0, 5))
    (folder / "test_batch.bin").write_bytes(record(3, 100))
    cfg = DatasetConfig(name=DatasetName.CIFAR10, max_train=4, standardize=True)
    train, test = load_dataset(cfg, tmp_path)
    assert len(train) == 4
    assert len(test) == 1
    assert train.normalized and test.normalized
    assert np.allclose(train.images.mean(axis=(0, 2, 3)), 0.0, atol=1e-12)
