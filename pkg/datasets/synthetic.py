"""Seeded synthetic data for property tests and desk-scale experiments."""

from typing import Optional, Tuple

import numpy as np

from datasets.dataset import LabeledDataset
from models.schemas import DatasetConfig
from tensor_core import DimensionError, ParameterError, Tensor


def synthetic_blobs(seed: int, n: int, d: int, k: int, spread: float, split: str = "train") -> LabeledDataset:
    """k isotropic Gaussian clusters whose means lie on the unit sphere.

    Labels are balanced (round-robin, then shuffled).
    """
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    if spread < 0:
        raise ParameterError(f"spread must be >= 0, got {spread}")
    rng = np.random.Generator(np.random.PCG64(seed))
    means = rng.standard_normal((k, d))
    means /= np.linalg.norm(means, axis=1, keepdims=True)
    labels = np.arange(n, dtype=np.int64) % k
    rng.shuffle(labels)
    points = means[labels] + spread * rng.standard_normal((n, d))
    return LabeledDataset(points, labels, k, split, normalized=True)


def blobs_split(cfg: DatasetConfig) -> Tuple[LabeledDataset, Optional[LabeledDataset]]:
    """Train/test splits drawn from one set of cluster means.

    With `image_shape`, samples are reshaped to C×H×W for conv networks.
    """
    full = synthetic_blobs(cfg.seed, cfg.n_train + cfg.n_test, cfg.dim, cfg.classes, cfg.spread)
    images = full.images
    if cfg.image_shape is not None:
        images = images.reshape((len(full),) + tuple(cfg.image_shape))
    train = LabeledDataset(images[: cfg.n_train], full.labels[: cfg.n_train], cfg.classes, "train", normalized=True)
    if cfg.n_test == 0:
        return train, None
    test = LabeledDataset(images[cfg.n_train :], full.labels[cfg.n_train :], cfg.classes, "test", normalized=True)
    return train, test


def synthetic_gaussian(seed: int, n: int, covariance: Tensor) -> Tensor:
    """n zero-mean samples with the given covariance (Cholesky factor of it)."""
    covariance = np.asarray(covariance, dtype=np.float64)
    if covariance.ndim != 2 or covariance.shape[0] != covariance.shape[1]:
        raise DimensionError(f"covariance must be square, got {covariance.shape}")
    try:
        factor = np.linalg.cholesky(covariance)
    except np.linalg.LinAlgError:
        raise ParameterError("covariance must be symmetric positive definite") from None
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal((n, covariance.shape[0])) @ factor.T
