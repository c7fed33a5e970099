from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from tensor_core import DataError, Tensor


@dataclass(frozen=True)
class LabeledDataset:
    """N samples with integer labels in [0, num_classes).

    Image tensors are N×C×H×W in [0, 1] until `normalized` is set; vector
    data (synthetic blobs) is N×d and marked normalized from the start.
    """

    images: Tensor
    labels: np.ndarray
    num_classes: int
    split: str = "train"
    normalized: bool = False

    def __post_init__(self) -> None:
        n = self.images.shape[0] if self.images.ndim else 0
        if n == 0:
            raise DataError(f"{self.split} dataset is empty")
        if self.labels.shape != (n,):
            raise DataError(f"{self.split} dataset has {n} samples but labels of shape {self.labels.shape}")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise DataError(
                f"{self.split} labels must lie in [0, {self.num_classes}), "
                f"got [{self.labels.min()}, {self.labels.max()}]"
            )
        if not self.normalized and (self.images.min() < 0.0 or self.images.max() > 1.0):
            raise DataError(f"{self.split} pixels must lie in [0, 1] before normalization")

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def sample_shape(self) -> Tuple[int, ...]:
        return tuple(self.images.shape[1:])

    def subset(self, count: int) -> "LabeledDataset":
        """First `count` samples (file order)."""
        if count >= len(self):
            return self
        return replace(self, images=self.images[:count], labels=self.labels[:count])
