from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from datasets.dataset import LabeledDataset
from tensor_core import DimensionError, ParameterError, Tensor

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class ChannelStats:
    mean: Tensor
    std: Tensor


def standardize(ds: LabeledDataset, stats: Optional[ChannelStats] = None) -> Tuple[LabeledDataset, ChannelStats]:
    """Per-channel (axis 1) zero mean / unit std.

    Pass the train split's stats when standardizing the test split.
    """
    images = ds.images
    axes = tuple(i for i in range(images.ndim) if i != 1)
    if stats is None:
        stats = ChannelStats(
            mean=images.mean(axis=axes),
            std=np.maximum(images.std(axis=axes), STD_FLOOR),
        )
    if stats.mean.shape != (images.shape[1],):
        raise DimensionError(f"channel stats for {stats.mean.shape[0]} channels applied to {images.shape[1]}")
    shape = (1, images.shape[1]) + (1,) * (images.ndim - 2)
    out = (images - stats.mean.reshape(shape)) / stats.std.reshape(shape)
    return replace(ds, images=out, normalized=True), stats


def augment_batch(x: Tensor, rng: np.random.Generator, flip: bool = False, crop_pad: int = 0) -> Tensor:
    """Random horizontal flip (p = 0.5) and zero-pad-then-crop on a B×C×H×W batch."""
    if crop_pad < 0:
        raise ParameterError(f"crop padding must be >= 0, got {crop_pad}")
    if not flip and not crop_pad:
        return x
    if x.ndim != 4:
        raise DimensionError(f"augmentation needs B×C×H×W images, got {x.shape}")
    out = x.copy()
    batch, _, height, width = x.shape
    if flip:
        mask = rng.random(batch) < 0.5
        out[mask] = out[mask][..., ::-1]
    if crop_pad:
        padded = np.pad(out, ((0, 0), (0, 0), (crop_pad, crop_pad), (crop_pad, crop_pad)))
        offsets = rng.integers(0, 2 * crop_pad + 1, size=(batch, 2))
        for b, (dy, dx) in enumerate(offsets):
            out[b] = padded[b, :, dy : dy + height, dx : dx + width]
    return out
