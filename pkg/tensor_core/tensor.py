"""The numeric currency of the repo: C-contiguous float64 numpy arrays."""

from typing import Any

import numpy as np
import numpy.typing as npt

from tensor_core.errors import NumericError

Tensor = npt.NDArray[np.float64]


def as_tensor(data: Any) -> Tensor:
    """Convert array-like data to a row-major float64 tensor."""
    return np.ascontiguousarray(data, dtype=np.float64)


def ensure_finite(t: Tensor, what: str) -> Tensor:
    """Raise NumericError if `t` holds NaN or Inf."""
    if not np.all(np.isfinite(t)):
        bad = int(np.count_nonzero(~np.isfinite(t)))
        raise NumericError(f"{what}: {bad} non-finite value(s) in tensor of shape {t.shape}")
    return t
