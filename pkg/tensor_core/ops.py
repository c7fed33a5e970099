"""Dense kernels used by every other package.

All functions are pure: they never modify their arguments and return freshly
allocated arrays. Reductions run in numpy's fixed order, so results do not
depend on how many threads a caller uses around them.
"""

from typing import Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from tensor_core.errors import DimensionError, NumericError, ParameterError, ShapeError
from tensor_core.tensor import Tensor, as_tensor


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of m×k by k×n (or batched B×m×k by B×k×n)."""
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim != b.ndim or a.ndim not in (2, 3):
        raise DimensionError(f"matmul needs two 2-D or two 3-D operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2] or (a.ndim == 3 and a.shape[0] != b.shape[0]):
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return np.matmul(a, b)


def softmax_temp(v: Tensor, tau: float = 1.0) -> Tensor:
    """Softmax of v/tau over the last axis, stabilized by the slice maximum."""
    if not tau > 0:
        raise ParameterError(f"softmax temperature must be > 0, got {tau}")
    z = as_tensor(v) / tau
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def sign(t: Tensor) -> Tensor:
    """Elementwise sign with sign(0) = 0; NaN is rejected."""
    t = as_tensor(t)
    if np.isnan(t).any():
        raise NumericError(f"sign of NaN is undefined (tensor of shape {t.shape})")
    out = np.sign(t)
    out[out == 0] = 0.0  # drop the sign bit of -0.0
    return out


def conv_output_size(n: int, k: int, stride: int, pad: int) -> int:
    """Number of window positions along one spatial axis."""
    span = n + 2 * pad - k
    if span < 0:
        raise ShapeError(f"kernel {k} larger than padded input {n + 2 * pad}")
    return span // stride + 1


def _check_window(kh: int, kw: int, stride: int, pad: int) -> None:
    if kh < 1 or kw < 1:
        raise ParameterError(f"kernel extents must be >= 1, got {kh}x{kw}")
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    if pad < 0:
        raise ParameterError(f"pad must be >= 0, got {pad}")


def im2col_batch(x: Tensor, kh: int, kw: int, stride: int = 1, pad: int = 0) -> Tensor:
    """Unroll receptive fields of a B×C×H×W batch into B×(C·kh·kw)×P.

    Rows are ordered (channel, kernel row, kernel col), matching a weight
    tensor out_c×C×kh×kw flattened per output channel. Columns run row-major
    over output positions.
    """
    x = as_tensor(x)
    if x.ndim != 4:
        raise DimensionError(f"im2col_batch expects B×C×H×W, got shape {x.shape}")
    _check_window(kh, kw, stride, pad)
    b, c, h, w = x.shape
    out_h = conv_output_size(h, kh, stride, pad)
    out_w = conv_output_size(w, kw, stride, pad)
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    windows = windows[:, :, :out_h, :out_w]
    cols = windows.transpose(0, 1, 4, 5, 2, 3).reshape(b, c * kh * kw, out_h * out_w)
    return np.ascontiguousarray(cols)


def im2col(x: Tensor, kh: int, kw: int, stride: int = 1, pad: int = 0) -> Tensor:
    """Single-image im2col: C×H×W -> (C·kh·kw)×P."""
    x = as_tensor(x)
    if x.ndim != 3:
        raise DimensionError(f"im2col expects C×H×W, got shape {x.shape}")
    return im2col_batch(x[None], kh, kw, stride, pad)[0]


def col2im_batch(
    cols: Tensor,
    input_shape: Sequence[int],
    kh: int,
    kw: int,
    stride: int = 1,
    pad: int = 0,
) -> Tensor:
    """Adjoint of im2col_batch: scatter-add columns back onto B×C×H×W."""
    _check_window(kh, kw, stride, pad)
    b, c, h, w = input_shape
    out_h = conv_output_size(h, kh, stride, pad)
    out_w = conv_output_size(w, kw, stride, pad)
    expected: Tuple[int, ...] = (b, c * kh * kw, out_h * out_w)
    if tuple(cols.shape) != expected:
        raise DimensionError(f"col2im expects columns of shape {expected}, got {cols.shape}")
    blocks = cols.reshape(b, c, kh, kw, out_h, out_w)
    padded = np.zeros((b, c, h + 2 * pad, w + 2 * pad))
    for i in range(kh):
        i_end = i + stride * out_h
        for j in range(kw):
            j_end = j + stride * out_w
            padded[:, :, i:i_end:stride, j:j_end:stride] += blocks[:, :, i, j]
    return padded[:, :, pad : pad + h, pad : pad + w].copy()
