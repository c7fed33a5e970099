from tensor_core.errors import (
    DataError,
    DatasetIOError,
    DatasetMissingError,
    DimensionError,
    FormatError,
    GHLError,
    NumericError,
    ParameterError,
    ShapeError,
    StateError,
)
from tensor_core.ops import (
    col2im_batch,
    conv_output_size,
    im2col,
    im2col_batch,
    matmul,
    sign,
    softmax_temp,
)
from tensor_core.tensor import Tensor, as_tensor, ensure_finite

__all__ = [
    "Tensor",
    "as_tensor",
    "ensure_finite",
    "matmul",
    "softmax_temp",
    "sign",
    "im2col",
    "im2col_batch",
    "col2im_batch",
    "conv_output_size",
    "GHLError",
    "DimensionError",
    "ShapeError",
    "ParameterError",
    "NumericError",
    "StateError",
    "DataError",
    "FormatError",
    "DatasetIOError",
    "DatasetMissingError",
]
