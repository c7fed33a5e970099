"""Layer kernels and the Layer classes that wrap them.

Layers are immutable descriptions built from a LayerSpec and an input shape.
`forward` returns the output together with a cache dict; `backward` consumes
that cache and returns (input_grad, weight_grad). Weights are passed in, never
stored, so the trainer is the only place they change.
"""

from abc import ABC, abstractmethod
from math import prod
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from models.schemas import ActivationKind, LayerKind, LayerSpec
from tensor_core import (
    DimensionError,
    ParameterError,
    StateError,
    Tensor,
    as_tensor,
    col2im_batch,
    conv_output_size,
    im2col_batch,
    matmul,
)

Cache = Dict[str, Any]
Shape = Tuple[int, ...]


def dense_forward(x: Tensor, weight: Tensor) -> Tensor:
    """y = x·W for x of shape B×in and W of shape in×out; no bias."""
    x = as_tensor(x)
    if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[0]:
        raise DimensionError(f"dense: input {x.shape} does not match weight {weight.shape}")
    return matmul(x, weight)


def _conv2d_lowered(x: Tensor, weight: Tensor, stride: int, pad: int) -> Tuple[Tensor, Tensor]:
    x = as_tensor(x)
    if x.ndim != 4 or weight.ndim != 4 or x.shape[1] != weight.shape[1]:
        raise DimensionError(f"conv2d: input {x.shape} does not match weight {weight.shape}")
    out_c, _, kh, kw = weight.shape
    cols = im2col_batch(x, kh, kw, stride, pad)
    batch, rows, positions = cols.shape
    kernel = np.broadcast_to(weight.reshape(out_c, rows), (batch, out_c, rows))
    y = matmul(kernel, cols)
    out_h = conv_output_size(x.shape[2], kh, stride, pad)
    out_w = conv_output_size(x.shape[3], kw, stride, pad)
    return y.reshape(batch, out_c, out_h, out_w), cols


def conv2d_forward(x: Tensor, weight: Tensor, stride: int = 1, pad: int = 0) -> Tensor:
    """Cross-correlation of B×C×H×W with out_c×C×kh×kw, lowered through im2col."""
    y, _ = _conv2d_lowered(x, weight, stride, pad)
    return y


def relu(u: Tensor) -> Tensor:
    return np.maximum(as_tensor(u), 0.0)


def triangle_activation(u: Tensor, p: float = 1.0) -> Tensor:
    """RePU of the channel-mean-subtracted input: max(0, u - mean_c(u))^p.

    The channel axis is axis 1; the mean is taken per (batch, spatial) site.
    """
    if not p > 0:
        raise ParameterError(f"triangle exponent p must be > 0, got {p}")
    u = as_tensor(u)
    if u.ndim < 2:
        raise DimensionError(f"triangle expects a batch and a channel axis, got shape {u.shape}")
    d = u - u.mean(axis=1, keepdims=True)
    out = np.zeros_like(d)
    active = d > 0
    out[active] = d[active] ** p
    return out


def triangle_backward(u: Tensor, grad: Tensor, p: float = 1.0) -> Tensor:
    """Reverse-mode derivative of triangle_activation (subgradient 0 at the kink)."""
    d = u - u.mean(axis=1, keepdims=True)
    local = np.zeros_like(d)
    active = d > 0
    local[active] = p * d[active] ** (p - 1.0)
    gd = grad * local
    return gd - gd.mean(axis=1, keepdims=True)


class Layer(ABC):
    """Base class for every layer in a sequential network."""

    weighted = False
    plastic = False

    def __init__(self, spec: LayerSpec, input_shape: Sequence[int]):
        self.spec = spec
        self.input_shape: Shape = tuple(int(s) for s in input_shape)
        self.output_shape: Shape = self._infer_output_shape()

    @property
    def kind(self) -> LayerKind:
        return self.spec.kind

    @property
    def weight_shape(self) -> Optional[Shape]:
        return None

    @property
    def fan_in(self) -> int:
        return 0

    def describe(self) -> str:
        return f"{self.kind.value}{list(self.input_shape)}->{list(self.output_shape)}"

    @abstractmethod
    def _infer_output_shape(self) -> Shape:
        """Output extents (batch axis excluded) for this layer's input shape"""

    @abstractmethod
    def forward(self, x: Tensor, weight: Optional[Tensor] = None) -> Tuple[Tensor, Cache]:
        """Evaluate the layer; the cache holds what backward needs"""

    @abstractmethod
    def _backward(self, grad: Tensor, cache: Cache) -> Tuple[Tensor, Optional[Tensor]]:
        """Layer-specific reverse pass"""

    def backward(self, grad: Tensor, cache: Optional[Cache]) -> Tuple[Tensor, Optional[Tensor]]:
        """Return (input_grad, weight_grad) for an upstream gradient."""
        if cache is None:
            raise StateError(f"{self.describe()}: missing forward cache")
        if cache.get("kind") != self.kind or cache.get("input_shape") != self.input_shape:
            raise StateError(f"{self.describe()}: cache was produced by a different layer")
        batch = cache["batch"]
        if tuple(grad.shape) != (batch,) + self.output_shape:
            raise DimensionError(
                f"{self.describe()}: upstream grad {grad.shape} does not match output {(batch,) + self.output_shape}"
            )
        return self._backward(as_tensor(grad), cache)

    def _check_input(self, x: Tensor) -> Tensor:
        x = as_tensor(x)
        if tuple(x.shape[1:]) != self.input_shape:
            raise DimensionError(f"{self.describe()}: got input of shape {x.shape}")
        return x

    def _new_cache(self, inputs: Tensor, **entries: Any) -> Cache:
        return {"kind": self.kind, "input_shape": self.input_shape, "batch": inputs.shape[0], **entries}


class WeightedLayer(Layer):
    """A layer with a bias-free weight tensor that may take Hebbian updates."""

    weighted = True

    def __init__(self, spec: LayerSpec, input_shape: Sequence[int]):
        super().__init__(spec, input_shape)
        self.plastic = spec.plastic

    def _check_weight(self, weight: Optional[Tensor]) -> Tensor:
        if weight is None or tuple(weight.shape) != self.weight_shape:
            got = None if weight is None else weight.shape
            raise DimensionError(f"{self.describe()}: expected weight {self.weight_shape}, got {got}")
        return weight

    @abstractmethod
    def weight_matrix(self, weight: Tensor) -> Tensor:
        """n_in×n_out view of the weight used by the plasticity rules"""

    @abstractmethod
    def from_weight_matrix(self, matrix: Tensor) -> Tensor:
        """Inverse of weight_matrix"""

    @abstractmethod
    def hebbian_view(self, cache: Cache, y: Tensor) -> Tuple[Tensor, Tensor]:
        """(pre B×P×n_in, post_linear B×P×n_out) for this forward call"""

    def unit_norms(self, weight: Tensor) -> Tensor:
        return np.linalg.norm(self.weight_matrix(weight), axis=0)


class Dense(WeightedLayer):
    def _infer_output_shape(self) -> Shape:
        if len(self.input_shape) != 1:
            raise DimensionError(f"dense expects flat input, got {list(self.input_shape)}; add a flatten layer")
        return (self.spec.out_features,)

    @property
    def weight_shape(self) -> Shape:
        return (self.input_shape[0], self.spec.out_features)

    @property
    def fan_in(self) -> int:
        return self.input_shape[0]

    def forward(self, x, weight=None):
        x = self._check_input(x)
        weight = self._check_weight(weight)
        return dense_forward(x, weight), self._new_cache(x, x=x, weight=weight)

    def _backward(self, grad, cache):
        weight_grad = matmul(cache["x"].T, grad)
        input_grad = matmul(grad, cache["weight"].T)
        return input_grad, weight_grad

    def weight_matrix(self, weight):
        return weight

    def from_weight_matrix(self, matrix):
        return matrix

    def hebbian_view(self, cache, y):
        return cache["x"][:, None, :], y[:, None, :]


class Conv2d(WeightedLayer):
    @property
    def stride(self) -> int:
        return self.spec.stride or 1

    def _infer_output_shape(self) -> Shape:
        if len(self.input_shape) != 3:
            raise DimensionError(f"conv2d expects C×H×W input, got {list(self.input_shape)}")
        _, h, w = self.input_shape
        k, pad = self.spec.kernel_size, self.spec.padding
        return (
            self.spec.out_channels,
            conv_output_size(h, k, self.stride, pad),
            conv_output_size(w, k, self.stride, pad),
        )

    @property
    def weight_shape(self) -> Shape:
        k = self.spec.kernel_size
        return (self.spec.out_channels, self.input_shape[0], k, k)

    @property
    def fan_in(self) -> int:
        return self.input_shape[0] * self.spec.kernel_size**2

    def forward(self, x, weight=None):
        x = self._check_input(x)
        weight = self._check_weight(weight)
        y, cols = _conv2d_lowered(x, weight, self.stride, self.spec.padding)
        return y, self._new_cache(x, cols=cols, weight=weight, x_shape=x.shape)

    def _backward(self, grad, cache):
        weight = cache["weight"]
        cols = cache["cols"]
        batch, rows, positions = cols.shape
        out_c = weight.shape[0]
        g = grad.reshape(batch, out_c, positions)
        weight_grad = np.einsum("bop,bkp->ok", g, cols).reshape(weight.shape)
        kernel_t = np.broadcast_to(weight.reshape(out_c, rows).T, (batch, rows, out_c))
        col_grad = matmul(kernel_t, g)
        k = self.spec.kernel_size
        input_grad = col2im_batch(col_grad, cache["x_shape"], k, k, self.stride, self.spec.padding)
        return input_grad, weight_grad

    def weight_matrix(self, weight):
        return weight.reshape(weight.shape[0], -1).T

    def from_weight_matrix(self, matrix):
        return np.ascontiguousarray(matrix.T).reshape(self.weight_shape)

    def hebbian_view(self, cache, y):
        batch, out_c = y.shape[:2]
        pre = cache["cols"].transpose(0, 2, 1)
        post = y.reshape(batch, out_c, -1).transpose(0, 2, 1)
        return np.ascontiguousarray(pre), np.ascontiguousarray(post)


class Pool2d(Layer):
    """Max or average pooling, no padding."""

    @property
    def stride(self) -> int:
        return self.spec.stride or self.spec.kernel_size

    def _infer_output_shape(self) -> Shape:
        if len(self.input_shape) != 3:
            raise DimensionError(f"{self.kind.value} expects C×H×W input, got {list(self.input_shape)}")
        c, h, w = self.input_shape
        k = self.spec.kernel_size
        return (c, conv_output_size(h, k, self.stride, 0), conv_output_size(w, k, self.stride, 0))

    def _windows(self, x: Tensor) -> Tensor:
        batch, c, h, w = x.shape
        k = self.spec.kernel_size
        return im2col_batch(x.reshape(batch * c, 1, h, w), k, k, self.stride, 0)

    def forward(self, x, weight=None):
        x = self._check_input(x)
        cols = self._windows(x)
        shape = (x.shape[0],) + self.output_shape
        if self.kind == LayerKind.MAXPOOL:
            idx = cols.argmax(axis=1)
            y = np.take_along_axis(cols, idx[:, None, :], axis=1)[:, 0, :]
            return y.reshape(shape), self._new_cache(x, idx=idx, cols_shape=cols.shape)
        return cols.mean(axis=1).reshape(shape), self._new_cache(x, cols_shape=cols.shape)

    def _backward(self, grad, cache):
        batch = cache["batch"]
        c, h, w = self.input_shape
        rows_total, window, positions = cache["cols_shape"]
        g = grad.reshape(rows_total, 1, positions)
        if self.kind == LayerKind.MAXPOOL:
            col_grad = np.zeros(cache["cols_shape"])
            np.put_along_axis(col_grad, cache["idx"][:, None, :], g, axis=1)
        else:
            col_grad = np.broadcast_to(g / window, cache["cols_shape"])
        k = self.spec.kernel_size
        input_grad = col2im_batch(np.ascontiguousarray(col_grad), (rows_total, 1, h, w), k, k, self.stride, 0)
        return input_grad.reshape(batch, c, h, w), None


class Flatten(Layer):
    def _infer_output_shape(self) -> Shape:
        return (prod(self.input_shape),)

    def forward(self, x, weight=None):
        x = self._check_input(x)
        return x.reshape(x.shape[0], -1), self._new_cache(x)

    def _backward(self, grad, cache):
        return grad.reshape((cache["batch"],) + self.input_shape), None


class Activation(Layer):
    """Elementwise or channel-wise nonlinearity kept as its own layer."""

    def _infer_output_shape(self) -> Shape:
        return self.input_shape

    @property
    def activation(self) -> ActivationKind:
        return self.spec.activation

    def describe(self) -> str:
        return f"{self.activation.value}{list(self.input_shape)}"

    def forward(self, x, weight=None):
        x = self._check_input(x)
        if self.activation == ActivationKind.RELU:
            y = relu(x)
        elif self.activation == ActivationKind.TRIANGLE:
            y = triangle_activation(x, self.spec.p)
        else:
            y = x.copy()
        return y, self._new_cache(x, u=x)

    def _backward(self, grad, cache):
        u = cache["u"]
        if self.activation == ActivationKind.RELU:
            return grad * (u > 0), None
        if self.activation == ActivationKind.TRIANGLE:
            return triangle_backward(u, grad, self.spec.p), None
        return grad.copy(), None


_LAYER_CLASSES = {
    LayerKind.DENSE: Dense,
    LayerKind.CONV2D: Conv2d,
    LayerKind.MAXPOOL: Pool2d,
    LayerKind.AVGPOOL: Pool2d,
    LayerKind.FLATTEN: Flatten,
    LayerKind.ACTIVATION: Activation,
}


def build_layer(spec: LayerSpec, input_shape: Sequence[int]) -> Layer:
    """Instantiate the layer class for `spec.kind`."""
    return _LAYER_CLASSES[spec.kind](spec, input_shape)


def layer_backward(layer: Layer, upstream_grad: Tensor, cache: Optional[Cache]) -> Tuple[Tensor, Optional[Tensor]]:
    """Reverse-mode derivative of `layer` at the cached forward call."""
    return layer.backward(upstream_grad, cache)
