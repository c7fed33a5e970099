"""Sequential forward/backward engine with Hebbian trace capture."""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from layers import Layer, build_layer, layer_backward
from layers.layers import Cache
from models.schemas import NetworkSpec
from tensor_core import (
    DataError,
    DimensionError,
    GHLError,
    StateError,
    Tensor,
    as_tensor,
    softmax_temp,
)

GradientSet = Dict[int, Tensor]


@dataclass(frozen=True)
class HebbianTrace:
    """(x, y, u) of one plastic layer, flattened to B×P×units.

    Dense layers have P = 1, so a dense `pre` is B×1×n_in rather than B×n_in
    (index `[:, 0, :]` for the plain batch view). Conv layers use one row per
    output position, with `pre` holding that position's receptive-field patch.
    """

    layer_id: int
    pre: Tensor
    post_linear: Tensor
    competition: Tensor


@dataclass(frozen=True)
class LossValue:
    loss: float
    logits: Tensor
    labels: np.ndarray


@dataclass(frozen=True)
class ForwardResult:
    logits: Tensor
    caches: List[Cache]
    traces: List[HebbianTrace] = field(default_factory=list)


@dataclass(frozen=True)
class Network:
    """Built layer stack plus the weights of its weighted layers, keyed by layer index."""

    spec: NetworkSpec
    layers: Tuple[Layer, ...]
    weights: Dict[int, Tensor]

    @property
    def input_shape(self) -> Tuple[int, ...]:
        return tuple(self.spec.input_shape)

    @property
    def num_classes(self) -> int:
        return self.layers[-1].output_shape[0]

    @property
    def weighted_ids(self) -> List[int]:
        return [i for i, layer in enumerate(self.layers) if layer.weighted]

    @property
    def weight_count(self) -> int:
        return sum(int(np.prod(self.layers[i].weight_shape)) for i in self.weighted_ids)

    def with_weights(self, weights: Dict[int, Tensor]) -> "Network":
        return replace(self, weights=dict(weights))


def build_network(spec: NetworkSpec, weights: Optional[Dict[int, Tensor]] = None) -> Network:
    """Instantiate layers, checking that consecutive shapes chain.

    Without `weights`, every weighted layer starts at zero.
    """
    layers: List[Layer] = []
    shape: Sequence[int] = spec.input_shape
    for i, layer_spec in enumerate(spec.layers):
        try:
            layer = build_layer(layer_spec, shape)
        except GHLError as exc:
            raise DimensionError(f"layer {i} ({layer_spec.kind.value}): {exc}") from exc
        layers.append(layer)
        shape = layer.output_shape
    if len(shape) != 1:
        raise DimensionError(f"network {spec.name!r} must end in flat logits, got output shape {list(shape)}")

    resolved: Dict[int, Tensor] = {}
    for i, layer in enumerate(layers):
        if not layer.weighted:
            continue
        if weights is None:
            resolved[i] = np.zeros(layer.weight_shape)
            continue
        if i not in weights:
            raise StateError(f"no weight supplied for layer {i} ({layer.describe()})")
        w = as_tensor(weights[i])
        if w.shape != layer.weight_shape:
            raise DimensionError(f"layer {i} ({layer.describe()}): weight {w.shape} != {layer.weight_shape}")
        resolved[i] = w
    return Network(spec=spec, layers=tuple(layers), weights=resolved)


def forward_pass(net: Network, batch_x: Tensor, tau: float = 1.0, capture_traces: bool = True) -> ForwardResult:
    """Run the stack; capture a HebbianTrace for every plastic layer.

    Competition is the temperature softmax of the layer's *linear* output.
    """
    x = as_tensor(batch_x)
    if tuple(x.shape[1:]) != net.input_shape:
        raise DimensionError(f"batch of shape {x.shape} does not match network input {list(net.input_shape)}")
    caches: List[Cache] = []
    traces: List[HebbianTrace] = []
    for i, layer in enumerate(net.layers):
        try:
            y, cache = layer.forward(x, net.weights.get(i))
        except DimensionError as exc:
            raise DimensionError(f"layer {i} ({layer.kind.value}): {exc}") from exc
        caches.append(cache)
        if capture_traces and layer.plastic:
            pre, post = layer.hebbian_view(cache, y)
            traces.append(HebbianTrace(i, pre, post, softmax_temp(post, tau)))
        x = y
    return ForwardResult(logits=x, caches=caches, traces=traces)


def softmax_cross_entropy(logits: Tensor, labels: Sequence[int], scale: float = 1.0) -> Tuple[LossValue, Tensor]:
    """Mean cross-entropy over the batch and its gradient (softmax - onehot) / B.

    `scale` multiplies both the loss and the gradient.
    """
    logits = as_tensor(logits)
    if logits.ndim != 2:
        raise DimensionError(f"logits must be B×K, got {logits.shape}")
    batch, classes = logits.shape
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (batch,):
        raise DataError(f"expected {batch} labels, got shape {labels.shape}")
    if batch and (labels.min() < 0 or labels.max() >= classes):
        raise DataError(f"labels must lie in [0, {classes}), got range [{labels.min()}, {labels.max()}]")
    z = logits - logits.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    rows = np.arange(batch)
    loss = -log_probs[rows, labels].mean() * scale
    grad = np.exp(log_probs)
    grad[rows, labels] -= 1.0
    grad *= scale / batch
    return LossValue(loss=float(loss), logits=logits, labels=labels), grad


def backward_pass(net: Network, caches: List[Cache], logit_grad: Tensor) -> GradientSet:
    """Reverse traversal; returns dL/dW for every weighted layer."""
    if len(caches) != len(net.layers):
        raise StateError(f"got {len(caches)} caches for a network of {len(net.layers)} layers")
    grad = as_tensor(logit_grad)
    gradients: GradientSet = {}
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        grad, weight_grad = layer_backward(layer, grad, caches[i])
        if layer.weighted:
            gradients[i] = weight_grad
    return gradients


def loss_and_gradients(
    net: Network, batch_x: Tensor, labels: Sequence[int], scale: float = 1.0
) -> Tuple[LossValue, GradientSet]:
    fwd = forward_pass(net, batch_x, capture_traces=False)
    loss, logit_grad = softmax_cross_entropy(fwd.logits, labels, scale)
    return loss, backward_pass(net, fwd.caches, logit_grad)


def predict(net: Network, batch_x: Tensor) -> np.ndarray:
    """Top-1 class per sample; ties go to the lowest class index."""
    logits = forward_pass(net, batch_x, capture_traces=False).logits
    return logits.argmax(axis=1)
