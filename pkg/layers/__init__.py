from layers.architectures import ARCHITECTURES, conv_stack, get_architecture, mlp
from layers.layers import (
    Activation,
    Conv2d,
    Dense,
    Flatten,
    Layer,
    Pool2d,
    WeightedLayer,
    build_layer,
    conv2d_forward,
    dense_forward,
    layer_backward,
    relu,
    triangle_activation,
    triangle_backward,
)

__all__ = [
    "Layer",
    "WeightedLayer",
    "Dense",
    "Conv2d",
    "Pool2d",
    "Flatten",
    "Activation",
    "build_layer",
    "layer_backward",
    "dense_forward",
    "conv2d_forward",
    "relu",
    "triangle_activation",
    "triangle_backward",
    "ARCHITECTURES",
    "get_architecture",
    "conv_stack",
    "mlp",
]
