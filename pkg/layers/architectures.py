"""Reference network specs.

The DeepHebb and FastHebb replicas follow the published channel widths; their
pooling kinds and positions are our own choice (replica, pooling per our
config), not a claim about the original networks.
"""

from typing import Callable, Dict, List, Optional, Sequence, Union

from models.schemas import ActivationKind, LayerKind, LayerSpec, NetworkSpec
from tensor_core import ParameterError


def _dense(out_features: int, plastic: bool = True) -> LayerSpec:
    return LayerSpec(kind=LayerKind.DENSE, out_features=out_features, plastic=plastic)


def _conv(out_channels: int, kernel_size: int, padding: int = 0, plastic: bool = True) -> LayerSpec:
    return LayerSpec(
        kind=LayerKind.CONV2D,
        out_channels=out_channels,
        kernel_size=kernel_size,
        padding=padding,
        plastic=plastic,
    )


def _act(activation: ActivationKind, p: float = 1.0) -> LayerSpec:
    return LayerSpec(kind=LayerKind.ACTIVATION, activation=activation, p=p)


def _pool(kind: LayerKind, kernel_size: int, stride: Optional[int] = None) -> LayerSpec:
    return LayerSpec(kind=kind, kernel_size=kernel_size, stride=stride)


def mlp(
    name: str,
    input_shape: Sequence[int],
    hidden: Sequence[int],
    num_classes: int,
    activation: ActivationKind = ActivationKind.RELU,
    p: float = 1.0,
    plastic: bool = True,
) -> NetworkSpec:
    """Dense stack with an activation after every hidden layer."""
    layers: List[LayerSpec] = []
    if len(input_shape) > 1:
        layers.append(LayerSpec(kind=LayerKind.FLATTEN))
    for width in hidden:
        layers.append(_dense(width, plastic))
        layers.append(_act(activation, p))
    layers.append(_dense(num_classes, plastic))
    return NetworkSpec(name=name, input_shape=list(input_shape), layers=layers)


def blobs_mlp() -> NetworkSpec:
    return mlp("blobs_mlp", [16], [32], 3)


def tiny_mlp() -> NetworkSpec:
    return mlp("tiny_mlp", [4], [6], 3)


def mnist_mlp() -> NetworkSpec:
    return mlp("mnist_mlp", [1, 28, 28], [256], 10)


def tiny_conv() -> NetworkSpec:
    return NetworkSpec(
        name="tiny_conv",
        input_shape=[1, 6, 6],
        layers=[
            _conv(3, 3, padding=1),
            _act(ActivationKind.TRIANGLE, p=2.0),
            _pool(LayerKind.MAXPOOL, 2),
            LayerSpec(kind=LayerKind.FLATTEN),
            _dense(3),
        ],
    )


def deephebb_replica(p: float = 1.0, num_classes: int = 10, classifier_plastic: bool = True) -> NetworkSpec:
    """3 conv layers (96, 384, 1536 channels) with Triangle activations and a linear classifier.

    Replica, pooling per our config: max, max, then avg after the last block.
    """
    return NetworkSpec(
        name="deephebb_replica",
        input_shape=[3, 32, 32],
        layers=[
            _conv(96, 5, padding=2),
            _act(ActivationKind.TRIANGLE, p),
            _pool(LayerKind.MAXPOOL, 2),
            _conv(384, 3, padding=1),
            _act(ActivationKind.TRIANGLE, p),
            _pool(LayerKind.MAXPOOL, 2),
            _conv(1536, 3, padding=1),
            _act(ActivationKind.TRIANGLE, p),
            _pool(LayerKind.AVGPOOL, 2),
            LayerSpec(kind=LayerKind.FLATTEN),
            _dense(num_classes, classifier_plastic),
        ],
    )


def fasthebb_replica(num_classes: int = 10, classifier_plastic: bool = True) -> NetworkSpec:
    """4 conv layers (96, 128, 192, 256 channels), a 4096-unit FC layer and a linear classifier.

    Replica, pooling per our config.
    """
    return NetworkSpec(
        name="fasthebb_replica",
        input_shape=[3, 32, 32],
        layers=[
            _conv(96, 5, padding=2),
            _act(ActivationKind.RELU),
            _pool(LayerKind.MAXPOOL, 2),
            _conv(128, 3, padding=1),
            _act(ActivationKind.RELU),
            _conv(192, 3, padding=1),
            _act(ActivationKind.RELU),
            _pool(LayerKind.MAXPOOL, 2),
            _conv(256, 3, padding=1),
            _act(ActivationKind.RELU),
            _pool(LayerKind.AVGPOOL, 2),
            LayerSpec(kind=LayerKind.FLATTEN),
            _dense(4096),
            _act(ActivationKind.RELU),
            _dense(num_classes, classifier_plastic),
        ],
    )


def conv_stack(
    depth: int,
    base_channels: int = 8,
    multiplier: int = 1,
    activation: ActivationKind = ActivationKind.TRIANGLE,
    p: float = 1.0,
    input_shape: Sequence[int] = (1, 8, 8),
    num_classes: int = 3,
    classifier_plastic: bool = False,
) -> NetworkSpec:
    """Depth/width family for the architecture sweep: layer l has base·multiplier^l channels."""
    if depth < 1 or base_channels < 1 or multiplier < 1:
        raise ParameterError(f"conv_stack needs depth, base_channels, multiplier >= 1, got {depth}, {base_channels}, {multiplier}")
    layers: List[LayerSpec] = []
    spatial = min(input_shape[1], input_shape[2])
    for level in range(depth):
        layers.append(_conv(base_channels * multiplier**level, 3, padding=1))
        layers.append(_act(activation, p))
        if spatial >= 2:
            layers.append(_pool(LayerKind.MAXPOOL, 2))
            spatial //= 2
    layers.append(LayerSpec(kind=LayerKind.FLATTEN))
    layers.append(_dense(num_classes, classifier_plastic))
    return NetworkSpec(
        name=f"conv_stack_d{depth}_x{multiplier}_{activation.value}",
        input_shape=list(input_shape),
        layers=layers,
    )


ARCHITECTURES: Dict[str, Callable[[], NetworkSpec]] = {
    "blobs_mlp": blobs_mlp,
    "tiny_mlp": tiny_mlp,
    "tiny_conv": tiny_conv,
    "mnist_mlp": mnist_mlp,
    "deephebb_replica": deephebb_replica,
    "fasthebb_replica": fasthebb_replica,
}


def get_architecture(arch: Union[str, NetworkSpec]) -> NetworkSpec:
    """Resolve a registered architecture name, or pass an inline spec through."""
    if isinstance(arch, NetworkSpec):
        return arch
    try:
        return ARCHITECTURES[arch]()
    except KeyError:
        raise ParameterError(f"unknown architecture {arch!r}; accepted: {sorted(ARCHITECTURES)}") from None
