import numpy as np
import pytest

from autodiff import build_network
from models.schemas import ActivationKind, LayerKind, LayerSpec, NetworkSpec
from trainer import init_weights


def loop_conv2d(x, weight, stride=1, pad=0):
    """Nested-loop cross-correlation, the oracle for the im2col path."""
    batch, channels, height, width = x.shape
    out_c, _, kh, kw = weight.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    out_h = (height + 2 * pad - kh) // stride + 1
    out_w = (width + 2 * pad - kw) // stride + 1
    out = np.zeros((batch, out_c, out_h, out_w))
    for b in range(batch):
        for o in range(out_c):
            for i in range(out_h):
                for j in range(out_w):
                    patch = xp[b, :, i * stride : i * stride + kh, j * stride : j * stride + kw]
                    out[b, o, i, j] = np.sum(patch * weight[o])
    return out


def _smooth_activation(rng):
    choice = int(rng.integers(0, 3))
    if choice == 2:
        return LayerSpec(kind=LayerKind.ACTIVATION, activation=ActivationKind.IDENTITY)
    return LayerSpec(kind=LayerKind.ACTIVATION, activation=ActivationKind.TRIANGLE, p=float(choice + 2))


def random_smooth_spec(rng) -> NetworkSpec:
    """1-3 weighted layers, widths <= 8, activations without first-derivative kinks."""
    layers = []
    classes = int(rng.integers(2, 5))
    if rng.random() < 0.5:
        channels = int(rng.integers(1, 3))
        side = int(rng.integers(3, 7))
        input_shape = [channels, side, side]
        for _ in range(int(rng.integers(1, 3))):
            kernel = int(rng.integers(1, min(3, side) + 1))
            pad = int(rng.integers(0, 2))
            stride = int(rng.integers(1, 3))
            layers.append(
                LayerSpec(
                    kind=LayerKind.CONV2D,
                    out_channels=int(rng.integers(2, 5)),
                    kernel_size=kernel,
                    stride=stride,
                    padding=pad,
                )
            )
            side = (side + 2 * pad - kernel) // stride + 1
            layers.append(_smooth_activation(rng))
        if side >= 2 and rng.random() < 0.5:
            layers.append(LayerSpec(kind=LayerKind.AVGPOOL, kernel_size=2))
        layers.append(LayerSpec(kind=LayerKind.FLATTEN))
    else:
        input_shape = [int(rng.integers(2, 9))]
        for _ in range(int(rng.integers(0, 3))):
            layers.append(LayerSpec(kind=LayerKind.DENSE, out_features=int(rng.integers(2, 9))))
            layers.append(_smooth_activation(rng))
    layers.append(LayerSpec(kind=LayerKind.DENSE, out_features=classes))
    return NetworkSpec(name="random", input_shape=input_shape, layers=layers)


def seeded_network(spec: NetworkSpec, seed: int = 0):
    return build_network(spec, init_weights(spec, seed))


def random_batch(rng, net, batch_size=None):
    batch_size = batch_size or int(rng.integers(1, 5))
    x = rng.standard_normal((batch_size,) + net.input_shape)
    y = rng.integers(0, net.num_classes, size=batch_size)
    return x, y


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))
