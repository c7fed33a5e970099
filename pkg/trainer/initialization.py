"""Seeded weight initialization.

Algorithm, portable across implementations: a numpy PCG64 generator seeded
with `seed` draws U(-sqrt(6/fan_in), +sqrt(6/fan_in)) for each weighted layer
in layer-index order, filling the weight tensor in C order.
"""

import math
from typing import Dict, Union

import numpy as np

from autodiff.engine import Network, build_network
from models.schemas import NetworkSpec
from tensor_core import Tensor

# keeps the data-order stream independent of the init stream
DATA_ORDER_STREAM = 1


def init_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def data_order_rng(seed: int) -> np.random.Generator:
    """Generator for shuffling and augmentation; its state goes into checkpoints."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, DATA_ORDER_STREAM])))


def init_weights(spec: Union[NetworkSpec, Network], seed: int) -> Dict[int, Tensor]:
    net = spec if isinstance(spec, Network) else build_network(spec)
    rng = init_rng(seed)
    weights: Dict[int, Tensor] = {}
    for lid in net.weighted_ids:
        layer = net.layers[lid]
        bound = math.sqrt(6.0 / layer.fan_in)
        weights[lid] = rng.uniform(-bound, bound, size=layer.weight_shape)
    return weights
