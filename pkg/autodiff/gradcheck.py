"""Central finite differences, the oracle for backward_pass."""

from typing import Callable, Dict, Optional, Sequence

import numpy as np

from autodiff.engine import GradientSet, Network, forward_pass, loss_and_gradients, softmax_cross_entropy
from tensor_core import ParameterError, Tensor

DEFAULT_EPS = 1e-5
MAX_FD_WEIGHTS = 10_000
# Below this scale the error is absolute; central-difference roundoff is ~1e-11 at eps=1e-5.
GRADIENT_FLOOR = 1e-4


def numeric_gradient(fn: Callable[[Dict[int, Tensor]], float], weights: Dict[int, Tensor], eps: float = DEFAULT_EPS) -> GradientSet:
    """(fn(w+eps) - fn(w-eps)) / (2 eps) for every entry of every weight tensor."""
    if not eps > 0:
        raise ParameterError(f"finite-difference eps must be > 0, got {eps}")
    work = {lid: np.array(w, dtype=np.float64, copy=True) for lid, w in weights.items()}
    result: GradientSet = {}
    for lid, w in work.items():
        flat = w.reshape(-1)
        grad = np.zeros(flat.size)
        for j in range(flat.size):
            original = flat[j]
            flat[j] = original + eps
            plus = fn(work)
            flat[j] = original - eps
            minus = fn(work)
            flat[j] = original
            grad[j] = (plus - minus) / (2.0 * eps)
        result[lid] = grad.reshape(w.shape)
    return result


def finite_difference_gradient(
    net: Network,
    batch_x: Tensor,
    labels: Sequence[int],
    eps: float = DEFAULT_EPS,
    max_weights: int = MAX_FD_WEIGHTS,
) -> GradientSet:
    """Finite-difference dL/dW, recomputing the full forward pass per perturbation."""
    if net.weight_count > max_weights:
        raise ParameterError(
            f"network {net.spec.name!r} has {net.weight_count} weights; finite differences are limited to {max_weights}"
        )

    def loss_at(weights: Dict[int, Tensor]) -> float:
        logits = forward_pass(net.with_weights(weights), batch_x, capture_traces=False).logits
        return softmax_cross_entropy(logits, labels)[0].loss

    return numeric_gradient(loss_at, net.weights, eps)


def relative_error(analytic: Tensor, numeric: Tensor, floor: float = GRADIENT_FLOOR) -> float:
    """max|a - n| / max(max|a|, max|n|, floor); 0 when both are identically zero."""
    diff = float(np.max(np.abs(analytic - numeric), initial=0.0))
    if diff == 0.0:
        return 0.0
    scale = max(float(np.max(np.abs(analytic), initial=0.0)), float(np.max(np.abs(numeric), initial=0.0)), floor)
    return diff / scale


def gradient_check(
    net: Network,
    batch_x: Tensor,
    labels: Sequence[int],
    eps: float = DEFAULT_EPS,
    analytic: Optional[GradientSet] = None,
) -> Dict[int, float]:
    """Per-layer relative error between backprop and finite differences."""
    if analytic is None:
        _, analytic = loss_and_gradients(net, batch_x, labels)
    numeric = finite_difference_gradient(net, batch_x, labels, eps)
    return {lid: relative_error(analytic[lid], numeric[lid]) for lid in net.weighted_ids}
