"""Weight-update rules for plastic layers.

All kernels return unit-η deltas; the trainer multiplies by η once when it
applies them. Hebbian kernels work on the n_in×n_out weight matrix of a layer
(`WeightedLayer.weight_matrix`), so dense and conv layers share one code path.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from autodiff.engine import HebbianTrace
from layers import WeightedLayer
from models.schemas import RuleKind, UpdateRule
from tensor_core import (
    DimensionError,
    ParameterError,
    ShapeError,
    StateError,
    Tensor,
    as_tensor,
    ensure_finite,
    sign,
)

# tolerance on sum(u) == 1 over the unit axis
COMPETITION_ATOL = 1e-9


@dataclass(frozen=True)
class UpdateTensor:
    delta: Tensor
    rule: RuleKind


@dataclass(frozen=True)
class LayerUpdate:
    """Outcome of rule dispatch for one weighted layer, all in weight layout."""

    update: UpdateTensor
    hebbian: Optional[Tensor] = None
    step_scale: float = 1.0


def _check_trace(trace: HebbianTrace, matrix: Tensor) -> None:
    pre, post = trace.pre, trace.post_linear
    if pre.ndim != 3 or post.ndim != 3 or pre.shape[:2] != post.shape[:2]:
        raise DimensionError(f"layer {trace.layer_id}: trace pre {pre.shape} and post {post.shape} must be B×P×units")
    if matrix.shape != (pre.shape[2], post.shape[2]):
        raise DimensionError(
            f"layer {trace.layer_id}: weight matrix {matrix.shape} does not match trace ({pre.shape[2]}, {post.shape[2]})"
        )


def _gated_update(trace: HebbianTrace, matrix: Tensor, gate: Tensor) -> Tensor:
    """mean over (sample, position) of gate_k (x_i - y_k w_ik)."""
    x, y = trace.pre, trace.post_linear
    count = x.shape[0] * x.shape[1]
    if count == 0:
        raise ShapeError(f"layer {trace.layer_id}: no (sample, position) pairs to average over")
    correlation = np.einsum("bpi,bpk->ik", x, gate) / count
    decay = (gate * y).sum(axis=(0, 1)) / count
    return correlation - matrix * decay[None, :]


def _competition(trace: HebbianTrace) -> Tensor:
    u = trace.competition
    if u is None:
        raise StateError(f"layer {trace.layer_id}: trace carries no competition")
    if u.shape != trace.post_linear.shape:
        raise DimensionError(f"layer {trace.layer_id}: competition {u.shape} != post {trace.post_linear.shape}")
    if u.size and not np.allclose(u.sum(axis=-1), 1.0, rtol=0.0, atol=COMPETITION_ATOL):
        raise StateError(f"layer {trace.layer_id}: competition slices must sum to 1")
    return u


def oja_update(trace: HebbianTrace, matrix: Tensor) -> UpdateTensor:
    """Oja's rule y_k (x_i - y_k w_ik), averaged over samples and positions."""
    matrix = as_tensor(matrix)
    _check_trace(trace, matrix)
    return UpdateTensor(_gated_update(trace, matrix, trace.post_linear), RuleKind.HEBB_OJA)


def swta_update(trace: HebbianTrace, matrix: Tensor) -> UpdateTensor:
    """Soft winner-take-all Hebbian rule u_k (x_i - y_k w_ik)."""
    matrix = as_tensor(matrix)
    _check_trace(trace, matrix)
    return UpdateTensor(_gated_update(trace, matrix, _competition(trace)), RuleKind.HEBB_SWTA)


def per_sample_deltas(trace: HebbianTrace, matrix: Tensor, gate: Tensor) -> Tensor:
    """Raw B×P×n_in×n_out deltas gate_k (x_i - y_k w_ik) before any averaging."""
    matrix = as_tensor(matrix)
    _check_trace(trace, matrix)
    x, y = trace.pre, trace.post_linear
    if gate.shape != y.shape:
        raise DimensionError(f"gate {gate.shape} != post {y.shape}")
    return gate[:, :, None, :] * (x[:, :, :, None] - y[:, :, None, :] * matrix)


def conv_aggregate(per_position_deltas: Tensor) -> Tensor:
    """Mean over the leading (sample, position) axes."""
    deltas = np.asarray(per_position_deltas, dtype=np.float64)
    if deltas.ndim < 3:
        raise DimensionError(f"expected (sample, position, ...) deltas, got shape {deltas.shape}")
    if deltas.shape[0] == 0 or deltas.shape[1] == 0:
        raise ShapeError(f"cannot aggregate an empty position set, shape {deltas.shape}")
    return deltas.mean(axis=(0, 1))


def per_sample_magnitude(trace: HebbianTrace, matrix: Tensor) -> Tensor:
    """mean |u_k (x_i - y_k w_ik)| over samples and positions, one sample at a time."""
    gate = _competition(trace)
    total = np.zeros(matrix.shape)
    for b in range(trace.pre.shape[0]):
        sample = HebbianTrace(trace.layer_id, trace.pre[b : b + 1], trace.post_linear[b : b + 1], gate[b : b + 1])
        total += conv_aggregate(np.abs(per_sample_deltas(sample, matrix, sample.competition)))
    return total / trace.pre.shape[0]


def ghl_modulate(hebb: UpdateTensor, gradient: Tensor, literal_sign: bool = False) -> UpdateTensor:
    """sign(-G) ⊙ |ΔW_hebb|; sign(+G) when `literal_sign` is set."""
    gradient = as_tensor(gradient)
    if gradient.shape != hebb.delta.shape:
        raise DimensionError(f"gradient {gradient.shape} does not match Hebbian delta {hebb.delta.shape}")
    direction = sign(gradient) if literal_sign else sign(-gradient)
    return UpdateTensor(direction * np.abs(hebb.delta), RuleKind.GHL)


def sign_only_update(gradient: Tensor, fixed_step: float = 1.0) -> UpdateTensor:
    if not fixed_step > 0:
        raise ParameterError(f"fixed_step must be > 0, got {fixed_step}")
    return UpdateTensor(sign(-as_tensor(gradient)), RuleKind.SIGN_ONLY)


def sgd_update(gradient: Tensor) -> UpdateTensor:
    gradient = ensure_finite(as_tensor(gradient), "gradient")
    return UpdateTensor(-gradient, RuleKind.BACKPROP_SGD)


def layer_update(
    rule: UpdateRule,
    layer: WeightedLayer,
    weight: Tensor,
    gradient: Tensor,
    trace: Optional[HebbianTrace] = None,
) -> LayerUpdate:
    """Pick and run the update of one weighted layer.

    Non-plastic layers always take the plain gradient step.
    """
    kind = rule.kind
    if kind == RuleKind.BACKPROP_SGD or not layer.plastic:
        return LayerUpdate(sgd_update(gradient))
    if kind == RuleKind.SIGN_ONLY:
        return LayerUpdate(sign_only_update(gradient, rule.fixed_step), step_scale=rule.fixed_step)
    if trace is None:
        raise StateError(f"rule {kind.value} needs a Hebbian trace for {layer.describe()}")

    matrix = layer.weight_matrix(weight)
    local = oja_update(trace, matrix) if kind == RuleKind.HEBB_OJA else swta_update(trace, matrix)
    hebbian = layer.from_weight_matrix(local.delta)
    if kind != RuleKind.GHL:
        return LayerUpdate(UpdateTensor(hebbian, kind), hebbian)

    if rule.per_sample_modulation:
        magnitude = layer.from_weight_matrix(per_sample_magnitude(trace, matrix))
    else:
        magnitude = hebbian
    modulated = ghl_modulate(UpdateTensor(magnitude, RuleKind.HEBB_SWTA), gradient, rule.literal_sign)
    return LayerUpdate(modulated, hebbian)
