from plasticity.rules import (
    LayerUpdate,
    UpdateTensor,
    conv_aggregate,
    ghl_modulate,
    layer_update,
    oja_update,
    per_sample_deltas,
    per_sample_magnitude,
    sgd_update,
    sign_only_update,
    swta_update,
)

__all__ = [
    "UpdateTensor",
    "LayerUpdate",
    "oja_update",
    "swta_update",
    "per_sample_deltas",
    "per_sample_magnitude",
    "conv_aggregate",
    "ghl_modulate",
    "sign_only_update",
    "sgd_update",
    "layer_update",
]
