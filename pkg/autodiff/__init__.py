from autodiff.engine import (
    ForwardResult,
    GradientSet,
    HebbianTrace,
    LossValue,
    Network,
    backward_pass,
    build_network,
    forward_pass,
    loss_and_gradients,
    predict,
    softmax_cross_entropy,
)
from autodiff.gradcheck import (
    finite_difference_gradient,
    gradient_check,
    numeric_gradient,
    relative_error,
)

__all__ = [
    "Network",
    "build_network",
    "HebbianTrace",
    "LossValue",
    "ForwardResult",
    "GradientSet",
    "forward_pass",
    "softmax_cross_entropy",
    "backward_pass",
    "loss_and_gradients",
    "predict",
    "finite_difference_gradient",
    "numeric_gradient",
    "gradient_check",
    "relative_error",
]
