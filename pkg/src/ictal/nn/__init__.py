from .functional import (
    bce_with_logits,
    binary_cross_entropy,
    conv1d_backward,
    conv1d_forward,
    dense_backward,
    dense_forward,
    dropout_backward,
    dropout_forward,
    maxpool1d_backward,
    maxpool1d_forward,
    relu_backward,
    relu_forward,
    sigmoid_backward,
    sigmoid_forward,
)
from .optim import AdamState, LrSchedule, adam_step, lr_schedule_step
from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import fd_gradient, max_relative_error

__all__ = [
    "AdamState",
    "LrSchedule",
    "adam_step",
    "bce_with_logits",
    "binary_cross_entropy",
    "conv1d_backward",
    "conv1d_forward",
    "dense_backward",
    "dense_forward",
    "dropout_backward",
    "dropout_forward",
    "fd_gradient",
    "load_checkpoint",
    "lr_schedule_step",
    "max_relative_error",
    "maxpool1d_backward",
    "maxpool1d_forward",
    "relu_backward",
    "relu_forward",
    "save_checkpoint",
    "sigmoid_backward",
    "sigmoid_forward",
]
