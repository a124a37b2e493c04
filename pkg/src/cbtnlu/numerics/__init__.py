from .params import (Parameter, add_l2_grads, copy_values, l2_penalty,
                     load_values, zero_grads)
from .ops import (GruWeights, conv_encode, conv_valid_count, dropout,
                  gate_combine, gru_step, gru_step_backward, max_pool_time,
                  relu, sigmoid, stable_bce)
from .optim import AdamState, LrSchedule, adam_update, clip_global_norm, lr_at
from .inits import init_orthogonal, init_truncated_normal
from .gradcheck import grad_check
from .checkpoint import load_checkpoint, load_into, save_checkpoint

__all__ = [
    "AdamState", "GruWeights", "LrSchedule", "Parameter", "adam_update",
    "add_l2_grads", "clip_global_norm", "conv_encode", "conv_valid_count",
    "copy_values", "dropout", "gate_combine", "grad_check", "gru_step",
    "gru_step_backward", "init_orthogonal", "init_truncated_normal",
    "l2_penalty", "load_checkpoint", "load_into", "load_values", "lr_at",
    "max_pool_time", "relu", "save_checkpoint", "sigmoid", "stable_bce",
    "zero_grads",
]
