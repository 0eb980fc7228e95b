"""Minimal numerics: autodiff tensors, MLP layers, Adam, array checkpoints."""

from .adam import AdamState, adam_step, init_adam
from .checkpoint import MAGIC, CheckpointError, load_arrays, save_arrays
from .nn import MlpSpec, init_mlp_params, mlp_forward, mlp_infer
from .tensor import (
    GraphConsumed,
    NonFinite,
    NotScalar,
    ShapeMismatch,
    Tensor,
    add,
    backward,
    concat,
    matmul,
    mish,
    mse,
    mul,
    relu,
    scale,
    sub,
    sum_all,
    tanh,
)

__all__ = [
    "AdamState",
    "adam_step",
    "init_adam",
    "MAGIC",
    "CheckpointError",
    "load_arrays",
    "save_arrays",
    "MlpSpec",
    "init_mlp_params",
    "mlp_forward",
    "mlp_infer",
    "GraphConsumed",
    "NonFinite",
    "NotScalar",
    "ShapeMismatch",
    "Tensor",
    "add",
    "backward",
    "concat",
    "matmul",
    "mish",
    "mse",
    "mul",
    "relu",
    "scale",
    "sub",
    "sum_all",
    "tanh",
]
