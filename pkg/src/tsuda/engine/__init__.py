"""Float64 tensor engine: autodiff primitives, layers, Adam, checkpoints."""

from .tensor import (
    Tensor,
    no_grad,
    make_op,
    add,
    sub,
    mul,
    neg,
    relu,
    gelu,
    sigmoid,
    clip,
    matmul,
    conv1d_valid,
    softmax_lastdim,
    tsum,
    tmean,
    reshape,
    swapaxes,
    concat,
    take,
    layer_norm,
    batch_norm,
    pairwise_distance,
)
from .optim import Adam, adam_update
from .checkpoint import read_checkpoint, write_checkpoint

__all__ = [
    "Tensor", "no_grad", "make_op",
    "add", "sub", "mul", "neg", "relu", "gelu", "sigmoid", "clip",
    "matmul", "conv1d_valid", "softmax_lastdim",
    "tsum", "tmean", "reshape", "swapaxes", "concat", "take",
    "layer_norm", "batch_norm", "pairwise_distance",
    "Adam", "adam_update", "read_checkpoint", "write_checkpoint",
]
