"""Minimal reverse-mode autodiff: tensors, ops, Adam, tensor checkpoints."""

from .checkpoint import CheckpointError, load_tensors, save_tensors
from .optim import Adam
from .tensor import (
    POOLS,
    ShapeError,
    Tensor,
    add,
    add_n,
    avg_pool_rows,
    concat,
    cross_entropy,
    embedding_lookup,
    matmul,
    max_pool_rows,
    nll,
    relu,
    scale,
    scale_rows,
    sigmoid,
    softmax,
    sum_pool_rows,
    take_rows,
)

__all__ = [
    "Adam",
    "CheckpointError",
    "POOLS",
    "ShapeError",
    "Tensor",
    "add",
    "add_n",
    "avg_pool_rows",
    "concat",
    "cross_entropy",
    "embedding_lookup",
    "load_tensors",
    "matmul",
    "max_pool_rows",
    "nll",
    "relu",
    "save_tensors",
    "scale",
    "scale_rows",
    "sigmoid",
    "softmax",
    "sum_pool_rows",
    "take_rows",
]
