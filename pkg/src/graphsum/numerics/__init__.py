from .tensor import (
    Tensor,
    Parameter,
    no_grad,
    add,
    sub,
    neg,
    div,
    mul,
    matmul,
    concat,
    tanh,
    sigmoid,
    relu,
    leaky_relu,
    elu,
    exp,
    log,
    sqrt,
    softmax,
    embedding,
    pick,
    scatter_sum,
    dropout,
    slice_axis,
    transpose,
    reshape,
    tsum,
    tmean,
)
from .optim import Adam, clip_grad_norm
from .gradcheck import finite_difference_check

__all__ = [
    "Tensor",
    "Parameter",
    "no_grad",
    "add",
    "sub",
    "neg",
    "div",
    "mul",
    "matmul",
    "concat",
    "tanh",
    "sigmoid",
    "relu",
    "leaky_relu",
    "elu",
    "exp",
    "log",
    "sqrt",
    "softmax",
    "embedding",
    "pick",
    "scatter_sum",
    "dropout",
    "slice_axis",
    "transpose",
    "reshape",
    "tsum",
    "tmean",
    "Adam",
    "clip_grad_norm",
    "finite_difference_check",
]
