"""Parameter-holding building blocks on top of the tensor primitives.

Weight matrices and kernels initialize uniform in [-1/sqrt(fan_in),
+1/sqrt(fan_in)]; biases start at zero, norm gains at one.
"""

from __future__ import annotations

import math

import numpy as np

from . import tensor as T
from .tensor import Tensor


def uniform_init(rng: np.random.Generator, fan_in: int, shape) -> Tensor:
    bound = 1.0 / math.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


class Linear:
    def __init__(self, fan_in: int, fan_out: int, rng: np.random.Generator, bias: bool = True):
        self.w = uniform_init(rng, fan_in, (fan_in, fan_out))
        self.b = Tensor(np.zeros(fan_out), requires_grad=True) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        # Flatten leading axes so the product runs as one GEMM.
        lead = x.shape[:-1]
        out = x.reshape((-1, x.shape[-1])) @ self.w
        out = out.reshape(lead + (self.w.shape[1],))
        if self.b is not None:
            out = out + self.b
        return out

    def params(self):
        yield "w", self.w
        if self.b is not None:
            yield "b", self.b


class LayerNorm:
    def __init__(self, dim: int, eps: float = 1e-5):
        self.gain = Tensor(np.ones(dim), requires_grad=True)
        self.bias = Tensor(np.zeros(dim), requires_grad=True)
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return T.layer_norm(x, self.gain, self.bias, self.eps)

    def params(self):
        yield "gain", self.gain
        yield "bias", self.bias


class BatchNorm:
    """Per-channel batch norm with running statistics (momentum 0.1)."""

    def __init__(self, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        self.gain = Tensor(np.ones(channels), requires_grad=True)
        self.bias = Tensor(np.zeros(channels), requires_grad=True)
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self.momentum = momentum
        self.eps = eps

    def __call__(self, x: Tensor, training: bool) -> Tensor:
        return T.batch_norm(x, self.gain, self.bias, self.running_mean,
                            self.running_var, training, self.momentum, self.eps)

    def params(self):
        yield "gain", self.gain
        yield "bias", self.bias

    def state(self):
        yield "running_mean", self.running_mean
        yield "running_var", self.running_var

    def load_state(self, name: str, value: np.ndarray) -> None:
        getattr(self, name)[...] = value


class Conv1d:
    """Valid stride-1 convolution stage kernel; no bias (a norm follows)."""

    def __init__(self, kernel: int, c_in: int, c_out: int, rng: np.random.Generator):
        self.w = uniform_init(rng, kernel * c_in, (kernel, c_in, c_out))
        self.kernel = kernel

    def __call__(self, x: Tensor, stride: int = 1) -> Tensor:
        return T.conv1d_valid(x, self.w, stride)

    def params(self):
        yield "w", self.w
