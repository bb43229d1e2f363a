"""Dense float64 tensors with reverse-mode automatic differentiation.

Every operation appends an implicit graph node holding its parents and a
backward closure; node ids grow monotonically, so descending id order is a
valid reverse-topological order for the backward sweep. All math is float64
and deterministic for fixed inputs.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import erf

from ..errors import NotScalar, ShapeMismatch, BadConfig

Array = np.ndarray

_node_ids = itertools.count()
_grad_enabled: bool = True

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


class no_grad:
    """Context manager that suppresses graph construction (inference mode)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


class Node:
    """One computation-graph record: op kind, parent tensors, backward closure."""

    __slots__ = ("op", "parents", "backward")

    def __init__(self, op: str, parents: tuple, backward: Callable[[Array], tuple]):
        self.op = op
        self.parents = parents
        self.backward = backward


class Tensor:
    """N-dimensional float64 array, optionally tracked by the autodiff graph.

    ``grad`` accumulates across repeated ``backward`` calls until cleared.
    """

    __slots__ = ("data", "requires_grad", "grad", "_node", "_id")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Array | None = None
        self._node: Node | None = None
        self._id = next(_node_ids)

    # -- introspection -------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise NotScalar(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        op = self._node.op if self._node is not None else "leaf"
        return f"Tensor(shape={self.shape}, op={op}, requires_grad={self.requires_grad})"

    # -- graph plumbing ------------------------------------------------

    def detach(self) -> "Tensor":
        """Same data, cut off from the graph."""
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, retain: bool = False) -> dict:
        """Backpropagate from this scalar; returns {leaf tensor: gradient}.

        Gradients accumulate into ``.grad`` of every requires_grad leaf.
        """
        if self.data.size != 1:
            raise NotScalar(f"backward needs a scalar loss, got shape {self.shape}")

        # Collect the reachable subgraph, then sweep in descending creation
        # order (valid reverse-topological order: parents precede children).
        seen: dict[int, Tensor] = {self._id: self}
        stack = [self]
        while stack:
            t = stack.pop()
            if t._node is None:
                continue
            for p in t._node.parents:
                if p._id not in seen:
                    seen[p._id] = p
                    stack.append(p)
        order = sorted(seen.values(), key=lambda t: t._id, reverse=True)

        flowing: dict[int, Array] = {self._id: np.ones_like(self.data)}
        leaf_grads: dict[Tensor, Array] = {}
        for t in order:
            g = flowing.pop(t._id, None)
            if g is None:
                continue
            if t._node is None:
                if t.requires_grad:
                    if t.grad is None:
                        t.grad = np.zeros_like(t.data)
                    t.grad += g
                    leaf_grads[t] = t.grad
                continue
            parent_grads = t._node.backward(g)
            for p, pg in zip(t._node.parents, parent_grads):
                if pg is None or not p.requires_grad:
                    continue
                if p._id in flowing:
                    flowing[p._id] += pg
                else:
                    flowing[p._id] = pg
        return leaf_grads

    # -- operator sugar --------------------------------------------------

    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __neg__(self):
        return neg(self)

    def __truediv__(self, scalar):
        if isinstance(scalar, Tensor):
            raise TypeError("tensor/tensor division is not a primitive; multiply by a reciprocal")
        return mul(self, _as_tensor(1.0 / float(scalar)))

    def __matmul__(self, other):
        return matmul(self, _as_tensor(other))

    def __getitem__(self, index):
        return take(self, index)

    # -- method sugar for common primitives -------------------------------

    def sum(self, axis=None, keepdims: bool = False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def swapaxes(self, a: int, b: int):
        return swapaxes(self, a, b)

    def relu(self):
        return relu(self)

    def gelu(self):
        return gelu(self)

    def exp(self):
        return texp(self)

    def log(self):
        return tlog(self)

    def sqrt(self):
        return tsqrt(self)

    def sigmoid(self):
        return sigmoid(self)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def make_op(data: Array, parents: Sequence[Tensor], op: str,
            backward: Callable[[Array], tuple]) -> Tensor:
    """Build an op output; extension point for custom differentiable ops.

    ``backward(out_grad)`` must return one gradient (or None) per parent.
    Graph recording is skipped under ``no_grad`` or when no parent needs it.
    """
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._node = Node(op, tuple(parents), backward)
    return out


def _unbroadcast(grad: Array, shape: tuple) -> Array:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# -- elementwise arithmetic -------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    data = a.data + b.data
    return make_op(data, (a, b), "add", lambda g: (
        _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a: Tensor, b: Tensor) -> Tensor:
    data = a.data - b.data
    return make_op(data, (a, b), "sub", lambda g: (
        _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data * b.data
    return make_op(data, (a, b), "mul", lambda g: (
        _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)))


def neg(a: Tensor) -> Tensor:
    return make_op(-a.data, (a,), "neg", lambda g: (-g,))


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return make_op(np.where(mask, a.data, 0.0), (a,), "relu", lambda g: (g * mask,))


def gelu(a: Tensor) -> Tensor:
    x = a.data
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    out = x * cdf
    pdf = np.exp(-0.5 * x * x) * _INV_SQRT2PI
    return make_op(out, (a,), "gelu", lambda g: (g * (cdf + x * pdf),))


def texp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return make_op(out, (a,), "exp", lambda g: (g * out,))


def tlog(a: Tensor) -> Tensor:
    return make_op(np.log(a.data), (a,), "log", lambda g: (g / a.data,))


def tsqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)
    return make_op(out, (a,), "sqrt", lambda g: (g * (0.5 / out),))


def sigmoid(a: Tensor) -> Tensor:
    out = np.where(a.data >= 0,
                   1.0 / (1.0 + np.exp(-np.abs(a.data))),
                   np.exp(-np.abs(a.data)) / (1.0 + np.exp(-np.abs(a.data))))
    return make_op(out, (a,), "sigmoid", lambda g: (g * out * (1.0 - out),))


def clip(a: Tensor, lo: float, hi: float) -> Tensor:
    mask = (a.data >= lo) & (a.data <= hi)
    return make_op(np.clip(a.data, lo, hi), (a,), "clip", lambda g: (g * mask,))


# -- linear algebra ----------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product over the last two axes; leading axes broadcast."""
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatch("matmul operands need at least 2 dimensions")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"inner dimensions differ: {a.shape} x {b.shape}")
    try:
        data = a.data @ b.data
    except ValueError as exc:
        raise ShapeMismatch(str(exc)) from exc

    def backward(g):
        ga = _unbroadcast(g @ b.data.swapaxes(-1, -2), a.shape)
        gb = _unbroadcast(a.data.swapaxes(-1, -2) @ g, b.shape)
        return ga, gb

    return make_op(data, (a, b), "matmul", backward)


def conv1d_valid(x: Tensor, w: Tensor, stride: int = 1) -> Tensor:
    """Valid (no-padding) cross-correlation along the time axis.

    ``x`` is (L, c_in) or (batch, L, c_in); ``w`` is (k, c_in, c_out).
    Output length is (L - k)//stride + 1.
    """
    if stride < 1:
        raise BadConfig(f"stride must be >= 1, got {stride}")
    squeeze = x.ndim == 2
    xd = x.data[None] if squeeze else x.data
    if xd.ndim != 3 or w.ndim != 3:
        raise ShapeMismatch("conv1d_valid expects (L, c_in) input and (k, c_in, c_out) kernel")
    batch, length, c_in = xd.shape
    k, kc_in, c_out = w.shape
    if kc_in != c_in:
        raise ShapeMismatch(f"kernel has {kc_in} input channels, input has {c_in}")
    if k > length:
        raise ShapeMismatch(f"kernel length {k} exceeds input length {length}")
    l_out = (length - k) // stride + 1

    windows = np.lib.stride_tricks.sliding_window_view(xd, k, axis=1)  # (B, L-k+1, c_in, k)
    win = windows[:, ::stride]
    flat = np.ascontiguousarray(win.transpose(0, 1, 3, 2)).reshape(batch * l_out, k * c_in)
    out = (flat @ w.data.reshape(k * c_in, c_out)).reshape(batch, l_out, c_out)

    def backward(g):
        g3 = g[None] if squeeze else g
        gx = np.zeros_like(xd)
        for t in range(k):
            gx[:, t:t + stride * (l_out - 1) + 1:stride, :] += g3 @ w.data[t].T
        gw = (flat.T @ g3.reshape(batch * l_out, c_out)).reshape(k, c_in, c_out)
        return gx[0] if squeeze else gx, gw

    return make_op(out[0] if squeeze else out, (x, w), "conv1d", backward)


def softmax_lastdim(x: Tensor) -> Tensor:
    """Numerically stabilized softmax over the last axis."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        return (s * (g - (g * s).sum(axis=-1, keepdims=True)),)

    return make_op(s, (x,), "softmax", backward)


# -- reductions and shape ops -------------------------------------------------


def _axis_tuple(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(a % ndim for a in axis)


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _axis_tuple(axis, x.ndim)
    data = x.data.sum(axis=axes, keepdims=keepdims)

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, x.shape).copy(),)

    return make_op(data, (x,), "sum", backward)


def tmean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _axis_tuple(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if x.ndim else 1
    return tsum(x, axis=axis, keepdims=keepdims) * (1.0 / count)


def reshape(x: Tensor, shape: tuple) -> Tensor:
    data = x.data.reshape(shape)
    return make_op(data, (x,), "reshape", lambda g: (g.reshape(x.shape),))


def swapaxes(x: Tensor, a: int, b: int) -> Tensor:
    data = x.data.swapaxes(a, b)
    return make_op(data, (x,), "swapaxes", lambda g: (g.swapaxes(a, b),))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    data = np.concatenate([t.data for t in tensors], axis=axis)
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return make_op(data, tuple(tensors), "concat", backward)


def take(x: Tensor, index) -> Tensor:
    """Select along axis 0 by an int or an integer array (gather)."""
    if isinstance(index, (int, np.integer)):
        idx = int(index)
        data = x.data[idx]

        def backward(g):
            gx = np.zeros_like(x.data)
            gx[idx] = g
            return (gx,)

        return make_op(data, (x,), "take", backward)

    idx = np.asarray(index, dtype=np.intp)
    data = x.data[idx]

    def backward(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, idx, g)
        return (gx,)

    return make_op(data, (x,), "take", backward)


# -- normalization -------------------------------------------------------------


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then apply per-feature gain and bias."""
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = xhat * gain.data + bias.data

    def backward(g):
        lead = tuple(range(g.ndim - 1))
        ggain = (g * xhat).sum(axis=lead)
        gbias = g.sum(axis=lead)
        gh = g * gain.data
        gx = inv * (gh - gh.mean(axis=-1, keepdims=True)
                    - xhat * (gh * xhat).mean(axis=-1, keepdims=True))
        return gx, ggain, gbias

    return make_op(out, (x, gain, bias), "layer_norm", backward)


def batch_norm(x: Tensor, gain: Tensor, bias: Tensor,
               running_mean: Array, running_var: Array,
               training: bool, momentum: float = 0.1, eps: float = 1e-5) -> Tensor:
    """Normalize per channel (last axis) over all other axes.

    Training mode uses batch statistics and updates the running arrays
    in place; inference mode reads the running arrays only.
    """
    reduce_axes = tuple(range(x.ndim - 1))
    if training:
        mu = x.data.mean(axis=reduce_axes)
        var = x.data.var(axis=reduce_axes)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mu
        running_var *= 1.0 - momentum
        running_var += momentum * var
    else:
        mu, var = running_mean, running_var
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = xhat * gain.data + bias.data

    def backward(g):
        ggain = (g * xhat).sum(axis=reduce_axes)
        gbias = g.sum(axis=reduce_axes)
        gh = g * gain.data
        if training:
            gx = inv * (gh - gh.mean(axis=reduce_axes, keepdims=True)
                        - xhat * (gh * xhat).mean(axis=reduce_axes, keepdims=True))
        else:
            gx = gh * inv
        return gx, ggain, gbias

    return make_op(out, (x, gain, bias), "batch_norm", backward)


def pairwise_distance(a: Tensor, b: Tensor) -> Tensor:
    """Euclidean distance over the last axis; gradient at zero distance is 0."""
    diff = a.data - b.data
    dist = np.sqrt((diff * diff).sum(axis=-1))

    def backward(g):
        coef = np.where(dist > 0, g / np.where(dist > 0, dist, 1.0), 0.0)
        ga = coef[..., None] * diff
        return _unbroadcast(ga, a.shape), _unbroadcast(-ga, b.shape)

    return make_op(dist, (a, b), "euclidean", backward)
