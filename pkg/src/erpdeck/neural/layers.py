"""Layer kinds with analytic shapes, forward, manual backward and MAC counts.

Shapes passed to ``output_shape`` exclude the batch axis.  Layers cache what
their backward pass needs during ``forward``; a layer instance therefore
serves one forward/backward pair at a time.
"""

import math

import numpy as np

from ..errors import ShapeError, ValidationError
from .conv import conv2d_backward, conv2d_counted, conv2d_forward, out_size, resolve_pads


def _pair(v):
    return (int(v), int(v)) if np.isscalar(v) else (int(v[0]), int(v[1]))


class Layer:
    """Base class; subclasses fill ``params`` and implement the hooks."""

    kind = "layer"
    n_inputs = 1

    def __init__(self):
        self.params = {}
        self.grads = {}
        self.buffers = {}
        self.max_norm = {}
        self.training = False
        self.batch_stats = True
        self.needs_dx = True
        self.rng = None

    # -- structure -------------------------------------------------------
    def build(self, in_shapes, rng=None, dtype=np.float64):
        """Allocate parameters for the given input shapes; returns output shape."""
        return self.output_shape(in_shapes)

    def output_shape(self, in_shapes):
        return in_shapes[0]

    def param_count(self):
        return int(sum(p.size for p in self.params.values()))

    def macs(self, in_shapes):
        return 0

    def config(self):
        return {}

    # -- compute ---------------------------------------------------------
    def forward(self, xs):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def forward_counted(self, xs):
        return self.forward(xs), 0

    def zero_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def apply_constraints(self):
        """Project constrained weights so every output row obeys its max-norm."""
        for name, bound in self.max_norm.items():
            w = self.params[name]
            rows = self._constraint_rows(name, w)
            norms = np.sqrt(np.sum(rows * rows, axis=1, keepdims=True))
            scale = np.minimum(1.0, bound / np.maximum(norms, 1e-12))
            self._set_constraint_rows(name, rows * scale)

    def constraint_norms(self, name):
        rows = self._constraint_rows(name, self.params[name])
        return np.sqrt(np.sum(rows * rows, axis=1))

    def _constraint_rows(self, name, w):
        return w.reshape(w.shape[0], -1)

    def _set_constraint_rows(self, name, rows):
        self.params[name][...] = rows.reshape(self.params[name].shape)


def glorot_uniform(shape, fan_in, fan_out, rng, dtype):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, int(np.prod(shape))).reshape(shape).astype(dtype)


class Conv2D(Layer):
    """2-D convolution with optional groups (depthwise when groups == C_in)."""

    kind = "conv2d"

    def __init__(self, filters, kernel, stride=1, dilation=1, padding="valid", groups=1, bias=True,
                 max_norm=None, depth_multiplier=None):
        super().__init__()
        self.filters = int(filters)
        self.kernel = _pair(kernel)
        self.stride = _pair(stride)
        self.dilation = _pair(dilation)
        self.padding = padding
        self.groups = int(groups)
        self.bias = bool(bias)
        self.depth_multiplier = depth_multiplier
        if max_norm is not None:
            self.max_norm["weight"] = float(max_norm)
        self.pads = None
        self.in_shape = None

    @classmethod
    def depthwise(cls, in_channels, kernel, depth_multiplier=1, **kw):
        layer = cls(in_channels * depth_multiplier, kernel, groups=in_channels, depth_multiplier=depth_multiplier, **kw)
        layer.kind = "depthwise_conv2d"
        return layer

    def build(self, in_shapes, rng=None, dtype=np.float64):
        C, H, W = in_shapes[0]
        if C % self.groups or self.filters % self.groups:
            raise ShapeError(f"channels {C} / filters {self.filters} not divisible by groups {self.groups}")
        self.in_shape = (C, H, W)
        self.pads = resolve_pads(self.padding, (H, W), self.kernel, self.stride, self.dilation)
        cg = C // self.groups
        kh, kw = self.kernel
        shape = (self.filters, cg, kh, kw)
        fan_in = cg * kh * kw
        fan_out = self.filters // self.groups * kh * kw
        if rng is not None:
            self.params["weight"] = glorot_uniform(shape, fan_in, fan_out, rng.child("weight"), dtype)
        else:
            self.params["weight"] = np.zeros(shape, dtype)
        if self.bias:
            self.params["bias"] = np.zeros(self.filters, dtype)
        self.zero_grads()
        return self.output_shape(in_shapes)

    def output_shape(self, in_shapes):
        C, H, W = in_shapes[0]
        if self.in_shape is not None and (C, H, W) != self.in_shape:
            raise ShapeError(f"{self.kind} built for {self.in_shape}, got {(C, H, W)}")
        pads = self.pads or resolve_pads(self.padding, (H, W), self.kernel, self.stride, self.dilation)
        Ho = out_size(H, pads[0], self.kernel[0], self.stride[0], self.dilation[0])
        Wo = out_size(W, pads[1], self.kernel[1], self.stride[1], self.dilation[1])
        if Ho < 1 or Wo < 1:
            raise ShapeError(f"{self.kind}: kernel {self.kernel} does not fit input {(C, H, W)}")
        return (self.filters, Ho, Wo)

    def macs(self, in_shapes):
        out = self.output_shape(in_shapes)
        cg = in_shapes[0][0] // self.groups
        return int(np.prod(out)) * self.kernel[0] * self.kernel[1] * cg

    def config(self):
        return {
            "filters": self.filters, "kernel": list(self.kernel), "stride": list(self.stride),
            "dilation": list(self.dilation),
            "padding": self.padding if isinstance(self.padding, str) else [list(p) for p in self.padding],
            "groups": self.groups, "bias": self.bias, "max_norm": self.max_norm.get("weight"),
        }

    def _args(self):
        return self.stride, self.dilation, self.groups, self.pads

    def forward(self, xs):
        x = xs[0]
        if x.shape[1:] != self.in_shape:
            raise ShapeError(f"{self.kind} expects {self.in_shape}, got {x.shape[1:]}")
        y, self._cache = conv2d_forward(x, self.params["weight"], *self._args())
        if self.bias:
            y += self.params["bias"][None, :, None, None]
        return y

    def backward(self, dy):
        dx, dw = conv2d_backward(dy, self.params["weight"], self._cache, *self._args(), need_dx=self.needs_dx)
        self.grads["weight"] += dw
        if self.bias:
            self.grads["bias"] += dy.sum(axis=(0, 2, 3))
        self._cache = None
        return [dx]

    def forward_counted(self, xs):
        y, macs = conv2d_counted(xs[0], self.params["weight"], *self._args())
        if self.bias:
            y += self.params["bias"][None, :, None, None]
        return y, macs


class SeparableConv2D(Layer):
    """Depthwise convolution followed by a 1x1 pointwise mix; one bias at the end."""

    kind = "separable_conv2d"

    def __init__(self, filters, kernel, stride=1, padding="valid", depth_multiplier=1, bias=True, kind=None):
        super().__init__()
        self.filters = int(filters)
        self.kernel = _pair(kernel)
        self.stride = _pair(stride)
        self.padding = padding
        self.depth_multiplier = int(depth_multiplier)
        self.bias = bool(bias)
        if kind:
            self.kind = kind
        self.dw = None
        self.pw = None

    def build(self, in_shapes, rng=None, dtype=np.float64):
        C = in_shapes[0][0]
        self.dw = Conv2D.depthwise(C, self.kernel, self.depth_multiplier, stride=self.stride,
                                   padding=self.padding, bias=False)
        self.pw = Conv2D(self.filters, 1, bias=False)
        mid = self.dw.build(in_shapes, None if rng is None else rng.child("depthwise"), dtype)
        out = self.pw.build([mid], None if rng is None else rng.child("pointwise"), dtype)
        self.params = {"depthwise": self.dw.params["weight"], "pointwise": self.pw.params["weight"]}
        if self.bias:
            self.params["bias"] = np.zeros(self.filters, dtype)
        self.zero_grads()
        return out

    def _sync(self):
        self.dw.params["weight"] = self.params["depthwise"]
        self.pw.params["weight"] = self.params["pointwise"]

    def output_shape(self, in_shapes):
        if self.dw is None:
            raise ShapeError("separable conv used before build")
        return self.pw.output_shape([self.dw.output_shape(in_shapes)])

    def macs(self, in_shapes):
        mid = self.dw.output_shape(in_shapes)
        return self.dw.macs(in_shapes) + self.pw.macs([mid])

    def config(self):
        return {"filters": self.filters, "kernel": list(self.kernel), "stride": list(self.stride),
                "padding": self.padding, "depth_multiplier": self.depth_multiplier, "bias": self.bias}

    def forward(self, xs):
        self._sync()
        y = self.pw.forward([self.dw.forward(xs)])
        if self.bias:
            y += self.params["bias"][None, :, None, None]
        return y

    def backward(self, dy):
        self._sync()
        self.dw.zero_grads()
        self.pw.zero_grads()
        self.dw.needs_dx = self.needs_dx
        dmid = self.pw.backward(dy)[0]
        dx = self.dw.backward(dmid)
        self.grads["depthwise"] += self.dw.grads["weight"]
        self.grads["pointwise"] += self.pw.grads["weight"]
        if self.bias:
            self.grads["bias"] += dy.sum(axis=(0, 2, 3))
        return dx

    def forward_counted(self, xs):
        self._sync()
        mid, m1 = self.dw.forward_counted(xs)
        y, m2 = self.pw.forward_counted([mid])
        if self.bias:
            y += self.params["bias"][None, :, None, None]
        return y, m1 + m2


class Dense(Layer):
    """Fully connected layer on ``(N, features)``; ``max_norm`` bounds each unit's fan-in."""

    kind = "dense"

    def __init__(self, units, bias=True, max_norm=None):
        super().__init__()
        self.units = int(units)
        self.bias = bool(bias)
        if max_norm is not None:
            self.max_norm["weight"] = float(max_norm)
        self.in_features = None

    def build(self, in_shapes, rng=None, dtype=np.float64):
        if len(in_shapes[0]) != 1:
            raise ShapeError(f"dense expects flat features, got {in_shapes[0]}")
        self.in_features = in_shapes[0][0]
        shape = (self.in_features, self.units)
        if rng is not None:
            self.params["weight"] = glorot_uniform(shape, self.in_features, self.units, rng.child("weight"), dtype)
        else:
            self.params["weight"] = np.zeros(shape, dtype)
        if self.bias:
            self.params["bias"] = np.zeros(self.units, dtype)
        self.zero_grads()
        return (self.units,)

    def output_shape(self, in_shapes):
        if len(in_shapes[0]) != 1 or (self.in_features is not None and in_shapes[0][0] != self.in_features):
            raise ShapeError(f"dense built for {self.in_features} features, got {in_shapes[0]}")
        return (self.units,)

    def macs(self, in_shapes):
        return in_shapes[0][0] * self.units

    def config(self):
        return {"units": self.units, "bias": self.bias, "max_norm": self.max_norm.get("weight")}

    def _constraint_rows(self, name, w):
        return w.T

    def _set_constraint_rows(self, name, rows):
        self.params[name][...] = rows.T

    def forward(self, xs):
        x = xs[0]
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeError(f"dense expects (N, {self.in_features}), got {x.shape}")
        self._x = x
        y = x @ self.params["weight"]
        if self.bias:
            y = y + self.params["bias"]
        return y

    def backward(self, dy):
        self.grads["weight"] += self._x.T @ dy
        if self.bias:
            self.grads["bias"] += dy.sum(axis=0)
        dx = dy @ self.params["weight"].T
        self._x = None
        return [dx]

    def forward_counted(self, xs):
        x = xs[0]
        w = self.params["weight"]
        y = np.zeros((x.shape[0], self.units), dtype=np.result_type(x, w))
        macs = 0
        for j in range(x.shape[1]):
            y += x[:, j : j + 1] * w[j][None, :]
            macs += x.shape[0] * self.units
        if self.bias:
            y += self.params["bias"]
        return y, macs


class BatchNorm(Layer):
    """Per-channel normalisation over every axis except axis 1."""

    kind = "batchnorm"

    def __init__(self, eps=1e-5, momentum=0.1):
        super().__init__()
        self.eps = float(eps)
        self.momentum = float(momentum)

    def build(self, in_shapes, rng=None, dtype=np.float64):
        C = in_shapes[0][0]
        self.params = {"gamma": np.ones(C, dtype), "beta": np.zeros(C, dtype)}
        self.buffers = {"running_mean": np.zeros(C, dtype), "running_var": np.ones(C, dtype)}
        self.zero_grads()
        return in_shapes[0]

    def config(self):
        return {"eps": self.eps, "momentum": self.momentum}

    def _bshape(self, x):
        return (1, -1) + (1,) * (x.ndim - 2)

    @staticmethod
    def _csum(x):
        # per-channel sum; reducing the contiguous tail first is much faster
        return x.reshape(x.shape[0], x.shape[1], -1).sum(axis=2).sum(axis=0)

    def forward(self, xs):
        x = xs[0]
        bs = self._bshape(x)
        axes = None
        if self.training and self.batch_stats:
            n = x.size // x.shape[1]
            mu = self._csum(x) / n
            xc = x - mu.reshape(bs)
            var = self._csum(xc * xc) / n
            m = self.momentum
            self.buffers["running_mean"] = (1 - m) * self.buffers["running_mean"] + m * mu
            unbiased = var * n / max(n - 1, 1)
            self.buffers["running_var"] = (1 - m) * self.buffers["running_var"] + m * unbiased
            self._mode = "batch"
        else:
            mu = self.buffers["running_mean"]
            var = self.buffers["running_var"]
            self._mode = "running"
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mu.reshape(bs)) * inv.reshape(bs)
        self._cache = (xhat, inv, bs)
        return xhat * self.params["gamma"].reshape(bs) + self.params["beta"].reshape(bs)

    def backward(self, dy):
        xhat, inv, bs = self._cache
        sum_dy = self._csum(dy)
        sum_dy_xhat = self._csum(dy * xhat)
        self.grads["gamma"] += sum_dy_xhat
        self.grads["beta"] += sum_dy
        gamma = self.params["gamma"]
        if self._mode == "running":
            dx = dy * (gamma * inv).reshape(bs)
        else:
            n = dy.size // dy.shape[1]
            k = (gamma * inv).reshape(bs)
            dx = k * (dy - (sum_dy / n).reshape(bs) - xhat * (sum_dy_xhat / n).reshape(bs))
        self._cache = None
        return [dx]


class Activation(Layer):
    kind = "activation"

    def __init__(self, fn="elu", alpha=1.0):
        super().__init__()
        if fn not in ("elu", "tanh", "sigmoid", "linear"):
            raise ValidationError(f"unknown activation {fn!r}", "activation")
        self.fn = fn
        self.alpha = float(alpha)

    def config(self):
        return {"fn": self.fn, "alpha": self.alpha}

    def forward(self, xs):
        x = xs[0]
        if self.fn == "elu":
            y = np.where(x > 0, x, self.alpha * np.expm1(np.minimum(x, 0)))
        elif self.fn == "tanh":
            y = np.tanh(x)
        elif self.fn == "sigmoid":
            y = sigmoid(x)
        else:
            y = x
        self._x, self._y = x, y
        return y

    def backward(self, dy):
        x, y = self._x, self._y
        if self.fn == "elu":
            d = np.where(x > 0, 1.0, y + self.alpha)
        elif self.fn == "tanh":
            d = 1.0 - y * y
        elif self.fn == "sigmoid":
            d = y * (1.0 - y)
        else:
            d = 1.0
        self._x = self._y = None
        return [dy * d]


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class _Pool(Layer):
    def __init__(self, pool):
        super().__init__()
        self.pool = _pair(pool)

    def config(self):
        return {"pool": list(self.pool)}

    def output_shape(self, in_shapes):
        C, H, W = in_shapes[0]
        ph, pw = self.pool
        if H < ph or W < pw:
            raise ShapeError(f"pool {self.pool} larger than input {(H, W)}")
        return (C, H // ph, W // pw)

    def _blocks(self, x):
        N, C, H, W = x.shape
        ph, pw = self.pool
        Ho, Wo = H // ph, W // pw
        xr = x[:, :, : Ho * ph, : Wo * pw].reshape(N, C, Ho, ph, Wo, pw)
        return xr, Ho, Wo


class AvgPool2D(_Pool):
    kind = "avgpool2d"

    def forward(self, xs):
        x = xs[0]
        xr, Ho, Wo = self._blocks(x)
        self._shape = x.shape
        return xr.mean(axis=(3, 5))

    def backward(self, dy):
        N, C, H, W = self._shape
        ph, pw = self.pool
        Ho, Wo = dy.shape[2], dy.shape[3]
        dx = np.zeros(self._shape, dtype=dy.dtype)
        g = np.broadcast_to((dy / (ph * pw))[:, :, :, None, :, None], (N, C, Ho, ph, Wo, pw))
        dx[:, :, : Ho * ph, : Wo * pw] = g.reshape(N, C, Ho * ph, Wo * pw)
        return [dx]


class MaxPool2D(_Pool):
    kind = "maxpool2d"

    def forward(self, xs):
        x = xs[0]
        xr, Ho, Wo = self._blocks(x)
        N, C = x.shape[:2]
        ph, pw = self.pool
        flat = xr.transpose(0, 1, 2, 4, 3, 5).reshape(N, C, Ho, Wo, ph * pw)
        self._arg = flat.argmax(axis=-1)
        self._shape = x.shape
        return np.take_along_axis(flat, self._arg[..., None], axis=-1)[..., 0]

    def backward(self, dy):
        N, C, H, W = self._shape
        ph, pw = self.pool
        Ho, Wo = dy.shape[2], dy.shape[3]
        flat = np.zeros((N, C, Ho, Wo, ph * pw), dtype=dy.dtype)
        np.put_along_axis(flat, self._arg[..., None], dy[..., None], axis=-1)
        blocks = flat.reshape(N, C, Ho, Wo, ph, pw).transpose(0, 1, 2, 4, 3, 5)
        dx = np.zeros(self._shape, dtype=dy.dtype)
        dx[:, :, : Ho * ph, : Wo * pw] = blocks.reshape(N, C, Ho * ph, Wo * pw)
        return [dx]


class Dropout(Layer):
    """Inverted dropout: kept units are scaled by ``1 / (1 - p)`` at train time."""

    kind = "dropout"

    def __init__(self, p=0.5):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise ValidationError("dropout probability must lie in [0, 1)", "p")
        self.p = float(p)

    def config(self):
        return {"p": self.p}

    def forward(self, xs):
        x = xs[0]
        if not self.training or self.p == 0.0 or self.rng is None:
            self._mask = None
            return x
        keep = self.rng.bernoulli(x.shape, 1.0 - self.p)
        self._mask = keep.astype(x.dtype) * x.dtype.type(1.0 / (1.0 - self.p))
        return x * self._mask

    def backward(self, dy):
        return [dy if self._mask is None else dy * self._mask]


class Flatten(Layer):
    kind = "flatten"

    def output_shape(self, in_shapes):
        return (int(np.prod(in_shapes[0])),)

    def forward(self, xs):
        self._shape = xs[0].shape
        return xs[0].reshape(xs[0].shape[0], -1)

    def backward(self, dy):
        return [dy.reshape(self._shape)]


class Reshape(Layer):
    kind = "reshape"

    def __init__(self, shape):
        super().__init__()
        self.shape = tuple(int(s) for s in shape)

    def config(self):
        return {"shape": list(self.shape)}

    def output_shape(self, in_shapes):
        if int(np.prod(in_shapes[0])) != int(np.prod(self.shape)):
            raise ShapeError(f"cannot reshape {in_shapes[0]} to {self.shape}")
        return self.shape

    def forward(self, xs):
        self._shape = xs[0].shape
        return xs[0].reshape((xs[0].shape[0],) + self.shape)

    def backward(self, dy):
        return [dy.reshape(self._shape)]


class ZeroPad(Layer):
    """Zero padding along the last (time) axis."""

    kind = "zeropad"

    def __init__(self, left, right=None):
        super().__init__()
        self.left = int(left)
        self.right = int(left if right is None else right)

    def config(self):
        return {"left": self.left, "right": self.right}

    def output_shape(self, in_shapes):
        s = in_shapes[0]
        return s[:-1] + (s[-1] + self.left + self.right,)

    def forward(self, xs):
        x = xs[0]
        pad = [(0, 0)] * (x.ndim - 1) + [(self.left, self.right)]
        return np.pad(x, pad)

    def backward(self, dy):
        return [dy[..., self.left : dy.shape[-1] - self.right]]


class Chomp1D(Layer):
    """Drops the trailing ``size`` samples of the time axis."""

    kind = "chomp1d"

    def __init__(self, size):
        super().__init__()
        self.size = int(size)

    def config(self):
        return {"size": self.size}

    def output_shape(self, in_shapes):
        s = in_shapes[0]
        if s[-1] <= self.size:
            raise ShapeError(f"chomp of {self.size} leaves nothing of {s}")
        return s[:-1] + (s[-1] - self.size,)

    def forward(self, xs):
        self._n = xs[0].shape[-1]
        return xs[0][..., : self._n - self.size]

    def backward(self, dy):
        pad = [(0, 0)] * (dy.ndim - 1) + [(0, self.size)]
        return [np.pad(dy, pad)]


class Add(Layer):
    kind = "add"
    n_inputs = 2

    def output_shape(self, in_shapes):
        if any(s != in_shapes[0] for s in in_shapes):
            raise ShapeError(f"add needs equal shapes, got {in_shapes}")
        return in_shapes[0]

    def forward(self, xs):
        self._k = len(xs)
        out = xs[0]
        for x in xs[1:]:
            out = out + x
        return out

    def backward(self, dy):
        return [dy] * self._k


class Concat(Layer):
    """Concatenation along the channel axis."""

    kind = "concat"
    n_inputs = None

    def output_shape(self, in_shapes):
        rest = in_shapes[0][1:]
        if any(s[1:] != rest for s in in_shapes):
            raise ShapeError(f"concat needs matching trailing shapes, got {in_shapes}")
        return (sum(s[0] for s in in_shapes),) + rest

    def forward(self, xs):
        self._sizes = [x.shape[1] for x in xs]
        return np.concatenate(xs, axis=1)

    def backward(self, dy):
        cuts = np.cumsum(self._sizes)[:-1]
        return list(np.split(dy, cuts, axis=1))


class SelectLast(Layer):
    """Last time step of ``(C, 1, T)`` features, giving ``(C,)``."""

    kind = "select_last"

    def output_shape(self, in_shapes):
        C, H, W = in_shapes[0]
        if H != 1:
            raise ShapeError(f"select_last expects a single row, got {in_shapes[0]}")
        return (C,)

    def forward(self, xs):
        self._shape = xs[0].shape
        return xs[0][:, :, 0, -1]

    def backward(self, dy):
        dx = np.zeros(self._shape, dtype=dy.dtype)
        dx[:, :, 0, -1] = dy
        return [dx]


LAYER_TYPES = {
    "conv2d": Conv2D,
    "depthwise_conv2d": Conv2D,
    "separable_conv2d": SeparableConv2D,
    "separable_conv1d": SeparableConv2D,
    "dense": Dense,
    "batchnorm": BatchNorm,
    "activation": Activation,
    "avgpool2d": AvgPool2D,
    "maxpool2d": MaxPool2D,
    "dropout": Dropout,
    "flatten": Flatten,
    "reshape": Reshape,
    "zeropad": ZeroPad,
    "chomp1d": Chomp1D,
    "add": Add,
    "concat": Concat,
    "select_last": SelectLast,
}


def layer_from_config(kind, cfg):
    """Re-create a layer from ``kind`` and its ``config()`` dictionary."""
    if kind not in LAYER_TYPES:
        raise ValidationError(f"unknown layer kind {kind!r}", "kind")
    cfg = dict(cfg)
    if kind in ("conv2d", "depthwise_conv2d"):
        pad = cfg["padding"]
        if not isinstance(pad, str):
            pad = tuple(tuple(p) for p in pad)
        layer = Conv2D(cfg["filters"], cfg["kernel"], cfg["stride"], cfg["dilation"], pad, cfg["groups"],
                       cfg["bias"], cfg.get("max_norm"))
        layer.kind = kind
        return layer
    if kind in ("separable_conv2d", "separable_conv1d"):
        return SeparableConv2D(cfg["filters"], cfg["kernel"], cfg["stride"], cfg["padding"],
                               cfg["depth_multiplier"], cfg["bias"], kind=kind)
    if kind == "dense":
        return Dense(cfg["units"], cfg["bias"], cfg.get("max_norm"))
    if kind == "batchnorm":
        return BatchNorm(cfg["eps"], cfg["momentum"])
    if kind == "activation":
        return Activation(cfg["fn"], cfg["alpha"])
    if kind in ("avgpool2d", "maxpool2d"):
        return LAYER_TYPES[kind](cfg["pool"])
    if kind == "dropout":
        return Dropout(cfg["p"])
    if kind == "reshape":
        return Reshape(cfg["shape"])
    if kind == "zeropad":
        return ZeroPad(cfg["left"], cfg["right"])
    if kind == "chomp1d":
        return Chomp1D(cfg["size"])
    return LAYER_TYPES[kind]()
