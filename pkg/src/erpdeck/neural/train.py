"""AdamW training loop with binary cross-entropy on sigmoid outputs."""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import DegenerateLabels, NumericalError, ValidationError
from ..rng import Stream


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    weight_decay: float = 1e-4
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-7
    batch_size: int = 64
    epochs: int = 250

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        self.validate()

    def validate(self):
        if not (self.lr > 0 and self.eps > 0 and self.weight_decay >= 0):
            raise ValidationError("lr and eps must be positive, weight_decay >= 0", "train")
        if not all(0.0 < b < 1.0 for b in self.betas) or len(self.betas) != 2:
            raise ValidationError("betas must be two values in (0, 1)", "train.betas")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValidationError("batch_size must be >= 1 and epochs >= 0", "train")
        return self

    @classmethod
    def online(cls):
        return cls(epochs=500)

    @classmethod
    def comparison(cls):
        return cls(epochs=250)

    def to_dict(self):
        d = asdict(self)
        d["betas"] = list(self.betas)
        return d


@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0

    @classmethod
    def zeros(cls, params):
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], 0)


def adamw_step(params, grads, state, cfg):
    """One in-place AdamW update with bias-corrected moments.

    ``w <- w - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * w``
    """
    state.t += 1
    b1, b2 = cfg.betas
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        step = (m / c1) / (np.sqrt(v / c2) + cfg.eps)
        decay = cfg.lr * cfg.weight_decay * p
        p -= cfg.lr * step + decay
    return params


def bce_with_logits(z, y):
    """Mean binary cross-entropy of ``sigmoid(z)`` against ``y`` and its gradient."""
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    loss = np.mean(np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z))))
    p = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
    return float(loss), (p - y) / len(z)


def bce(scores, y):
    """Mean binary cross-entropy of probabilities (clipped away from 0 and 1)."""
    s = np.clip(np.asarray(scores, dtype=np.float64), 1e-15, 1 - 1e-15)
    y = np.asarray(y, dtype=np.float64)
    return float(-np.mean(y * np.log(s) + (1 - y) * np.log(1 - s)))


@dataclass
class TrainResult:
    graph: object
    loss_trace: list = field(default_factory=list)
    steps: int = 0


def _xy(data, labels):
    if labels is None:
        return np.asarray(data.data), np.asarray(data.labels)
    return np.asarray(data), np.asarray(labels)


def train(g, data, labels=None, cfg=None, seed=0, callback=None):
    """Train ``g`` in place.

    Parameters
    ----------
    g : ModelGraph
    data : EpochTensor or array, shape (n, channels, samples)
        Z-scored inputs; with an ``EpochTensor`` the labels come from it.
    labels : array of {0, 1}, optional
    cfg : TrainConfig
    seed : int
        Drives the per-epoch shuffles and dropout masks.
    callback : callable(epoch, mean_loss), optional

    Returns
    -------
    TrainResult
        The graph (left in eval mode) and the mean loss per epoch.
    """
    cfg = TrainConfig() if cfg is None else cfg
    X, y = _xy(data, labels)
    if len(X) != len(y):
        raise ValidationError("data and labels differ in length", "labels")
    if not np.all((y == 0) | (y == 1)):
        raise DegenerateLabels("labels must be binary 0/1")
    params = [p for _, _, p in g.parameters()]
    state = AdamState.zeros(params)
    rng = Stream(seed, "train")
    g.train(dropout=True, batch_stats=True, rng=rng.child("dropout"))
    trace = []
    n = len(X)
    steps = 0
    try:
        for epoch in range(cfg.epochs):
            order = rng.child("shuffle", epoch).permutation(n)
            total = 0.0
            for start in range(0, n, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                loss = g.loss_and_backward(X[idx], y[idx])
                if not math.isfinite(loss):
                    raise NumericalError(f"loss became {loss} at epoch {epoch}")
                grads = [gr for _, _, gr in g.gradients()]
                adamw_step(params, grads, state, cfg)
                g.apply_constraints()
                total += loss * len(idx)
                steps += 1
            trace.append(total / max(n, 1))
            if callback is not None:
                callback(epoch, trace[-1])
    finally:
        g.eval()
    return TrainResult(g, trace, steps)
