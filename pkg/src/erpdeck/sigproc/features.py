"""Feature preprocessors shared by the pipelines."""

import hashlib

import numpy as np

from ..errors import InvalidFactor, InvalidInput, NotFitted


def _data(e):
    return np.asarray(getattr(e, "data", e), dtype=np.float64)


def moving_avg_decimate(e, factor):
    """Average non-overlapping blocks of ``factor`` samples, concatenate channels.

    Returns ``(trials, channels * (samples // factor))``; trailing samples that
    do not fill a block are dropped.
    """
    x = _data(e)
    factor = int(factor)
    if factor < 1:
        raise InvalidFactor("factor must be >= 1")
    n, c, s = x.shape
    if factor > s:
        raise InvalidFactor(f"factor {factor} exceeds {s} samples")
    nb = s // factor
    blocks = x[:, :, : nb * factor].reshape(n, c, nb, factor).mean(axis=3)
    return blocks.reshape(n, c * nb)


class Windsorizer:
    """Per-channel percentile clipping; percentiles come from training data.

    Percentiles use linear interpolation between order statistics.
    """

    def __init__(self, lo_pct=10.0, hi_pct=90.0):
        self.lo_pct = lo_pct
        self.hi_pct = hi_pct
        self.lo_ = None
        self.hi_ = None

    def fit(self, e):
        x = _data(e)
        if x.size == 0:
            raise InvalidInput("cannot fit on an empty tensor")
        per_ch = np.moveaxis(x, 1, 0).reshape(x.shape[1], -1)
        self.lo_ = np.percentile(per_ch, self.lo_pct, axis=1, method="linear")
        self.hi_ = np.percentile(per_ch, self.hi_pct, axis=1, method="linear")
        return self

    def transform(self, e):
        if self.lo_ is None:
            raise NotFitted("Windsorizer is not fitted")
        x = _data(e)
        if x.size == 0:
            raise InvalidInput("empty tensor")
        out = np.clip(x, self.lo_[None, :, None], self.hi_[None, :, None])
        return e.with_data(out) if hasattr(e, "with_data") else out

    def fit_transform(self, e):
        return self.fit(e).transform(e)


def windsorize(e, lo_pct=10.0, hi_pct=90.0):
    return Windsorizer(lo_pct, hi_pct).fit_transform(e)


class ZScore:
    """Standardise every (channel, sample) feature with training statistics.

    Features whose training standard deviation is zero keep std = 1, so a
    constant feature maps to zeros instead of dividing by zero.
    """

    def __init__(self):
        self.mean_ = None
        self.std_ = None

    def fit(self, e):
        x = _data(e)
        if x.shape[0] == 0:
            raise InvalidInput("cannot fit on zero trials")
        self.mean_ = x.mean(axis=0)
        std = x.std(axis=0)
        std[std == 0] = 1.0
        self.std_ = std
        return self

    def transform(self, e):
        if self.mean_ is None:
            raise NotFitted("ZScore is not fitted")
        out = (_data(e) - self.mean_) / self.std_
        return e.with_data(out) if hasattr(e, "with_data") else out

    def fit_transform(self, e):
        return self.fit(e).transform(e)

    def state_checksum(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.mean_).tobytes())
        h.update(np.ascontiguousarray(self.std_).tobytes())
        return h.hexdigest()


def zscore_fit(e):
    return ZScore().fit(e)


def zscore_apply(e, stats):
    return stats.transform(e)
