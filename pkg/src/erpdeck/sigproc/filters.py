"""IIR filter design and zero-phase filtering."""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter, lfilter_zi

from ..errors import InvalidBand, InvalidInput, SignalTooShort


@dataclass(frozen=True)
class IirFilter:
    """Transfer function ``b(z) / a(z)`` with ``a[0] == 1``."""

    b: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=np.float64))
        a = np.atleast_1d(np.asarray(self.a, dtype=np.float64))
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(a))):
            raise InvalidInput("filter coefficients must be finite")
        if a[0] == 0:
            raise InvalidInput("a[0] must be non-zero")
        b, a = b / a[0], a / a[0]
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        if not self.is_stable():
            raise InvalidInput("filter is unstable (pole on or outside the unit circle)")

    @property
    def order(self):
        return len(self.a) - 1

    def poles(self):
        a = self.a
        n = len(a) - 1
        if n == 0:
            return np.zeros(0, dtype=complex)
        companion = np.zeros((n, n))
        companion[0, :] = -a[1:]
        companion[1:, :-1] = np.eye(n - 1)
        return np.linalg.eigvals(companion)

    def is_stable(self):
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def response(self, freqs, fs):
        """Complex frequency response at ``freqs`` (Hz)."""
        z = np.exp(-1j * 2 * np.pi * np.asarray(freqs, dtype=np.float64) / fs)
        num = np.polyval(self.b[::-1], z)
        den = np.polyval(self.a[::-1], z)
        return num / den

    def gain_db(self, freqs, fs):
        return 20 * np.log10(np.abs(self.response(freqs, fs)))


def _zpk_to_tf(z, p, k):
    b = np.real(k * np.poly(z)) if len(z) else np.array([np.real(k)])
    a = np.real(np.poly(p))
    return b, a


def butter_bandpass(order, lo_hz, hi_hz, fs):
    """Butterworth bandpass of total order ``order`` (must be even).

    An analog lowpass prototype of order ``order // 2`` is mapped to a
    bandpass around the pre-warped band edges and discretised with the
    bilinear transform, so the -3 dB points land exactly on ``lo_hz`` and
    ``hi_hz``.
    """
    if int(order) != order or order < 2 or order % 2:
        raise InvalidInput(f"bandpass order must be a positive even integer, got {order}")
    if not (0 < lo_hz < hi_hz < fs / 2):
        raise InvalidBand(f"need 0 < lo < hi < fs/2, got lo={lo_hz}, hi={hi_hz}, fs={fs}")
    n = int(order) // 2
    fs2 = 2.0 * fs
    w_lo = fs2 * np.tan(np.pi * lo_hz / fs)
    w_hi = fs2 * np.tan(np.pi * hi_hz / fs)
    bw = w_hi - w_lo
    w0 = np.sqrt(w_lo * w_hi)

    proto = -np.exp(1j * np.pi * np.arange(-n + 1, n, 2) / (2 * n))
    # lowpass -> bandpass: each prototype pole splits into a pair
    half = proto * bw / 2
    disc = np.sqrt(half ** 2 - w0 ** 2)
    poles_a = np.concatenate([half + disc, half - disc])
    zeros_a = np.zeros(n)
    k_a = bw ** n

    # bilinear transform; the n zeros at infinity land on z = -1
    zeros_d = np.concatenate([(fs2 + zeros_a) / (fs2 - zeros_a), -np.ones(n)])
    poles_d = (fs2 + poles_a) / (fs2 - poles_a)
    k_d = k_a * np.real(np.prod(fs2 - zeros_a) / np.prod(fs2 - poles_a))
    b, a = _zpk_to_tf(zeros_d, poles_d, k_d)
    return IirFilter(b, a)


def notch(f0_hz, q, fs):
    """Second-order IIR notch with quality factor ``q``."""
    if not (0 < f0_hz < fs / 2):
        raise InvalidBand(f"notch frequency must lie in (0, fs/2), got {f0_hz}")
    if q <= 0:
        raise InvalidInput("q must be positive")
    w0 = 2 * np.pi * f0_hz / fs
    bw = w0 / q
    g = 1.0 / (1.0 + np.tan(bw / 2))
    b = g * np.array([1.0, -2.0 * np.cos(w0), 1.0])
    a = np.array([1.0, -2.0 * g * np.cos(w0), 2.0 * g - 1.0])
    return IirFilter(b, a)


def padlen(f):
    return 3 * max(len(f.a), len(f.b))


def filtfilt(f, x, axis=-1):
    """Zero-phase forward-backward filtering.

    Edges are extended by odd reflection over ``3 * max(len(a), len(b))``
    samples and each pass starts from the steady-state initial conditions
    scaled to its first sample.  The result is the mean of the
    forward-backward and backward-forward passes, which makes the filter
    exactly symmetric under time reversal; away from the edges both passes
    agree and the output equals the classical single forward-backward run.
    """
    x = np.asarray(x, dtype=np.float64)
    x = np.moveaxis(x, axis, -1)
    npad = padlen(f)
    if x.shape[-1] <= npad:
        raise SignalTooShort(f"signal of length {x.shape[-1]} needs more than {npad} samples")
    left = 2 * x[..., :1] - x[..., npad:0:-1]
    right = 2 * x[..., -1:] - x[..., -2:-npad - 2:-1]
    ext = np.concatenate([left, x, right], axis=-1)

    b, a = f.b, f.a
    if len(a) < len(b):
        a = np.concatenate([a, np.zeros(len(b) - len(a))])
    elif len(b) < len(a):
        b = np.concatenate([b, np.zeros(len(a) - len(b))])
    zi = lfilter_zi(b, a).reshape((1,) * (ext.ndim - 1) + (-1,))

    def fwd_bwd(s):
        y, _ = lfilter(b, a, s, axis=-1, zi=zi * s[..., :1])
        y = y[..., ::-1]
        y, _ = lfilter(b, a, y, axis=-1, zi=zi * y[..., :1])
        return y[..., ::-1]

    y = 0.5 * (fwd_bwd(ext) + fwd_bwd(ext[..., ::-1])[..., ::-1])
    y = y[..., npad:-npad]
    return np.moveaxis(np.ascontiguousarray(y), -1, axis)


def lfilter_causal(f, x, axis=-1):
    """Single causal pass (what a hardware filter would do)."""
    return lfilter(f.b, f.a, np.asarray(x, dtype=np.float64), axis=axis)
