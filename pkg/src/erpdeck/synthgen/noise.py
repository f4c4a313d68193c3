"""Background EEG noise: pink + white + mains, through the acquisition filters."""

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import InvalidInput
from ..rng import Stream
from ..sigproc.filters import butter_bandpass, filtfilt, notch


@dataclass(frozen=True)
class NoiseSpec:
    pink_uv: float = 10.0
    white_uv: float = 2.0
    mains_uv: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if min(self.pink_uv, self.white_uv, self.mains_uv) < 0:
            raise InvalidInput("noise amplitudes must be >= 0")

    @property
    def silent(self):
        return self.pink_uv == 0 and self.white_uv == 0 and self.mains_uv == 0

    def to_dict(self):
        return asdict(self)


def pink_noise(n_channels, n_times, rng):
    """Unit-RMS 1/f noise: white Gaussian spectrum weighted by ``1/sqrt(f)``."""
    nf = n_times // 2 + 1
    re = rng.normal((n_channels, nf))
    im = rng.normal((n_channels, nf))
    spec = re + 1j * im
    k = np.arange(nf, dtype=np.float64)
    weight = np.zeros(nf)
    weight[1:] = 1.0 / np.sqrt(k[1:])
    x = np.fft.irfft(spec * weight, n=n_times, axis=1)
    x -= x.mean(axis=1, keepdims=True)
    rms = np.sqrt(np.mean(x ** 2, axis=1, keepdims=True))
    rms[rms == 0] = 1.0
    return x / rms


def acquisition_filters(fs):
    """50 Hz notch and 0.1-60 Hz order-4 Butterworth of the amplifier stage."""
    hi = min(60.0, 0.45 * fs)
    return notch(50.0, 35.0, fs), butter_bandpass(4, 0.1, hi, fs)


def make_noise(spec, n_channels, n_times, fs, seed=None):
    """Filtered background noise, shape ``(n_channels, n_times)``."""
    if spec.silent:
        return np.zeros((n_channels, n_times))
    base = spec.seed if seed is None else seed
    rng = Stream(base, "noise")
    x = np.zeros((n_channels, n_times))
    if spec.pink_uv:
        x += spec.pink_uv * pink_noise(n_channels, n_times, rng.child("pink"))
    if spec.white_uv:
        x += spec.white_uv * rng.child("white").normal((n_channels, n_times))
    if spec.mains_uv:
        phase = rng.child("mains").uniform(0, 2 * np.pi, n_channels)
        t = np.arange(n_times) / fs
        x += spec.mains_uv * np.sin(2 * np.pi * 50.0 * t[None, :] + phase[:, None])
    if fs > 2 * 50.0:
        nf, bp = acquisition_filters(fs)
        x = filtfilt(bp, filtfilt(nf, x))
    return x
