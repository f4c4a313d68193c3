"""Synthetic subject profiles drawn around the grand-average components."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput
from ..rng import Stream
from .components import reference_components
from .noise import NoiseSpec

# pink / white / mains RMS in µV per signal-to-noise preset
SNR_PRESETS = {
    "high": (4.0, 0.7, 5.0),
    "medium": (7.0, 1.2, 5.0),
    "low": (11.0, 2.0, 5.0),
}


@dataclass
class SubjectProfile:
    name: str
    components: list
    noise: NoiseSpec
    amp_scale: float = 1.0
    latency_shift_ms: float = 0.0
    shift: dict = field(default_factory=dict)


def make_subject(index, snr="medium", seed=0, amp_sd=0.15, latency_sd_ms=8.0):
    """Subject ``index`` with amplitude and latency drawn around the template."""
    if snr not in SNR_PRESETS:
        raise InvalidInput(f"unknown snr preset {snr!r}; choose from {sorted(SNR_PRESETS)}")
    rng = Stream(seed, "subject", int(index))
    amp = float(np.exp(amp_sd * rng.normal()))
    lat = float(latency_sd_ms * rng.normal())
    comps = [c.scaled(amp, lat) for c in reference_components()]
    pink, white, mains = SNR_PRESETS[snr]
    return SubjectProfile(
        name=f"S{index + 1}",
        components=comps,
        noise=NoiseSpec(pink_uv=pink, white_uv=white, mains_uv=mains, seed=int(rng.raw(1)[0])),
        amp_scale=amp,
        latency_shift_ms=lat,
    )
