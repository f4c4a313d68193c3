"""ERP component templates and their scalp weight maps."""

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import InvalidInput
from ..sigproc.epochs import MONTAGE

NEIGHBOURS = {
    "PO7": ("P7", "PO3", "O1"),
    "P3": ("Pz", "P7", "PO3", "Cz"),
    "P7": ("P3", "PO7"),
    "Fz": ("Cz",),
    "Cz": ("Fz", "Pz", "P3", "P4"),
    "Pz": ("Cz", "P3", "P4", "POz"),
    "POz": ("Pz", "PO3", "PO4", "Oz"),
    "PO3": ("POz", "P3", "PO7", "O1"),
    "O1": ("Oz", "PO7", "PO3"),
    "Oz": ("O1", "O2", "POz"),
    "O2": ("Oz", "PO8", "PO4"),
    "P4": ("Pz", "P8", "PO4", "Cz"),
    "P8": ("P4", "PO8"),
    "PO4": ("POz", "P4", "PO8", "O2"),
    "PO8": ("P8", "PO4", "O2"),
}

CHANNEL_GROUPS = {
    "frontal": ("Fz",),
    "central": ("Cz",),
    "parietal": ("P3", "Pz", "P4"),
    "lateral_parietal": ("P7", "P8"),
    "parieto_occipital": ("PO7", "PO3", "POz", "PO4", "PO8"),
    "occipital": ("O1", "Oz", "O2"),
}

TEMPLATE_SPAN_MS = 1000.0


def default_weights(channel, montage=MONTAGE, peak=1.0, neighbour=0.5, other=0.1):
    if channel not in montage:
        raise InvalidInput(f"unknown channel {channel!r}")
    w = np.full(len(montage), other)
    for nb in NEIGHBOURS.get(channel, ()):
        if nb in montage:
            w[montage.index(nb)] = neighbour
    w[montage.index(channel)] = peak
    return w


@dataclass(frozen=True)
class ErpComponentSpec:
    """Gaussian ERP bump: ``amplitude * weight[ch] * exp(-(t - latency)^2 / 2 width^2)``.

    ``amplitude_uv`` is signed; its sign is the component polarity.
    """

    name: str
    channel: str
    amplitude_uv: float
    latency_ms: float
    width_ms: float
    weights: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        if self.width_ms <= 0:
            raise InvalidInput(f"{self.name}: width must be positive")
        w = default_weights(self.channel) if self.weights is None else np.asarray(self.weights, float)
        if not np.all(np.isfinite(w)):
            raise InvalidInput(f"{self.name}: channel weights must be finite")
        object.__setattr__(self, "weights", w)
        lo = self.latency_ms - 3 * self.width_ms
        hi = self.latency_ms + 3 * self.width_ms
        if lo < 0 or hi > TEMPLATE_SPAN_MS:
            raise InvalidInput(
                f"{self.name}: latency +- 3 widths must stay inside 0..{TEMPLATE_SPAN_MS:g} ms"
            )

    @property
    def polarity(self):
        return 1 if self.amplitude_uv >= 0 else -1

    def scaled(self, amp_scale=1.0, latency_shift_ms=0.0):
        return replace(
            self,
            amplitude_uv=self.amplitude_uv * amp_scale,
            latency_ms=self.latency_ms + latency_shift_ms,
        )

    def to_dict(self):
        return {
            "name": self.name,
            "channel": self.channel,
            "amplitude_uv": self.amplitude_uv,
            "latency_ms": self.latency_ms,
            "width_ms": self.width_ms,
            "weights": [float(v) for v in self.weights],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            name=d["name"],
            channel=d["channel"],
            amplitude_uv=float(d["amplitude_uv"]),
            latency_ms=float(d["latency_ms"]),
            width_ms=float(d["width_ms"]),
            weights=d.get("weights"),
        )


# grand-average peaks of the face-speller recordings; widths are modelling choices
REFERENCE_COMPONENTS = (
    ErpComponentSpec("N100", "Pz", -1.18, 128.27, 20.0),
    ErpComponentSpec("P100", "P8", 2.76, 157.51, 20.0),
    ErpComponentSpec("VPP", "Fz", 3.96, 237.43, 30.0),
    ErpComponentSpec("P300", "POz", 6.41, 256.93, 40.0),
    ErpComponentSpec("N400", "Fz", -1.49, 551.27, 50.0),
)


def reference_components():
    return list(REFERENCE_COMPONENTS)


def component(name):
    for c in REFERENCE_COMPONENTS:
        if c.name == name:
            return c
    raise InvalidInput(f"unknown component {name!r}")


def template(components, fs, latency_offsets_ms=None, channel_scale=None):
    """Sum of component bumps over ``TEMPLATE_SPAN_MS``, shape ``(channels, L)``.

    ``latency_offsets_ms`` shifts every component by the same amount;
    ``channel_scale`` multiplies each channel's contribution.
    """
    L = int(round(TEMPLATE_SPAN_MS / 1000.0 * fs))
    t = np.arange(L) * 1000.0 / fs
    shift = 0.0 if latency_offsets_ms is None else latency_offsets_ms
    out = None
    for c in components:
        bump = c.amplitude_uv * np.exp(-0.5 * ((t - c.latency_ms - shift) / c.width_ms) ** 2)
        term = c.weights[:, None] * bump[None, :]
        out = term if out is None else out + term
    if out is None:
        out = np.zeros((len(MONTAGE), L))
    if channel_scale is not None:
        out = out * np.asarray(channel_scale)[:, None]
    return out
