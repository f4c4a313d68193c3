"""Protocol-faithful flash schedules and synthetic EEG sessions."""

from .components import (
    CHANNEL_GROUPS,
    REFERENCE_COMPONENTS,
    ErpComponentSpec,
    component,
    default_weights,
    reference_components,
    template,
)
from .noise import NoiseSpec, make_noise, pink_noise
from .protocol import ProtocolConfig, check_min_gap, flash_sequence, target_sequence
from .session import SynthesisTrace, channel_scale_map, session_shift, synth_session
from .subjects import SNR_PRESETS, SubjectProfile, make_subject

__all__ = [
    "CHANNEL_GROUPS",
    "SNR_PRESETS",
    "REFERENCE_COMPONENTS",
    "ErpComponentSpec",
    "NoiseSpec",
    "ProtocolConfig",
    "SubjectProfile",
    "SynthesisTrace",
    "channel_scale_map",
    "check_min_gap",
    "component",
    "default_weights",
    "flash_sequence",
    "make_noise",
    "make_subject",
    "pink_noise",
    "session_shift",
    "synth_session",
    "reference_components",
    "target_sequence",
    "template",
]
