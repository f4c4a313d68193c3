"""Synthetic calibration / copy-spelling sessions."""

from dataclasses import dataclass, replace

import numpy as np

from ..errors import InvalidInput, InvalidProtocol
from ..rng import Stream, derive_seed
from ..sigproc.epochs import MONTAGE, ContinuousRecording
from .components import CHANNEL_GROUPS, TEMPLATE_SPAN_MS, template
from .noise import NoiseSpec, make_noise
from .protocol import ProtocolConfig, flash_sequence, target_sequence


@dataclass
class SynthesisTrace:
    """What went into a synthetic recording, kept so it can be re-rendered."""

    cfg: ProtocolConfig
    components: list
    noise: np.ndarray
    targets: np.ndarray
    event_gain: np.ndarray
    seed: int
    channel_scale: np.ndarray = None
    latency_offsets_ms: np.ndarray = None


def _schedule(cfg, rng):
    targets = target_sequence(cfg.n_commands, cfg.targets_per_session, rng.child("targets"))
    onsets_ms = []
    commands = []
    selection = []
    t = cfg.lead_in_ms
    for i in range(cfg.targets_per_session):
        seq = flash_sequence(cfg.n_commands, cfg.repetitions, cfg.min_gap, rng.child("flashes", i))
        start = t + cfg.cue_ms
        onsets_ms.extend(start + np.arange(len(seq)) * cfg.soa_ms)
        commands.extend(seq)
        selection.extend([i] * len(seq))
        t += cfg.selection_time_ms
    total_ms = t + cfg.tail_ms
    return targets, np.array(onsets_ms), np.array(commands), np.array(selection), total_ms


def render_signal(trace, samples):
    """Sum of target-locked templates, shape ``(channels, n_times)``."""
    n_times = trace.noise.shape[1]
    fs = trace.cfg.fs
    sig = np.zeros((len(MONTAGE), n_times))
    L = int(round(TEMPLATE_SPAN_MS / 1000.0 * fs))
    base = None
    for k, (s, g) in enumerate(zip(samples, trace.event_gain)):
        if g == 0:
            continue
        if trace.latency_offsets_ms is not None:
            tpl = template(trace.components, fs, trace.latency_offsets_ms[k], trace.channel_scale)
        else:
            if base is None:
                base = template(trace.components, fs, None, trace.channel_scale)
            tpl = base
        stop = min(s + L, n_times)
        sig[:, s:stop] += g * tpl[:, : stop - s]
    return sig


def synth_session(cfg=None, components=(), noise=None, attend_gain=1.0, seed=None):
    """Generate one session.

    Parameters
    ----------
    cfg : ProtocolConfig
        Timing and counts; defaults to the calibration protocol.
    components : sequence of ErpComponentSpec
        Templates added after every target flash.
    noise : NoiseSpec
        Background noise; its ``seed`` is the session seed unless ``seed``
        is given.
    attend_gain : float or array, shape (targets_per_session,)
        Multiplier of the target response for each selection.
    """
    cfg = ProtocolConfig.calibration() if cfg is None else cfg
    try:
        cfg.validate()
    except InvalidProtocol:
        raise
    noise = NoiseSpec() if noise is None else noise
    seed = noise.seed if seed is None else seed
    gains = np.broadcast_to(np.asarray(attend_gain, dtype=np.float64), (cfg.targets_per_session,))
    if not np.all(np.isfinite(gains)):
        raise InvalidProtocol("attend_gain must be finite")
    components = list(components)
    for c in components:
        if len(c.weights) != len(MONTAGE):
            raise InvalidProtocol(f"{c.name}: weight map must cover {len(MONTAGE)} channels")

    rng = Stream(seed, "schedule")
    targets, onsets_ms, commands, selection, total_ms = _schedule(cfg, rng)
    fs = cfg.fs
    n_times = int(round(total_ms / 1000.0 * fs))
    samples = np.round(onsets_ms / 1000.0 * fs).astype(np.int64)
    is_target = commands == targets[selection]

    noise_arr = make_noise(noise, len(MONTAGE), n_times, fs, seed=derive_seed(seed, "noise"))
    trace = SynthesisTrace(
        cfg=cfg,
        components=components,
        noise=noise_arr,
        targets=targets,
        event_gain=np.where(is_target, gains[selection], 0.0),
        seed=int(seed),
    )
    signal = render_signal(trace, samples)
    return ContinuousRecording(
        fs=fs,
        channels=list(MONTAGE),
        data=noise_arr + signal,
        event_samples=samples,
        event_commands=commands,
        event_targets=is_target,
        event_blocks=np.arange(len(samples)) // cfg.n_commands,
        n_commands=cfg.n_commands,
        trace=trace,
    )


def channel_scale_map(amplitude_scale):
    """Per-channel multipliers from a float, a group->scale dict or an array."""
    if amplitude_scale is None:
        return np.ones(len(MONTAGE))
    if isinstance(amplitude_scale, dict):
        scale = np.ones(len(MONTAGE))
        for key, val in amplitude_scale.items():
            chans = CHANNEL_GROUPS.get(key, (key,))
            for ch in chans:
                if ch not in MONTAGE:
                    raise InvalidInput(f"unknown channel or group {key!r}")
                scale[MONTAGE.index(ch)] = val
    else:
        scale = np.broadcast_to(np.asarray(amplitude_scale, dtype=np.float64), (len(MONTAGE),)).copy()
    if np.any(scale < 0) or not np.all(np.isfinite(scale)):
        raise InvalidInput("amplitude scales must be finite and >= 0")
    return scale


def session_shift(rec, amplitude_scale=None, latency_jitter_ms=0.0, seed=0, latency_shift_ms=0.0):
    """Re-render the target responses of a synthetic recording.

    Channel contributions are multiplied by ``amplitude_scale`` and each
    target response is moved by ``latency_shift_ms`` plus a uniform jitter in
    ``[-latency_jitter_ms, +latency_jitter_ms]``.  The noise is reused as is.
    """
    trace = rec.trace
    if trace is None:
        raise InvalidInput("session_shift needs a synthetic recording (missing trace)")
    if latency_jitter_ms < 0:
        raise InvalidInput("latency jitter must be >= 0")
    scale = channel_scale_map(amplitude_scale)
    offsets = None
    if latency_jitter_ms > 0 or latency_shift_ms != 0:
        jit = Stream(seed, "latency_jitter").uniform(-1.0, 1.0, rec.n_events) * latency_jitter_ms
        offsets = latency_shift_ms + jit
    new_trace = replace(
        trace,
        channel_scale=None if np.all(scale == 1.0) and trace.channel_scale is None else scale,
        latency_offsets_ms=offsets,
    )
    signal = render_signal(new_trace, rec.event_samples)
    out = replace(rec, data=trace.noise + signal, trace=new_trace)
    return out
