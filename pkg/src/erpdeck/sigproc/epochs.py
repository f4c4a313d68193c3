"""Continuous recordings, epoch tensors and segmentation."""

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import EpochOutOfBounds, InvalidInput

MONTAGE = (
    "PO7", "P3", "P7", "Fz", "Cz", "Pz", "POz", "PO3",
    "O1", "Oz", "O2", "P4", "P8", "PO4", "PO8",
)


def n_samples(duration_ms, fs):
    """Sample count of a window: ``round(duration_s * fs)``."""
    return int(round(duration_ms / 1000.0 * fs))


@dataclass
class ContinuousRecording:
    """Multichannel EEG (µV) with flash events.

    ``events`` are parallel integer arrays: onset sample, command code
    (1..n_commands), target flag and selection-block index.
    """

    fs: float
    channels: list
    data: np.ndarray
    event_samples: np.ndarray
    event_commands: np.ndarray
    event_targets: np.ndarray
    event_blocks: np.ndarray = None
    n_commands: int = 9
    trace: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        self.channels = list(self.channels)
        if self.fs <= 0:
            raise InvalidInput("fs must be positive")
        if self.data.ndim != 2 or self.data.shape[0] != len(self.channels):
            raise InvalidInput(
                f"data shape {self.data.shape} does not match {len(self.channels)} channels"
            )
        self.event_samples = np.asarray(self.event_samples, dtype=np.int64)
        self.event_commands = np.asarray(self.event_commands, dtype=np.int64)
        self.event_targets = np.asarray(self.event_targets, dtype=bool)
        if self.event_blocks is None:
            self.event_blocks = np.arange(len(self.event_samples)) // self.n_commands
        self.event_blocks = np.asarray(self.event_blocks, dtype=np.int64)
        k = len(self.event_samples)
        if not (len(self.event_commands) == len(self.event_targets) == len(self.event_blocks) == k):
            raise InvalidInput("event arrays differ in length")
        if k and (self.event_samples.min() < 0 or self.event_samples.max() >= self.n_times):
            raise InvalidInput("event sample outside the recording")
        if k and (self.event_commands.min() < 1 or self.event_commands.max() > self.n_commands):
            raise InvalidInput(f"command codes must lie in 1..{self.n_commands}")

    @property
    def n_times(self):
        return self.data.shape[1]

    @property
    def n_events(self):
        return len(self.event_samples)

    @property
    def events(self):
        return [
            (int(s), int(c), bool(t))
            for s, c, t in zip(self.event_samples, self.event_commands, self.event_targets)
        ]

    def with_data(self, data):
        return replace(self, data=data)


@dataclass
class EpochTensor:
    """Segmented epochs, shape ``(trials, channels, samples)``."""

    data: np.ndarray
    labels: np.ndarray
    command_codes: np.ndarray
    fs: float
    t0_ms: float
    channels: list = field(default_factory=lambda: list(MONTAGE))
    blocks: np.ndarray = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3:
            raise InvalidInput(f"epoch data must be 3-D, got shape {self.data.shape}")
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.command_codes = np.asarray(self.command_codes, dtype=np.int64)
        if self.blocks is None:
            self.blocks = np.arange(len(self.labels)) // 9
        self.blocks = np.asarray(self.blocks, dtype=np.int64)
        n = self.data.shape[0]
        if not (len(self.labels) == len(self.command_codes) == len(self.blocks) == n):
            raise InvalidInput("per-trial metadata length differs from trial count")
        if n and not np.all(np.isin(self.labels, (0, 1))):
            raise InvalidInput("labels must be 0/1")

    @property
    def n_trials(self):
        return self.data.shape[0]

    @property
    def n_channels(self):
        return self.data.shape[1]

    @property
    def n_samples(self):
        return self.data.shape[2]

    @property
    def times_ms(self):
        return self.t0_ms + np.arange(self.n_samples) * 1000.0 / self.fs

    def subset(self, idx):
        idx = np.asarray(idx)
        return replace(
            self,
            data=self.data[idx],
            labels=self.labels[idx],
            command_codes=self.command_codes[idx],
            blocks=self.blocks[idx],
        )

    def with_data(self, data):
        return replace(self, data=data)


def segment(rec, t0_ms, t1_ms, baseline=(-200.0, 0.0)):
    """Cut one epoch per event over ``[t0_ms, t1_ms)`` after stimulus onset.

    With ``baseline`` set, each channel's mean over the baseline interval
    (relative to the same onset) is subtracted from that channel's epoch.
    """
    if t1_ms <= t0_ms:
        raise InvalidInput("epoch window must have t1 > t0")
    fs = rec.fs
    length = n_samples(t1_ms - t0_ms, fs)
    start_off = n_samples(t0_ms, fs)
    onsets = rec.event_samples
    lo = onsets + start_off
    hi = lo + length
    need_lo, need_hi = lo, hi
    if baseline is not None:
        b0, b1 = baseline
        if b1 <= b0:
            raise InvalidInput("baseline window must have b1 > b0")
        blo = onsets + n_samples(b0, fs)
        bhi = blo + n_samples(b1 - b0, fs)
        need_lo = np.minimum(need_lo, blo)
        need_hi = np.maximum(need_hi, bhi)
    if len(onsets) and (need_lo.min() < 0 or need_hi.max() > rec.n_times):
        raise EpochOutOfBounds("an epoch window overruns the recording")

    idx = lo[:, None] + np.arange(length)[None, :]
    data = rec.data[:, idx].transpose(1, 0, 2)
    if baseline is not None:
        bidx = blo[:, None] + np.arange(n_samples(b1 - b0, fs))[None, :]
        base = rec.data[:, bidx].mean(axis=2).T
        data = data - base[:, :, None]
    return EpochTensor(
        data=np.ascontiguousarray(data),
        labels=rec.event_targets.astype(np.int64),
        command_codes=rec.event_commands,
        fs=fs,
        t0_ms=start_off * 1000.0 / fs,
        channels=list(rec.channels),
        blocks=rec.event_blocks,
    )
