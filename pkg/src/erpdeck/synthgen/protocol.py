"""Stimulation protocol and flash scheduling."""

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConstraintUnsatisfiable, InvalidProtocol
from ..rng import Stream


@dataclass(frozen=True)
class ProtocolConfig:
    """Timing of one calibration or copy-spelling session (all times in ms).

    The post-sequence gap hosts both processing and the feedback display, so
    one selection lasts ``cue + n_commands * soa * repetitions + gap``
    (2490 ms for the online defaults).
    """

    n_commands: int = 9
    soa_ms: float = 110.0
    stim_ms: float = 40.0
    isi_ms: float = 70.0
    cue_ms: float = 500.0
    feedback_ms: float = 500.0
    processing_gap_ms: float = 1000.0
    repetitions: int = 10
    targets_per_session: int = 18
    fs: float = 512.0
    min_gap: int = 2
    lead_in_ms: float = 1000.0
    tail_ms: float = 1200.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.n_commands < 2:
            raise InvalidProtocol("need at least two commands")
        if min(self.soa_ms, self.stim_ms, self.isi_ms, self.fs) <= 0:
            raise InvalidProtocol("timing values and fs must be positive")
        if abs(self.stim_ms + self.isi_ms - self.soa_ms) > 1e-9:
            raise InvalidProtocol(
                f"stim_ms + isi_ms must equal soa_ms ({self.stim_ms} + {self.isi_ms} != {self.soa_ms})"
            )
        if self.repetitions < 1 or self.targets_per_session < 1:
            raise InvalidProtocol("repetitions and targets_per_session must be >= 1")
        if min(self.cue_ms, self.feedback_ms, self.processing_gap_ms, self.lead_in_ms) < 0:
            raise InvalidProtocol("durations must be non-negative")
        if self.feedback_ms > self.processing_gap_ms:
            raise InvalidProtocol("feedback must fit inside the processing gap")
        if self.min_gap < 0:
            raise InvalidProtocol("min_gap must be >= 0")

    @classmethod
    def calibration(cls, **kw):
        kw.setdefault("repetitions", 10)
        return cls(**kw)

    @classmethod
    def online(cls, **kw):
        kw.setdefault("repetitions", 1)
        return cls(**kw)

    @property
    def flashes_per_target(self):
        return self.n_commands * self.repetitions

    @property
    def n_events(self):
        return self.flashes_per_target * self.targets_per_session

    @property
    def selection_time_ms(self):
        return self.cue_ms + self.flashes_per_target * self.soa_ms + self.processing_gap_ms

    def to_dict(self):
        return asdict(self)


def flash_sequence(n_commands=9, repetitions=10, min_gap=2, seed=0, max_nodes=100_000):
    """Random flash order for one target selection.

    Every block of ``n_commands`` flashes is a permutation of ``1..n_commands``
    and two flashes of the same command are separated by at least ``min_gap``
    other flashes (index difference ``>= min_gap + 1``), also across block
    boundaries.  Blocks are drawn by randomised depth-first search.
    """
    if min_gap > n_commands - 1:
        raise ConstraintUnsatisfiable(
            f"min_gap={min_gap} cannot hold with {n_commands} commands"
        )
    rng = seed if isinstance(seed, Stream) else Stream(seed, "flash_sequence")
    seq = []
    nodes = 0
    for _ in range(repetitions):
        prev = seq[-min_gap:] if min_gap else []
        block = []
        # stack of candidate lists for depth-first search
        stack = [None]
        while len(block) < n_commands:
            depth = len(block)
            if stack[depth] is None:
                recent = (prev + block)[-min_gap:] if min_gap else []
                cands = [c for c in range(1, n_commands + 1) if c not in block and c not in recent]
                stack[depth] = rng.shuffled(cands)
            if stack[depth]:
                block.append(stack[depth].pop())
                stack.append(None)
            else:
                stack.pop()
                if not block:
                    raise ConstraintUnsatisfiable("no admissible flash order")
                block.pop()
            nodes += 1
            if nodes > max_nodes:
                raise ConstraintUnsatisfiable("search budget exhausted")
        seq.extend(block)
    return np.array(seq, dtype=np.int64)


def target_sequence(n_commands, n_targets, rng):
    """Targets cycling through every command as evenly as possible, shuffled."""
    reps = -(-n_targets // n_commands)
    pool = [c for _ in range(reps) for c in range(1, n_commands + 1)]
    order = rng.shuffled(pool)
    return np.array(order[:n_targets], dtype=np.int64)


def check_min_gap(seq, min_gap):
    last = {}
    for i, c in enumerate(seq):
        c = int(c)
        if c in last and i - last[c] < min_gap + 1:
            return False
        last[c] = i
    return True
