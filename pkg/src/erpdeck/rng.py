"""Seeded random streams.

All randomness in the package flows through :class:`Stream`, a lane-parallel
xoshiro256** generator.  A stream holds ``LANES`` independent xoshiro256**
states advanced in lock-step with vectorised uint64 arithmetic; outputs are
read lane-major per step and buffered, so the sequence of values does not
depend on how draws are chunked.

Seeds for sub-tasks (noise of one session, dropout masks of one training run,
one cell of a comparison grid, ...) are derived with :func:`derive_seed`,
which folds a tuple of integer / string keys into a 64-bit value through the
splitmix64 finaliser.  Lane states are filled from the splitmix64 sequence
started at the derived seed, the initialisation recommended by the xoshiro
authors.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
LANES = 1024

_U64 = np.uint64


def splitmix64(x):
    """One splitmix64 step on a python int; returns ``(new_state, output)``."""
    x = (x + GOLDEN) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def _key_to_int(key):
    if isinstance(key, (bool, np.bool_)):
        return int(key)
    if isinstance(key, (int, np.integer)):
        return int(key) & MASK64
    if isinstance(key, str):
        h = 0
        for b in key.encode("utf-8"):
            h, _ = splitmix64(h ^ b)
        return h
    raise TypeError(f"unsupported seed key {key!r}")


def derive_seed(master, *keys):
    """Hash ``master`` and ``keys`` into a 64-bit sub-seed (order sensitive)."""
    _, h = splitmix64(_key_to_int(master))
    for k in keys:
        _, h = splitmix64(h ^ _key_to_int(k))
    return h


def _splitmix_words(seed, n):
    """First ``n`` splitmix64 outputs starting from state ``seed`` (vectorised)."""
    with np.errstate(over="ignore"):
        z = _U64(seed) + np.arange(1, n + 1, dtype=np.uint64) * _U64(GOLDEN)
        z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
        return z ^ (z >> _U64(31))


def _rotl(x, k):
    return (x << _U64(k)) | (x >> _U64(64 - k))


class Stream:
    """Buffered lane-parallel xoshiro256** stream.

    ``lanes`` fixes the interleaving and is part of the stream identity:
    wide streams (e.g. for dropout masks) amortise the per-step overhead.
    """

    def __init__(self, seed, *keys, lanes=LANES):
        seed = derive_seed(seed, *keys) if keys else _key_to_int(seed)
        self.seed = seed
        self.lanes = int(lanes)
        self._s = _splitmix_words(seed, 4 * self.lanes).reshape(4, self.lanes)
        self._buf = np.empty(0, dtype=np.uint64)

    def child(self, *keys, lanes=None):
        return Stream(derive_seed(self.seed, *keys), lanes=self.lanes if lanes is None else lanes)

    def _step(self):
        s = self._s
        with np.errstate(over="ignore"):
            out = _rotl(s[1] * _U64(5), 7) * _U64(9)
            t = s[1] << _U64(17)
            s[2] ^= s[0]
            s[3] ^= s[1]
            s[1] ^= s[2]
            s[0] ^= s[3]
            s[2] ^= t
            s[3] = _rotl(s[3], 45)
        return out

    def raw(self, n):
        """Next ``n`` raw uint64 outputs."""
        n = int(n)
        parts = [self._buf]
        have = self._buf.size
        while have < n:
            need = -(-(n - have) // self.lanes)
            block = np.stack([self._step() for _ in range(need)])
            parts.append(block.ravel())
            have += block.size
        allv = np.concatenate(parts) if len(parts) > 1 else parts[0]
        self._buf = allv[n:]
        return allv[:n]

    def random(self, size=None):
        """Uniform doubles in [0, 1) with 53 random bits."""
        n = 1 if size is None else int(np.prod(size))
        u = (self.raw(n) >> _U64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
        return float(u[0]) if size is None else u.reshape(size)

    def bernoulli(self, size, p):
        """Boolean array, True with probability ``p`` quantised to 1/65536.

        Each raw output supplies four 16-bit draws (little-endian order),
        four times cheaper than ``random(size) < p`` for large masks.
        """
        n = int(np.prod(size))
        words = self.raw(-(-n // 4)).astype("<u8", copy=False)
        u16 = words.view("<u2")[:n]
        thresh = int(round(float(p) * 65536.0))
        if thresh >= 65536:
            return np.ones(size, dtype=bool)
        return (u16 < np.uint16(max(thresh, 0))).reshape(size)

    def uniform(self, low, high, size=None):
        return low + (high - low) * self.random(size)

    def normal(self, size=None, loc=0.0, scale=1.0):
        """Standard normals by the Box-Muller transform."""
        n = 1 if size is None else int(np.prod(size))
        m = -(-n // 2)
        u = self.random(2 * m).reshape(2, m)
        r = np.sqrt(-2.0 * np.log1p(-u[0]))
        theta = 2.0 * np.pi * u[1]
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        z = loc + scale * z
        return float(z[0]) if size is None else z.reshape(size)

    def integers(self, high, size=None):
        """Integers in ``[0, high)``."""
        u = self.random(size)
        return np.minimum((u * high).astype(np.int64), high - 1) if size is not None else min(int(u * high), high - 1)

    def permutation(self, n):
        return np.argsort(self.random(int(n)), kind="stable")

    def shuffled(self, seq):
        seq = list(seq)
        return [seq[i] for i in self.permutation(len(seq))]
