"""Pinned, vectorized xoshiro256** streams.

The generator is xoshiro256** 1.0 (Blackman & Vigna), a 64-bit xorshift
(linear feedback shift register) family member, seeded through splitmix64.
Each array element is an independent stream keyed by ``(seed, *indices)``,
so a Monte Carlo trajectory sees the same numbers no matter how work is
batched. Only bit operations and wrapping uint64 arithmetic are used, so
output is identical across platforms and numpy versions.
"""

from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STAR5 = np.uint64(5)
_STAR9 = np.uint64(9)
_TWO53 = 2.0**-53


def _u64(x):
    return np.asarray(x).astype(np.uint64) if not isinstance(x, int) else np.uint64(x & _M64)


def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


def splitmix64(x):
    """One splitmix64 output for each state value (state advanced by the golden gamma)."""
    with np.errstate(over="ignore"):
        z = _u64(x) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, *indices) -> np.ndarray:
    """Hash a seed and integer index arrays into one uint64 key per stream."""
    with np.errstate(over="ignore"):
        key = splitmix64(np.uint64(int(seed) & _M64))
        for idx in indices:
            key = splitmix64(key ^ splitmix64(np.asarray(idx, dtype=np.uint64)))
    return np.atleast_1d(key)


class Xoshiro256:
    """A batch of independent xoshiro256** streams, one per key."""

    def __init__(self, keys):
        keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
        s = np.empty((4,) + keys.shape, dtype=np.uint64)
        x = keys.copy()
        with np.errstate(over="ignore"):
            for i in range(4):
                s[i] = splitmix64(x)
                x = x + _GOLDEN
        self.state = s

    @classmethod
    def from_seed(cls, seed: int, n: int, *extra):
        return cls(stream_key(seed, *extra, np.arange(n, dtype=np.uint64)))

    @property
    def size(self) -> int:
        return self.state.shape[1] if self.state.ndim > 1 else 1

    def next_u64(self, active=None) -> np.ndarray:
        s0, s1, s2, s3 = self.state
        with np.errstate(over="ignore"):
            out = _rotl(s1 * _STAR5, 7) * _STAR9
        t = s1 << np.uint64(17)
        n2 = s2 ^ s0
        n3 = s3 ^ s1
        n1 = s1 ^ n2
        n0 = s0 ^ n3
        n2 = n2 ^ t
        n3 = _rotl(n3, 45)
        new = np.stack([n0, n1, n2, n3])
        if active is None:
            self.state = new
        else:
            self.state = np.where(active, new, self.state)
        return out

    def uniform(self, active=None) -> np.ndarray:
        """Doubles in [0, 1) built from the top 53 bits."""
        return (self.next_u64(active) >> np.uint64(11)).astype(np.float64) * _TWO53

    def uniform_open(self, active=None) -> np.ndarray:
        """Doubles in (0, 1]."""
        return 1.0 - self.uniform(active)

    def exponential(self, rate, active=None) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return -np.log(self.uniform_open(active)) / rate

    def cauchy(self, hwhm, active=None) -> np.ndarray:
        """Lorentzian deviates centered at zero with the given half width."""
        u = self.uniform(active)
        return hwhm * np.tan(np.pi * (u - 0.5))

    def normal(self, active=None) -> np.ndarray:
        """Standard normals by the Box-Muller transform (two draws per value)."""
        u1 = self.uniform_open(active)
        u2 = self.uniform(active)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def normals(seed: int, n: int, *extra) -> np.ndarray:
    """``n`` standard normals, element ``i`` drawn from stream ``(seed, *extra, i)``."""
    if n == 0:
        return np.zeros(0)
    return Xoshiro256.from_seed(seed, n, *extra).normal()
