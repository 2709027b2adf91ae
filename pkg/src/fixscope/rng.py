"""SplitMix64, the one PRNG every stochastic path in fixscope draws from.

The generator is counter based: the i-th output (0-based) of a stream
seeded with ``s`` is ``mix(s + (i + 1) * GAMMA) mod 2**64`` where ``mix`` is
the SplitMix64 finalizer::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

All derived draws are integer-only so results do not depend on float
rounding:

* ``below(n)``    -> ``((u >> 32) * n) >> 32``, uniform on ``0..n-1`` (n < 2**32)
* ``normal_q16``  -> sum of the top 16 bits of 12 outputs minus ``6 * 65536``;
  an Irwin-Hall approximation of N(0, 1) scaled by 65536.
"""
from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic sub-seed for ``keys`` under a parent ``seed``."""
    s = seed & MASK64
    for k in keys:
        s = mix64(s ^ mix64((k * GAMMA + GAMMA) & MASK64))
    return s


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def u64(self, count: int) -> np.ndarray:
        """Next ``count`` outputs as a uint64 array; advances the stream."""
        idx = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = np.uint64(self.state) + idx * np.uint64(GAMMA)
            out = _mix_array(states)
        self.state = (self.state + count * GAMMA) & MASK64
        return out

    def below(self, n: int, count: int) -> np.ndarray:
        if not 0 < n < (1 << 32):
            raise ValueError(f"range size must be in 1..2**32-1, got {n}")
        u = self.u64(count)
        with np.errstate(over="ignore"):
            return (((u >> np.uint64(32)) * np.uint64(n)) >> np.uint64(32)).astype(np.int64)

    def normal_q16(self, count: int) -> np.ndarray:
        u = self.u64(12 * count).reshape(count, 12) >> np.uint64(48)
        return u.astype(np.int64).sum(axis=1) - 6 * 65536
