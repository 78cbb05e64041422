"""Deterministic 64-bit PRNG shared by the pure and compiled backends.

splitmix64 is used instead of the stdlib Mersenne Twister so the compiled
kernel can run the exact same generator in C and produce bit-identical
decision streams. All stochastic queue decisions (RED/CHOKe/SFB coin flips,
candidate draws, hash salts, boxtime jitter) go through this generator.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanching 64-bit mix."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, stream: int) -> int:
    """Child seed for an independent component stream."""
    return mix64(mix64(seed) ^ ((stream * _GAMMA) & MASK64))


def hash_to_bin(flow_id: int, salt: int, nbins: int) -> int:
    """Deterministic flow -> bin mapping; distinct salts give independent maps."""
    return mix64(((flow_id * _GAMMA) & MASK64) ^ salt) % nbins


class SplitMix64:
    """Deterministic stream: same seed, same sequence, on any backend."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo bias is irrelevant for n << 2**64."""
        return self.next_u64() % n
